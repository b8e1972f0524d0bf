#include "ace/pipeline.hpp"

#include <map>
#include <set>
#include <sstream>

#include "ace/errors.hpp"
#include "ace/prompts.hpp"
#include "ace/strings.hpp"

namespace ace {

using nlohmann::json;

namespace {

std::string excerpt(const std::string& s) {
    return s.size() <= 200 ? s : s.substr(0, 200);
}

}  // namespace

nlohmann::json parse_response_json(const std::string& raw) {
    const std::string marker = "RESPONSE JSON:";
    size_t pos = raw.find(marker);
    if (pos == std::string::npos)
        throw ParseError("no RESPONSE JSON marker: " + excerpt(raw));
    size_t start = raw.find('{', pos + marker.size());
    if (start == std::string::npos)
        throw ParseError("no JSON object after marker: " + excerpt(raw.substr(pos)));

    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < raw.size(); ++i) {
        char c = raw[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) {
                std::string body = raw.substr(start, i - start + 1);
                json parsed = json::parse(body, nullptr, false);
                if (parsed.is_discarded())
                    throw ParseError("malformed JSON after marker: " + excerpt(body));
                return parsed;
            }
        }
    }
    throw ParseError("unterminated JSON object: " + excerpt(raw.substr(start)));
}

std::string parse_submission(const std::string& submission) {
    const std::string keyword = "ANSWER:";
    std::istringstream in(submission);
    std::string line;
    std::string found;
    while (std::getline(in, line)) {
        size_t pos = line.rfind(keyword);
        if (pos != std::string::npos) found = trim(line.substr(pos + keyword.size()));
    }
    return found;
}

std::vector<std::string> generate_areas(const std::string& domain, int num_areas,
                                        int num_caps_per_area, ChatTransport& transport) {
    if (num_areas < 1) throw ValidationError("num_areas must be >= 1");
    std::string user = render_prompt(prompt_template(PromptRole::AreaGen),
                                     {{"num_areas", std::to_string(num_areas)},
                                      {"domain", domain},
                                      {"num_capabilities_per_area",
                                       std::to_string(num_caps_per_area)}});
    std::string raw = transport.complete(transport_role(PromptRole::AreaGen), "", user);
    json parsed = parse_response_json(raw);

    size_t area_keys = 0;
    for (const auto& [key, value] : parsed.items())
        if (key.rfind("area_", 0) == 0) ++area_keys;
    if (area_keys != static_cast<size_t>(num_areas))
        throw ValidationError("expected " + std::to_string(num_areas) + " areas, got " +
                              std::to_string(area_keys) + "; response: " + excerpt(raw));

    std::vector<std::string> areas;
    std::set<std::string> seen;
    for (int i = 0; i < num_areas; ++i) {
        std::string key = "area_" + std::to_string(i);
        if (!parsed.contains(key))
            throw ValidationError("missing key '" + key + "'; response: " + excerpt(raw));
        std::string area = trim(parsed[key].get<std::string>());
        if (area.empty())
            throw ValidationError("empty area for '" + key + "'; response: " + excerpt(raw));
        if (!seen.insert(area).second)
            throw ValidationError("duplicate area '" + area + "'; response: " + excerpt(raw));
        areas.push_back(std::move(area));
    }
    return areas;
}

std::vector<CapabilityRecord> generate_capabilities(
    const std::string& area, const std::string& domain,
    const std::vector<std::string>& prior_names, int count,
    const std::string& sample_capability_json, ChatTransport& transport) {
    if (count < 1) throw ValidationError("count must be >= 1");

    json prev = json::array();
    for (const auto& n : prior_names) prev.push_back(n);
    std::string system = render_prompt(prompt_template(PromptRole::CapGenSystem), {});
    std::string user = render_prompt(prompt_template(PromptRole::CapGenUser),
                                     {{"sample_capability_json", sample_capability_json},
                                      {"prev_capabilities", prev.dump()},
                                      {"num_gen_capabilities", std::to_string(count)},
                                      {"capability_area", area},
                                      {"domain", domain}});
    std::string raw =
        transport.complete(transport_role(PromptRole::CapGenUser), system, user);
    json parsed = parse_response_json(raw);

    std::set<std::string> taken(prior_names.begin(), prior_names.end());
    std::vector<std::string> problems;
    std::vector<CapabilityRecord> records;
    for (int i = 0; i < count; ++i) {
        std::string key = "capability_" + std::to_string(i);
        if (!parsed.contains(key) || !parsed[key].is_object()) {
            problems.push_back(key + ": missing or not an object");
            continue;
        }
        const json& cap = parsed[key];
        bool ok = true;
        for (const char* field : {"name", "description", "domain", "class"}) {
            if (!cap.contains(field) || !cap[field].is_string() ||
                cap[field].get<std::string>().empty()) {
                problems.push_back(key + ": missing field '" + field + "'");
                ok = false;
            }
        }
        if (!ok) continue;
        CapabilityRecord r;
        r.name = cap["name"].get<std::string>();
        r.id = slug_from_name(r.name);
        r.area = area;
        r.domain = cap["domain"].get<std::string>();
        r.description = cap["description"].get<std::string>();
        r.class_source = cap["class"].get<std::string>();
        if (!taken.insert(r.name).second) {
            problems.push_back(key + ": name '" + r.name + "' already exists");
            continue;
        }
        records.push_back(std::move(r));
    }
    if (!problems.empty()) {
        std::string joined;
        for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
        throw ValidationError("capability generation rejected: " + joined);
    }
    return records;
}

std::vector<TaskRecord> generate_tasks(const CapabilityRecord& capability, int count,
                                       ChatTransport& transport,
                                       const std::string& sample_tasks) {
    if (count < 1) throw ValidationError("count must be >= 1");
    std::string system = render_prompt(prompt_template(PromptRole::TaskGenSystem), {});
    std::string user = render_prompt(prompt_template(PromptRole::TaskGenUser),
                                     {{"capability_name", capability.name},
                                      {"capability_description", capability.description},
                                      {"capability_domain", capability.domain},
                                      {"capability_sample_tasks", sample_tasks},
                                      {"num_gen_tasks", std::to_string(count)}});
    std::string raw =
        transport.complete(transport_role(PromptRole::TaskGenUser), system, user);
    json parsed = parse_response_json(raw);

    std::vector<TaskRecord> tasks;
    std::map<std::string, int> first_index;
    std::vector<std::string> duplicates;
    for (int i = 1; i <= count; ++i) {
        std::string key = "task_" + std::to_string(i);
        if (!parsed.contains(key))
            throw ValidationError("missing key '" + key + "'; response: " + excerpt(raw));
        std::string problem = parsed[key].get<std::string>();
        if (trim(problem).empty())
            throw ValidationError("empty problem for '" + key + "'");
        auto [it, inserted] = first_index.emplace(problem, i);
        if (!inserted)
            duplicates.push_back("task_" + std::to_string(it->second) + "/task_" +
                                 std::to_string(i));
        TaskRecord t;
        t.id = capability.id + ":" + std::to_string(i);
        t.capability_id = capability.id;
        t.problem = std::move(problem);
        tasks.push_back(std::move(t));
    }
    if (!duplicates.empty()) {
        std::string joined;
        for (const auto& d : duplicates) joined += (joined.empty() ? "" : ", ") + d;
        throw ValidationError("duplicate problems: " + joined);
    }
    return tasks;
}

TaskRecord solve_task(const TaskRecord& task, const CapabilityRecord& capability,
                      ChatTransport& transport, std::string* raw_out) {
    if (task.problem.empty()) throw ValidationError("task problem empty");
    std::string system = render_prompt(prompt_template(PromptRole::TaskSolver),
                                       {{"capability_name", capability.name},
                                        {"capability_domain", capability.domain}});
    std::string raw =
        transport.complete(transport_role(PromptRole::TaskSolver), system, task.problem);
    if (trim(raw).empty()) throw ValidationError("solver returned empty output");
    TaskRecord solved = task;
    std::string answer = parse_submission(raw);
    solved.solution = answer.empty() ? raw : answer;
    if (raw_out) *raw_out = std::move(raw);
    return solved;
}

VerificationVerdict verify_task(const TaskRecord& task, const CapabilityRecord& capability,
                                ChatTransport& transport) {
    if (task.solution.empty()) throw ValidationError("task has no solution to verify");
    std::string system = render_prompt(prompt_template(PromptRole::TaskVerifierSystem),
                                       {{"capability_domain", capability.domain}});
    std::string user = render_prompt(prompt_template(PromptRole::TaskVerifierUser),
                                     {{"capability_name", capability.name},
                                      {"capability_domain", capability.domain},
                                      {"problem", task.problem},
                                      {"answer", task.solution}});
    std::string raw =
        transport.complete(transport_role(PromptRole::TaskVerifierUser), system, user);

    VerificationVerdict verdict;
    verdict.raw = raw;

    const std::string thought_marker = "THOUGHT:";
    size_t tpos = raw.find(thought_marker);
    size_t jpos = raw.find("JUDGEMENT:");
    if (tpos != std::string::npos) {
        size_t tend = jpos != std::string::npos && jpos > tpos ? jpos : raw.size();
        verdict.thought = trim(raw.substr(tpos + thought_marker.size(), tend - tpos - thought_marker.size()));
    }
    if (jpos == std::string::npos)
        throw ParseError("no JUDGEMENT marker: " + excerpt(raw));

    std::istringstream rest(raw.substr(jpos + std::string("JUDGEMENT:").size()));
    std::string line;
    std::string candidate;
    while (std::getline(rest, line)) {
        candidate = trim(line);
        if (!candidate.empty()) break;
    }
    std::string lowered = to_lower(candidate);
    if (lowered == "yes")
        verdict.judgement = Judgement::Yes;
    else if (lowered == "no")
        verdict.judgement = Judgement::No;
    else
        throw ParseError("judgement is neither yes nor no: '" + candidate + "'");
    return verdict;
}

VerificationMetrics verification_metrics(const ConfusionCounts& counts) {
    if (counts.tp < 0 || counts.fn < 0 || counts.fp < 0 || counts.tn < 0)
        throw ValidationError("confusion counts must be non-negative");
    long total = counts.tp + counts.fn + counts.fp + counts.tn;
    if (total == 0) throw ValidationError("all confusion counts are zero");
    VerificationMetrics m;
    if (counts.tp + counts.fp > 0)
        m.precision = static_cast<double>(counts.tp) /
                      static_cast<double>(counts.tp + counts.fp);
    if (counts.tp + counts.fn > 0)
        m.recall = static_cast<double>(counts.tp) /
                   static_cast<double>(counts.tp + counts.fn);
    m.accuracy = static_cast<double>(counts.tp + counts.tn) / static_cast<double>(total);
    return m;
}

}  // namespace ace

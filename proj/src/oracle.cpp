#include "ace/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ace/csv.hpp"
#include "ace/errors.hpp"
#include "ace/pipeline.hpp"
#include "ace/rng.hpp"
#include "ace/strings.hpp"

namespace ace {

SyntheticOracle::SyntheticOracle(double noise_std, uint64_t rng_seed)
    : noise_std_(noise_std), seed_(rng_seed) {
    if (noise_std < 0.0) throw ValidationError("noise_std must be non-negative");
}

double SyntheticOracle::target(double x) {
    return std::sin(20.0 * std::numbers::pi * x) * std::exp(-5.0 * x);
}

double SyntheticOracle::evaluate(const std::string&, const Eigen::VectorXd& latent) {
    if (latent.size() < 1) throw DimensionError("synthetic oracle needs a 1-d point");
    double x = latent[0];
    if (x < 0.0 || x > 1.0)
        throw ValidationError("x = " + format_double(x) + " outside [0,1]");
    double noise =
        noise_std_ == 0.0 ? 0.0 : noise_std_ * keyed_gaussian(seed_, counter_, 0);
    ++counter_;
    return target(x) + noise;
}

TableOracle::TableOracle(std::map<std::string, double> scores)
    : scores_(std::move(scores)) {
    if (scores_.empty()) throw ValidationError("score table is empty");
}

TableOracle TableOracle::from_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"capability_id", "score"})
        throw ParseError(path + ": expected header 'capability_id,score'");
    std::map<std::string, double> scores;
    for (const auto& row : table.rows) {
        double score;
        try {
            score = std::stod(row[1]);
        } catch (const std::exception&) {
            throw ParseError(path + ": non-numeric score '" + row[1] + "' for '" +
                             row[0] + "'");
        }
        if (!scores.emplace(row[0], score).second)
            throw ParseError(path + ": duplicate id '" + row[0] + "'");
    }
    return TableOracle(std::move(scores));
}

double TableOracle::evaluate(const std::string& id, const Eigen::VectorXd&) {
    auto it = scores_.find(id);
    if (it != scores_.end()) return it->second;

    std::vector<std::pair<size_t, std::string>> ranked;
    for (const auto& [known, _] : scores_) ranked.emplace_back(edit_distance(id, known), known);
    std::sort(ranked.begin(), ranked.end());
    std::string nearest;
    for (size_t i = 0; i < std::min<size_t>(3, ranked.size()); ++i)
        nearest += (nearest.empty() ? "" : ", ") + ranked[i].second;
    throw LookupError("no score for '" + id + "'; nearest ids: " + nearest);
}

namespace {

bool judge_equal(const std::string& submission, const std::string& target,
                 ChatTransport& judge) {
    std::string system =
        "You are an expert judge. Decide whether a submitted answer is equivalent to a "
        "reference answer. Respond with a single line containing \"yes\" if they are "
        "equivalent, otherwise \"no\".";
    std::string user =
        "Submission: " + submission + "\nReference answer: " + target + "\nAre they equivalent?";
    std::string raw = judge.complete("judge", system, user);
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = to_lower(trim(line));
        if (t == "yes") return true;
        if (t == "no") return false;
    }
    throw ParseError("judge returned neither yes nor no: " + raw.substr(0, 200));
}

}  // namespace

double llm_eval(const CapabilityRecord& capability, const std::vector<TaskRecord>& tasks,
                ChatTransport& subject, ScoringMode mode, ChatTransport* judge,
                std::vector<std::string>* diagnostics) {
    if (tasks.empty())
        throw ValidationError("no tasks for capability '" + capability.id + "'");
    if (mode == ScoringMode::Judge && judge == nullptr)
        throw ConfigError("judge transport required for judge scoring");

    double total = 0.0;
    for (const auto& task : tasks) {
        if (!task.verified)
            throw ValidationError("task '" + task.id + "' is unverified");
        std::string raw;
        TaskRecord solved = solve_task(task, capability, subject, &raw);
        const std::string& submission = solved.solution;

        bool correct = mode == ScoringMode::Judge
                           ? judge_equal(submission, task.solution, *judge)
                           : normalize_answer(submission) == normalize_answer(task.solution);
        if (!correct && diagnostics) {
            std::string note = raw.find("ANSWER:") == std::string::npos
                                   ? "task '" + task.id + "': no ANSWER found"
                                   : "task '" + task.id + "': incorrect";
            diagnostics->push_back(note);
        }
        total += correct ? 1.0 : 0.0;
    }
    return total / static_cast<double>(tasks.size());
}

LlmOracle::LlmOracle(std::vector<CapabilityRecord> capabilities,
                     std::vector<TaskRecord> tasks, std::shared_ptr<ChatTransport> subject,
                     ScoringMode mode, std::shared_ptr<ChatTransport> judge)
    : subject_(std::move(subject)), judge_(std::move(judge)), mode_(mode) {
    for (auto& c : capabilities) capabilities_.emplace(c.id, std::move(c));
    for (auto& t : tasks) tasks_[t.capability_id].push_back(std::move(t));
}

double LlmOracle::evaluate(const std::string& id, const Eigen::VectorXd&) {
    auto cap = capabilities_.find(id);
    if (cap == capabilities_.end()) throw LookupError("unknown capability '" + id + "'");
    auto tasks = tasks_.find(id);
    if (tasks == tasks_.end())
        throw ValidationError("no tasks for capability '" + id + "'");
    return llm_eval(cap->second, tasks->second, *subject_, mode_, judge_.get());
}

}  // namespace ace

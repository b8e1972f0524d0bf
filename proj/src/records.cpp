#include "ace/records.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "ace/errors.hpp"
#include "ace/strings.hpp"

namespace ace {

using nlohmann::json;

void CapabilityRecord::validate() const {
    if (id.empty()) throw ValidationError("capability id empty");
    if (name.empty()) throw ValidationError("capability '" + id + "': name empty");
    if (area.empty()) throw ValidationError("capability '" + id + "': area empty");
    if (description.empty())
        throw ValidationError("capability '" + id + "': description empty");
    if (score && (*score < 0.0 || *score > 1.0))
        throw ValidationError("capability '" + id + "': score " +
                              format_double(*score) + " outside [0,1]");
}

std::string slug_from_name(const std::string& name) {
    return to_lower(trim(name));
}

void validate_collection(const std::vector<CapabilityRecord>& records) {
    std::set<std::string> seen;
    Eigen::Index embed_dim = -1;
    for (const auto& r : records) {
        r.validate();
        if (!seen.insert(r.id).second)
            throw ValidationError("duplicate capability id '" + r.id + "'");
        if (r.embedding) {
            if (embed_dim < 0)
                embed_dim = r.embedding->size();
            else if (r.embedding->size() != embed_dim)
                throw DimensionError("capability '" + r.id + "' has embedding dimension " +
                                     std::to_string(r.embedding->size()) +
                                     " but the collection uses " +
                                     std::to_string(embed_dim));
        }
    }
}

namespace {

Eigen::VectorXd vector_from_json(const json& arr, const std::string& what) {
    if (!arr.is_array()) throw ParseError(what + " is not an array");
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::vector<CapabilityRecord> read_capabilities_jsonl(const std::string& path) {
    std::vector<CapabilityRecord> out;
    size_t lineno = 0;
    for (const auto& line : read_lines(path)) {
        ++lineno;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        CapabilityRecord r;
        r.name = j.value("name", "");
        r.id = j.value("id", slug_from_name(r.name));
        r.area = j.value("area", "");
        r.domain = j.value("domain", "");
        r.description = j.value("description", "");
        r.class_source = j.value("class", j.value("class_source", ""));
        if (j.contains("embedding")) r.embedding = vector_from_json(j["embedding"], "embedding");
        if (j.contains("latent")) r.latent = vector_from_json(j["latent"], "latent");
        if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
        out.push_back(std::move(r));
    }
    validate_collection(out);
    return out;
}

void write_capabilities_jsonl(const std::vector<CapabilityRecord>& records,
                              const std::string& path) {
    validate_collection(records);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& r : records) {
        json j;
        j["id"] = r.id;
        j["name"] = r.name;
        j["area"] = r.area;
        j["domain"] = r.domain;
        j["description"] = r.description;
        if (!r.class_source.empty()) j["class"] = r.class_source;
        if (r.embedding) j["embedding"] = vector_to_json(*r.embedding);
        if (r.latent) j["latent"] = vector_to_json(*r.latent);
        if (r.score) j["score"] = *r.score;
        out << j.dump() << "\n";
    }
}

std::vector<TaskRecord> read_tasks_jsonl(const std::string& path) {
    std::vector<TaskRecord> out;
    size_t lineno = 0;
    for (const auto& line : read_lines(path)) {
        ++lineno;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        TaskRecord t;
        t.id = j.value("id", "");
        t.capability_id = j.value("capability_id", "");
        t.problem = j.value("problem", "");
        t.solution = j.value("solution", "");
        t.verified = j.value("verified", false);
        if (t.problem.empty())
            throw ValidationError(path + ":" + std::to_string(lineno) + ": problem empty");
        out.push_back(std::move(t));
    }
    return out;
}

void write_tasks_jsonl(const std::vector<TaskRecord>& tasks, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& t : tasks) {
        json j;
        j["id"] = t.id;
        j["capability_id"] = t.capability_id;
        j["problem"] = t.problem;
        j["solution"] = t.solution;
        j["verified"] = t.verified;
        out << j.dump() << "\n";
    }
}

}  // namespace ace

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace ace {

/// A generated capability: textual identity plus optional embedding, latent
/// coordinates and score filled in by later pipeline stages. class_source is
/// the capability's code payload, stored verbatim and never executed.
struct CapabilityRecord {
    std::string id;
    std::string name;
    std::string area;
    std::string domain;
    std::string description;
    std::string class_source;
    std::optional<Eigen::VectorXd> embedding;
    std::optional<Eigen::VectorXd> latent;
    std::optional<double> score;

    void validate() const;
};

struct TaskRecord {
    std::string id;
    std::string capability_id;
    std::string problem;
    std::string solution;
    bool verified = false;
};

/// Slug used as the record id: lowercased name with spaces preserved as-is
/// apart from trimming (ids in the score table match capability names).
std::string slug_from_name(const std::string& name);

/// Checks per-record invariants plus id uniqueness and a consistent
/// embedding dimension across the collection.
void validate_collection(const std::vector<CapabilityRecord>& records);

std::vector<CapabilityRecord> read_capabilities_jsonl(const std::string& path);
void write_capabilities_jsonl(const std::vector<CapabilityRecord>& records,
                              const std::string& path);

std::vector<TaskRecord> read_tasks_jsonl(const std::string& path);
void write_tasks_jsonl(const std::vector<TaskRecord>& tasks, const std::string& path);

}  // namespace ace

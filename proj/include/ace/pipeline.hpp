#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ace/chat.hpp"
#include "ace/records.hpp"

namespace ace {

enum class Judgement { Yes, No };

struct VerificationVerdict {
    std::string thought;
    Judgement judgement = Judgement::No;
    std::string raw;
};

struct ConfusionCounts {
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;
};

/// Denominator-zero metrics are reported as absent, never as 0.
struct VerificationMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    double accuracy = 0.0;
};

/// Extracts the first JSON object after the "RESPONSE JSON:" marker,
/// tolerating a THOUGHT section, prose, and markdown fences around it.
nlohmann::json parse_response_json(const std::string& raw);

/// Text after the last "ANSWER:" on its line, trimmed; "" when absent.
std::string parse_submission(const std::string& submission);

std::vector<std::string> generate_areas(const std::string& domain, int num_areas,
                                        int num_caps_per_area, ChatTransport& transport);

std::vector<CapabilityRecord> generate_capabilities(
    const std::string& area, const std::string& domain,
    const std::vector<std::string>& prior_names, int count,
    const std::string& sample_capability_json, ChatTransport& transport);

/// Problems only; solutions are filled in by solve_task.
std::vector<TaskRecord> generate_tasks(const CapabilityRecord& capability, int count,
                                       ChatTransport& transport,
                                       const std::string& sample_tasks = "none provided");

/// Obtains a candidate solution from the scientist model. When the output
/// carries an "ANSWER:" line the extracted answer is stored, otherwise the
/// full text. `raw_out`, when given, receives the unprocessed reply.
TaskRecord solve_task(const TaskRecord& task, const CapabilityRecord& capability,
                      ChatTransport& transport, std::string* raw_out = nullptr);

VerificationVerdict verify_task(const TaskRecord& task, const CapabilityRecord& capability,
                                ChatTransport& transport);

VerificationMetrics verification_metrics(const ConfusionCounts& counts);

}  // namespace ace

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ace/acquisition.hpp"
#include "ace/gp.hpp"
#include "ace/hyperopt.hpp"
#include "ace/oracle.hpp"

namespace ace {

struct Candidate {
    std::string id;
    Eigen::VectorXd point;
};

struct LoopConfig {
    int seed_count = 2;
    int budget = 0;
    AcquisitionKind acquisition;
    int hyper_refit_every = 1;
    std::optional<double> stop_std_threshold;
    uint64_t rng_seed = 0;
    /// Hyperparameter search; length-scale bounds are rescaled to the data
    /// extent unless scale_length_to_data is off.
    gp::HyperSearchSpec search;
    bool scale_length_to_data = true;
    /// Skips hyperparameter optimization entirely when set.
    std::optional<gp::KernelParams> fixed_params;
    bool standardize = true;

    void validate() const;
};

struct LoopState {
    std::vector<std::string> labeled_ids;
    gp::Dataset labeled;
    std::vector<Candidate> pool;
    gp::GpModel model;
    int iteration = 0;
};

struct TraceRecord {
    int iteration = 0;
    std::string selected_id;
    double acquisition_score = 0.0;
    double observed_score = 0.0;
    double pool_mean_std = 0.0;
    std::optional<double> test_rmse;
    std::optional<double> test_mean_std;
};

struct TestSet {
    Eigen::MatrixXd points;
    Eigen::VectorXd truths;
};

/// Seeds the training set with seed_count uniform draws (without
/// replacement), evaluates them, and fits the initial model.
LoopState initialize(const std::vector<Candidate>& candidates, const LoopConfig& config,
                     Oracle& oracle);

/// One acquisition round: score pool, select, evaluate, refit. Returns the
/// successor state; the input state is untouched.
std::pair<LoopState, TraceRecord> step(const LoopState& state, const LoopConfig& config,
                                       Oracle& oracle);

/// Full loop until budget, pool exhaustion, or the uncertainty threshold.
std::pair<LoopState, std::vector<TraceRecord>> run(
    const std::vector<Candidate>& candidates, const LoopConfig& config, Oracle& oracle,
    const std::optional<TestSet>& test = std::nullopt);

/// Mean posterior std over the remaining pool (0 when the pool is empty).
double pool_mean_std(const LoopState& state);

void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path);

}  // namespace ace

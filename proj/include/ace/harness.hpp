#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ace/active_loop.hpp"

namespace ace {

enum class Scenario { Toy, CapabilityTable };

struct ToyConfig {
    int num_candidates = 32;
    int test_points = 1000;
    double noise_std = 0.1;
};

struct CapabilityConfig {
    std::string scores_path;
    std::string latent_path;
    double split_fraction = 0.5;
    uint64_t split_seed = 0;
    int budget = 0;  // 0 = run until the training pool is exhausted
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Toy;
    int repetitions = 200;
    std::vector<AcquisitionKind> acquisitions;
    ToyConfig toy;
    CapabilityConfig capability;
    uint64_t base_rng_seed = 0;
    std::string output_dir;
    int jobs = 1;

    void validate() const;
};

/// Per-iteration aggregates with normal-approximation 95% CIs over
/// repetitions. Posterior std is measured on the held-out test points.
struct MetricSeries {
    AcquisitionKind acquisition;
    std::vector<double> mean_rmse, rmse_ci_low, rmse_ci_high;
    std::vector<double> mean_post_std, std_ci_low, std_ci_high;
};

double rmse(const std::vector<double>& predictions, const std::vector<double>& truths);

double mean_posterior_std(const gp::GpModel& model, const Eigen::MatrixXd& test);

struct Ci {
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
};

/// mean +/- 1.96 * sd / sqrt(n) with the n-1 sample standard deviation.
Ci ci95(const std::vector<double>& samples);

/// Noisy-sine toy benchmark: per repetition, fresh uniform candidates with
/// labels keyed by candidate index so every acquisition strategy sees the
/// same data, scored against the noiseless target on equidistant points.
std::map<std::string, MetricSeries> run_toy_experiment(const ExperimentConfig& config);

/// Score-table benchmark: per repetition, a seeded split into a training
/// pool and a held-out test half joined from the scores and latent CSVs.
std::map<std::string, MetricSeries> run_capability_experiment(
    const ExperimentConfig& config);

/// One CSV per acquisition plus one SVG per metric, under output_dir.
std::vector<std::string> emit_report(const std::map<std::string, MetricSeries>& series,
                                     const std::string& scenario_name,
                                     const std::string& output_dir);

/// JSON file mirroring ExperimentConfig field names.
ExperimentConfig parse_experiment_config(const std::string& json_text);

std::string scenario_name(Scenario scenario);

}  // namespace ace

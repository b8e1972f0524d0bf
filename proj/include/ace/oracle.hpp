#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ace/chat.hpp"
#include "ace/records.hpp"

namespace ace {

/// Evaluation backend: maps a candidate (id + latent point) to a score.
class Oracle {
  public:
    virtual ~Oracle() = default;
    virtual double evaluate(const std::string& id, const Eigen::VectorXd& latent) = 0;
};

/// Closed-form toy target sin(20*pi*x) * exp(-5x) on [0,1] plus Gaussian
/// noise from a per-call stream keyed by (rng_seed, call counter).
class SyntheticOracle : public Oracle {
  public:
    explicit SyntheticOracle(double noise_std = 0.1, uint64_t rng_seed = 0);
    double evaluate(const std::string& id, const Eigen::VectorXd& latent) override;
    static double target(double x);

  private:
    double noise_std_;
    uint64_t seed_;
    uint64_t counter_ = 0;
};

/// Pure lookup into a fixed id->score map (e.g. the shipped benchmark table).
class TableOracle : public Oracle {
  public:
    explicit TableOracle(std::map<std::string, double> scores);
    static TableOracle from_csv(const std::string& path);
    double evaluate(const std::string& id, const Eigen::VectorXd& latent) override;
    const std::map<std::string, double>& scores() const { return scores_; }

  private:
    std::map<std::string, double> scores_;
};

enum class ScoringMode { ExactMatch, Judge };

/// Mean of per-task binary scores: each verified task is solved by the
/// subject model and compared to the reference solution.
double llm_eval(const CapabilityRecord& capability, const std::vector<TaskRecord>& tasks,
                ChatTransport& subject, ScoringMode mode,
                ChatTransport* judge = nullptr,
                std::vector<std::string>* diagnostics = nullptr);

class LlmOracle : public Oracle {
  public:
    LlmOracle(std::vector<CapabilityRecord> capabilities, std::vector<TaskRecord> tasks,
              std::shared_ptr<ChatTransport> subject, ScoringMode mode,
              std::shared_ptr<ChatTransport> judge = nullptr);
    double evaluate(const std::string& id, const Eigen::VectorXd& latent) override;

  private:
    std::map<std::string, CapabilityRecord> capabilities_;
    std::map<std::string, std::vector<TaskRecord>> tasks_;
    std::shared_ptr<ChatTransport> subject_;
    std::shared_ptr<ChatTransport> judge_;
    ScoringMode mode_;
};

}  // namespace ace

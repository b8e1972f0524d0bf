#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ace/gp.hpp"

namespace ace {

/// Selection strategy tag used by the active-learning loop and the harness.
enum class AcquisitionName { Alm, Alc, Ucb };

struct AcquisitionKind {
    AcquisitionName kind = AcquisitionName::Alm;
    double ucb_beta = 2.0;

    void validate() const;
    std::string name() const;
    /// Accepts "alm", "alc" or "ucb" (case-insensitive).
    static AcquisitionKind parse(const std::string& text);
};

/// Scores aligned with candidate ids. `warnings` collects per-candidate
/// notes (e.g. degenerate rank-1 denominators zeroed out by alc_scores).
struct PoolScores {
    std::vector<std::string> candidate_ids;
    Eigen::VectorXd scores;
    std::vector<std::string> warnings;
};

/// Posterior variance at each pool point. Higher is better.
PoolScores alm_scores(const gp::GpModel& model, const Eigen::MatrixXd& pool,
                      std::vector<std::string> ids = {});

/// Average variance reduction over the whole pool (candidate included) if the
/// candidate were added to the training set. Exact, label-independent.
/// Singleton pools fall back to alm_scores.
PoolScores alc_scores(const gp::GpModel& model, const Eigen::MatrixXd& pool,
                      std::vector<std::string> ids = {});

/// mean + beta * posterior std.
PoolScores ucb_scores(const gp::GpModel& model, const Eigen::MatrixXd& pool, double beta,
                      std::vector<std::string> ids = {});

/// Dispatch on kind.
PoolScores score_pool(const gp::GpModel& model, const Eigen::MatrixXd& pool,
                      const AcquisitionKind& kind, std::vector<std::string> ids = {});

/// Position of the winner; ties go to the lowest index.
int select_index(const PoolScores& scores);

/// Winning candidate id.
std::string select_candidate(const PoolScores& scores);

}  // namespace ace

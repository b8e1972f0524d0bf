#include "ace/acquisition.hpp"

#include <cmath>
#include <utility>

#include "ace/errors.hpp"
#include "ace/kernel.hpp"
#include "ace/strings.hpp"

namespace ace {

namespace {

std::vector<std::string> resolve_ids(std::vector<std::string> ids, Eigen::Index count) {
    if (ids.empty()) {
        ids.reserve(static_cast<size_t>(count));
        for (Eigen::Index i = 0; i < count; ++i) ids.push_back(std::to_string(i));
        return ids;
    }
    if (static_cast<Eigen::Index>(ids.size()) != count)
        throw DimensionError("pool has " + std::to_string(count) + " points but " +
                             std::to_string(ids.size()) + " ids");
    return ids;
}

void check_pool(const gp::GpModel& model, const Eigen::MatrixXd& pool) {
    if (pool.rows() == 0) throw ValidationError("candidate pool is empty");
    if (pool.cols() != model.dim())
        throw DimensionError("pool points have dimension " + std::to_string(pool.cols()) +
                             " but the model expects " + std::to_string(model.dim()));
}

}  // namespace

void AcquisitionKind::validate() const {
    if (kind == AcquisitionName::Ucb && !(ucb_beta > 0.0))
        throw ValidationError("ucb_beta must be > 0");
}

std::string AcquisitionKind::name() const {
    switch (kind) {
        case AcquisitionName::Alm: return "alm";
        case AcquisitionName::Alc: return "alc";
        case AcquisitionName::Ucb: return "ucb";
    }
    return "alm";
}

AcquisitionKind AcquisitionKind::parse(const std::string& text) {
    std::string t = to_lower(trim(text));
    AcquisitionKind out;
    if (t == "alm")
        out.kind = AcquisitionName::Alm;
    else if (t == "alc")
        out.kind = AcquisitionName::Alc;
    else if (t == "ucb")
        out.kind = AcquisitionName::Ucb;
    else
        throw ConfigError("unknown acquisition '" + text + "' (valid: alm, alc, ucb)");
    return out;
}

PoolScores alm_scores(const gp::GpModel& model, const Eigen::MatrixXd& pool,
                      std::vector<std::string> ids) {
    check_pool(model, pool);
    PoolScores out;
    out.candidate_ids = resolve_ids(std::move(ids), pool.rows());
    out.scores.resize(pool.rows());
    auto preds = model.predict(pool);
    for (size_t i = 0; i < preds.size(); ++i)
        out.scores[static_cast<Eigen::Index>(i)] = preds[i].variance;
    return out;
}

PoolScores alc_scores(const gp::GpModel& model, const Eigen::MatrixXd& pool,
                      std::vector<std::string> ids) {
    check_pool(model, pool);
    if (pool.rows() == 1) return alm_scores(model, pool, std::move(ids));

    PoolScores out;
    out.candidate_ids = resolve_ids(std::move(ids), pool.rows());

    const auto& params = model.params();
    const double s2 = model.transform().scale * model.transform().scale;
    const Eigen::Index p = pool.rows();

    // Posterior covariance among pool points, standardized space:
    // C = K_pool,pool - V^T V with V = L^{-1} K_train,pool.
    Eigen::MatrixXd c =
        kernel_matrix_from_sqdist(gp::squared_distances(pool, pool), params);
    if (model.train().size() > 0) {
        Eigen::MatrixXd cross = kernel_matrix_from_sqdist(
            gp::squared_distances(model.train().inputs, pool), params);
        Eigen::MatrixXd v =
            model.chol_factor().triangularView<Eigen::Lower>().solve(cross);
        c.noalias() -= v.transpose() * v;
    }

    out.scores = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        double denom = std::max(0.0, c(i, i)) + params.noise_variance;
        if (denom * s2 < 1e-12) {
            out.scores[i] = 0.0;
            out.warnings.push_back("candidate " + out.candidate_ids[static_cast<size_t>(i)] +
                                   ": degenerate rank-1 denominator, score set to 0");
            continue;
        }
        double total = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double cov = c(i, j);
            total += cov * cov / denom;
        }
        out.scores[i] = s2 * total / static_cast<double>(p);
    }
    return out;
}

PoolScores ucb_scores(const gp::GpModel& model, const Eigen::MatrixXd& pool, double beta,
                      std::vector<std::string> ids) {
    check_pool(model, pool);
    if (!(beta > 0.0)) throw ValidationError("ucb_beta must be > 0");
    PoolScores out;
    out.candidate_ids = resolve_ids(std::move(ids), pool.rows());
    out.scores.resize(pool.rows());
    auto preds = model.predict(pool);
    for (size_t i = 0; i < preds.size(); ++i)
        out.scores[static_cast<Eigen::Index>(i)] =
            preds[i].mean + beta * std::sqrt(preds[i].variance);
    return out;
}

PoolScores score_pool(const gp::GpModel& model, const Eigen::MatrixXd& pool,
                      const AcquisitionKind& kind, std::vector<std::string> ids) {
    kind.validate();
    switch (kind.kind) {
        case AcquisitionName::Alm: return alm_scores(model, pool, std::move(ids));
        case AcquisitionName::Alc: return alc_scores(model, pool, std::move(ids));
        case AcquisitionName::Ucb:
            return ucb_scores(model, pool, kind.ucb_beta, std::move(ids));
    }
    throw ConfigError("unknown acquisition kind");
}

int select_index(const PoolScores& scores) {
    if (scores.scores.size() == 0) throw ValidationError("cannot select from empty scores");
    if (static_cast<Eigen::Index>(scores.candidate_ids.size()) != scores.scores.size())
        throw ValidationError("scores and candidate_ids length mismatch");
    int best = 0;
    for (Eigen::Index i = 1; i < scores.scores.size(); ++i)
        if (scores.scores[i] > scores.scores[best]) best = static_cast<int>(i);
    return best;
}

std::string select_candidate(const PoolScores& scores) {
    return scores.candidate_ids[static_cast<size_t>(select_index(scores))];
}

}  // namespace ace

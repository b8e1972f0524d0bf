#include "ace/gp.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ace/errors.hpp"

namespace ace::gp {

namespace {
constexpr int kMaxJitterEscalations = 8;
constexpr double kScaleFloorCutoff = 1e-12;
}  // namespace

void KernelParams::validate() const {
    if (!(signal_variance > 0.0))
        throw Error("signal_variance must be > 0, got " + std::to_string(signal_variance));
    if (!(length_scale > 0.0))
        throw Error("length_scale must be > 0, got " + std::to_string(length_scale));
    if (!(noise_variance >= 0.0))
        throw Error("noise_variance must be >= 0, got " + std::to_string(noise_variance));
    if (!(jitter > 0.0))
        throw Error("jitter must be > 0, got " + std::to_string(jitter));
}

void Dataset::validate() const {
    if (inputs.rows() == 0) throw Error("dataset is empty");
    if (inputs.rows() != targets.size())
        throw Error("dataset has " + std::to_string(inputs.rows()) + " inputs but " +
                    std::to_string(targets.size()) + " targets");
}

Dataset Dataset::appended(const Eigen::VectorXd& point, double target) const {
    if (point.size() != inputs.cols())
        throw DimensionError("appended point has dimension " + std::to_string(point.size()) +
                             ", dataset has " + std::to_string(inputs.cols()));
    Dataset out;
    out.inputs.resize(inputs.rows() + 1, inputs.cols());
    out.inputs.topRows(inputs.rows()) = inputs;
    out.inputs.row(inputs.rows()) = point.transpose();
    out.targets.resize(targets.size() + 1);
    out.targets.head(targets.size()) = targets;
    out.targets(targets.size()) = target;
    return out;
}

TargetTransform TargetTransform::standardizing(const Eigen::VectorXd& targets) {
    TargetTransform t;
    const auto n = static_cast<double>(targets.size());
    t.mean = targets.mean();
    double var = (targets.array() - t.mean).square().sum() / n;
    double sd = std::sqrt(var);
    t.scale = sd < kScaleFloorCutoff ? 1.0 : sd;
    return t;
}

double kernel_eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const KernelParams& params) {
    if (a.size() != b.size())
        throw DimensionError("kernel inputs have dimensions " + std::to_string(a.size()) +
                             " and " + std::to_string(b.size()));
    params.validate();
    return kernel_from_sqdist((a - b).squaredNorm(), params);
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols())
        throw DimensionError("point sets have dimensions " + std::to_string(a.cols()) +
                             " and " + std::to_string(b.cols()));
    Eigen::VectorXd an = a.rowwise().squaredNorm();
    Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * a * b.transpose();
    d.colwise() += an;
    d.rowwise() += bn.transpose();
    return d.cwiseMax(0.0);
}

std::pair<Eigen::MatrixXd, double> factorize_kernel_matrix(
    const Eigen::MatrixXd& inputs, const KernelParams& params) {
    const Eigen::Index n = inputs.rows();
    Eigen::MatrixXd sq = squared_distances(inputs, inputs);
    Eigen::MatrixXd base(n, n);
    const double inv2l2 = 1.0 / (2.0 * params.length_scale * params.length_scale);
    base = params.signal_variance * (-sq * inv2l2).array().exp();

    double jitter = 0.0;
    for (int attempt = 0; attempt <= kMaxJitterEscalations; ++attempt) {
        Eigen::MatrixXd k = base;
        k.diagonal().array() += params.noise_variance + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() == Eigen::Success)
            return {Eigen::MatrixXd(llt.matrixL()), jitter};
        jitter = jitter == 0.0 ? params.jitter : jitter * 2.0;
    }
    std::ostringstream msg;
    msg << "kernel matrix not positive definite after " << kMaxJitterEscalations
        << " jitter escalations (final jitter tried " << jitter / 2.0 << ")";
    throw FactorizationError(msg.str());
}

GpModel GpModel::fit(const Dataset& train, const KernelParams& params,
                     const FitOptions& options) {
    train.validate();
    params.validate();

    GpModel m;
    m.train_ = train;
    m.params_ = params;
    m.transform_ = options.standardize ? TargetTransform::standardizing(train.targets)
                                       : TargetTransform{};

    auto [chol, jitter] = factorize_kernel_matrix(train.inputs, params);
    m.chol_ = std::move(chol);
    m.applied_jitter_ = jitter;

    Eigen::VectorXd y_std =
        (train.targets.array() - m.transform_.mean) / m.transform_.scale;
    m.alpha_ = m.chol_.triangularView<Eigen::Lower>().solve(y_std);
    m.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha_);
    return m;
}

std::vector<Prediction> GpModel::predict(const Eigen::MatrixXd& query) const {
    if (query.cols() != train_.inputs.cols())
        throw DimensionError("query has dimension " + std::to_string(query.cols()) +
                             ", model has " + std::to_string(train_.inputs.cols()));
    const Eigen::Index m = query.rows();
    std::vector<Prediction> out(static_cast<size_t>(m));
    if (m == 0) return out;

    Eigen::MatrixXd sq = squared_distances(train_.inputs, query);
    const double inv2l2 = 1.0 / (2.0 * params_.length_scale * params_.length_scale);
    Eigen::MatrixXd kstar = params_.signal_variance * (-sq * inv2l2).array().exp();

    Eigen::VectorXd means_std = kstar.transpose() * alpha_;
    Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kstar);
    Eigen::VectorXd var_std =
        (params_.signal_variance - v.colwise().squaredNorm().transpose().array())
            .cwiseMax(0.0);

    const double s = transform_.scale;
    const double s2 = s * s;
    for (Eigen::Index i = 0; i < m; ++i) {
        out[static_cast<size_t>(i)].mean = means_std(i) * s + transform_.mean;
        out[static_cast<size_t>(i)].variance = var_std(i) * s2;
    }
    return out;
}

Prediction GpModel::predict_one(const Eigen::VectorXd& query) const {
    return predict(query.transpose())[0];
}

Eigen::VectorXd GpModel::rank_one_variance_update(const Eigen::VectorXd& new_point,
                                                  const Eigen::MatrixXd& query) const {
    if (new_point.size() != train_.inputs.cols())
        throw DimensionError("new point has dimension " + std::to_string(new_point.size()) +
                             ", model has " + std::to_string(train_.inputs.cols()));
    if (query.rows() == 0) return Eigen::VectorXd(0);
    if (query.cols() != train_.inputs.cols())
        throw DimensionError("query has dimension " + std::to_string(query.cols()) +
                             ", model has " + std::to_string(train_.inputs.cols()));

    const double inv2l2 = 1.0 / (2.0 * params_.length_scale * params_.length_scale);

    // All in standardized space; the output is scaled back at the end.
    Eigen::VectorXd k_new(train_.size());
    for (int i = 0; i < train_.size(); ++i)
        k_new(i) = kernel_from_sqdist(
            (train_.inputs.row(i).transpose() - new_point).squaredNorm(), params_);
    Eigen::VectorXd v_new = chol_.triangularView<Eigen::Lower>().solve(k_new);
    double var_new = std::max(0.0, params_.signal_variance - v_new.squaredNorm());

    const double s2 = transform_.scale * transform_.scale;
    double denom = var_new + params_.noise_variance;
    if (denom * s2 < 1e-12)
        throw Error("degenerate rank-1 denominator " + std::to_string(denom * s2) +
                    " (posterior variance + noise below 1e-12)");

    Eigen::MatrixXd sq = squared_distances(train_.inputs, query);
    Eigen::MatrixXd kq = params_.signal_variance * (-sq * inv2l2).array().exp();
    Eigen::MatrixXd vq = chol_.triangularView<Eigen::Lower>().solve(kq);

    Eigen::VectorXd out(query.rows());
    for (Eigen::Index j = 0; j < query.rows(); ++j) {
        double var_q =
            std::max(0.0, params_.signal_variance - vq.col(j).squaredNorm());
        double k_qn = kernel_from_sqdist(
            (query.row(j).transpose() - new_point).squaredNorm(), params_);
        double cov = k_qn - vq.col(j).dot(v_new);
        out(j) = std::max(0.0, var_q - cov * cov / denom) * s2;
    }
    return out;
}

double log_marginal_likelihood(const Dataset& train, const KernelParams& params) {
    train.validate();
    params.validate();
    auto [chol, jitter] = factorize_kernel_matrix(train.inputs, params);
    (void)jitter;
    Eigen::VectorXd alpha = chol.triangularView<Eigen::Lower>().solve(train.targets);
    double quad = alpha.squaredNorm();
    double logdet = 2.0 * chol.diagonal().array().log().sum();
    const double n = static_cast<double>(train.size());
    return -0.5 * quad - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace ace::gp

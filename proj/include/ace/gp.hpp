#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ace/kernel.hpp"

namespace ace::gp {

// Training data: one input point per row, one target per row.
struct Dataset {
    Eigen::MatrixXd inputs;   // n x d
    Eigen::VectorXd targets;  // n

    int size() const { return static_cast<int>(inputs.rows()); }
    int dim() const { return static_cast<int>(inputs.cols()); }
    void validate() const;

    Dataset appended(const Eigen::VectorXd& point, double target) const;
};

// Affine map applied to targets before fitting: y_std = (y - mean) / scale.
// Scale falls back to 1.0 when targets are (nearly) constant.
struct TargetTransform {
    double mean = 0.0;
    double scale = 1.0;

    static TargetTransform standardizing(const Eigen::VectorXd& targets);
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

struct FitOptions {
    // When true, kernel hyperparameters are interpreted in the standardized
    // target space and outputs are mapped back through the transform.
    bool standardize = true;
};

// Exact GP posterior with a cached Cholesky factorization. Immutable after
// fit; prediction is const and safe to call from multiple threads.
class GpModel {
  public:
    GpModel() = default;  // unfit; any prediction fails the dimension checks

    static GpModel fit(const Dataset& train, const KernelParams& params,
                       const FitOptions& options = {});

    std::vector<Prediction> predict(const Eigen::MatrixXd& query) const;
    Prediction predict_one(const Eigen::VectorXd& query) const;

    // Posterior variance at each query point of the hypothetical model with
    // new_point added to the training set, via a rank-1 covariance update.
    // Label-free: the result does not depend on the unobserved target.
    Eigen::VectorXd rank_one_variance_update(const Eigen::VectorXd& new_point,
                                             const Eigen::MatrixXd& query) const;

    const Dataset& train() const { return train_; }
    const KernelParams& params() const { return params_; }
    const TargetTransform& transform() const { return transform_; }
    const Eigen::MatrixXd& chol_factor() const { return chol_; }
    double applied_jitter() const { return applied_jitter_; }
    int dim() const { return train_.dim(); }

  private:
    Dataset train_;
    KernelParams params_;
    TargetTransform transform_;
    Eigen::MatrixXd chol_;    // lower factor of K + (noise + jitter) I
    Eigen::VectorXd alpha_;   // chol^-T chol^-1 y_std
    double applied_jitter_ = 0.0;
};

// Exact log marginal likelihood of the raw targets under params. No target
// transform is applied here.
double log_marginal_likelihood(const Dataset& train, const KernelParams& params);

// Cholesky of K + (noise + jitter) I with jitter doubling on failure.
// Returns the lower factor and the jitter that succeeded.
std::pair<Eigen::MatrixXd, double> factorize_kernel_matrix(
    const Eigen::MatrixXd& inputs, const KernelParams& params);

}  // namespace ace::gp

#pragma once

#include <Eigen/Dense>

namespace ace::gp {

// Squared-exponential kernel hyperparameters plus the diagonal jitter that
// keeps the kernel matrix factorizable.
struct KernelParams {
    double signal_variance = 1.0;  // sigma_f^2
    double length_scale = 1.0;     // l
    double noise_variance = 0.0;   // sigma_n^2
    double jitter = 1e-8;

    void validate() const;
};

// k(a, b) = sigma_f^2 * exp(-||a - b||^2 / (2 l^2))
double kernel_eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const KernelParams& params);

// Kernel value from a precomputed squared distance; the hot path for matrix
// assembly.
inline double kernel_from_sqdist(double sqdist, const KernelParams& p) {
    return p.signal_variance * std::exp(-sqdist / (2.0 * p.length_scale * p.length_scale));
}

// Elementwise kernel matrix from a precomputed squared-distance matrix.
inline Eigen::MatrixXd kernel_matrix_from_sqdist(const Eigen::MatrixXd& sqdist,
                                                 const KernelParams& p) {
    const double inv2l2 = 1.0 / (2.0 * p.length_scale * p.length_scale);
    return p.signal_variance * (-sqdist * inv2l2).array().exp();
}

// Pairwise squared Euclidean distances between rows of a and rows of b.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace ace::gp

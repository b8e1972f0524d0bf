#include <cmath>

#include "ace/errors.hpp"
#include "ace/kernel.hpp"
#include "ace/projection.hpp"
#include "ace/rng.hpp"

namespace ace {

namespace {

// Per-point bandwidth search: find beta_i = 1/(2 sigma_i^2) whose conditional
// distribution entropy matches log(perplexity).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& sqdist, double perplexity) {
    const Eigen::Index n = sqdist.rows();
    const double target_entropy = std::log(perplexity);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);

    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = 0.0;
        double beta_hi = std::numeric_limits<double>::infinity();
        Eigen::VectorXd row(n);

        for (int it = 0; it < 50; ++it) {
            double sum = 0.0;
            double weighted = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) {
                    row[j] = 0.0;
                    continue;
                }
                row[j] = std::exp(-beta * sqdist(i, j));
                sum += row[j];
                weighted += beta * sqdist(i, j) * row[j];
            }
            if (sum <= 0.0) sum = 1e-300;
            double entropy = std::log(sum) + weighted / sum;
            double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta_lo + beta_hi);
            } else {
                beta_hi = beta;
                beta = beta_lo <= 0.0 ? beta / 2.0 : 0.5 * (beta_lo + beta_hi);
            }
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) sum += row[j];
        if (sum <= 0.0) sum = 1e-300;
        p.row(i) = row.transpose() / sum;
    }
    return p;
}

}  // namespace

Eigen::MatrixXd tsne_coordinates(const Eigen::MatrixXd& embeddings, const TsneOptions& opts) {
    const Eigen::Index n = embeddings.rows();
    if (opts.output_dim != 2 && opts.output_dim != 3)
        throw ValidationError("t-SNE output_dim must be 2 or 3");
    if (opts.output_dim >= embeddings.cols())
        throw ValidationError("output_dim must be below the input dimension " +
                              std::to_string(embeddings.cols()));
    if (!(opts.perplexity > 0.0)) throw ValidationError("perplexity must be positive");
    if (static_cast<double>(n) <= 3.0 * opts.perplexity)
        throw ValidationError("perplexity " + std::to_string(opts.perplexity) +
                              " infeasible for n=" + std::to_string(n) +
                              " (need n > 3*perplexity)");
    if (opts.iterations < 1) throw ValidationError("iterations must be >= 1");

    Eigen::MatrixXd sqdist = gp::squared_distances(embeddings, embeddings);
    Eigen::MatrixXd cond = conditional_affinities(sqdist, opts.perplexity);
    Eigen::MatrixXd p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);

    Rng rng = Rng::keyed(opts.seed, 0x74736e65u, 0);
    Eigen::MatrixXd y(n, opts.output_dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < opts.output_dim; ++k)
            y(i, k) = 1e-4 * rng.next_gaussian();

    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, opts.output_dim);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, opts.output_dim);
    Eigen::MatrixXd grad(n, opts.output_dim);

    for (int iter = 0; iter < opts.iterations; ++iter) {
        const double exaggeration =
            iter < opts.exaggeration_iters ? opts.early_exaggeration : 1.0;
        const double momentum =
            iter < opts.momentum_switch_iter ? opts.momentum_initial : opts.momentum_final;

        // Student-t kernel weights w_ij = 1/(1+||y_i-y_j||^2), Z = sum w.
        Eigen::MatrixXd w(n, n);
        double z = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            w(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                double d2 = (y.row(i) - y.row(j)).squaredNorm();
                double v = 1.0 / (1.0 + d2);
                w(i, j) = v;
                w(j, i) = v;
                z += 2.0 * v;
            }
        }
        if (z < 1e-300) z = 1e-300;

        grad.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                double q = w(i, j) / z;
                double coeff = 4.0 * (exaggeration * p(i, j) - q) * w(i, j);
                grad.row(i) += coeff * (y.row(i) - y.row(j));
            }
        }

        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < opts.output_dim; ++k) {
                bool same_sign = (grad(i, k) > 0.0) == (velocity(i, k) > 0.0);
                gains(i, k) = same_sign ? std::max(0.01, gains(i, k) * 0.8)
                                        : gains(i, k) + 0.2;
                velocity(i, k) = momentum * velocity(i, k) -
                                 opts.learning_rate * gains(i, k) * grad(i, k);
            }
        }
        y += velocity;
        y.rowwise() -= y.colwise().mean();
    }
    return y;
}

}  // namespace ace

#include "ace/hyperopt.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ace/errors.hpp"

namespace ace::gp {

void GridRange::validate(const char* name) const {
    if (steps < 1) throw Error(std::string(name) + ": grid must have at least one point");
    if (!(low > 0.0)) throw Error(std::string(name) + ": bound must be positive");
    if (steps > 1 && !(low < high))
        throw Error(std::string(name) + ": bounds must satisfy low < high");
}

double GridRange::at(int i) const {
    if (steps == 1) return low;
    double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    return std::exp(std::log(low) + t * (std::log(high) - std::log(low)));
}

HyperSearchSpec HyperSearchSpec::for_inputs(const Eigen::MatrixXd& inputs) {
    HyperSearchSpec s;
    double max_sq = 0.0;
    Eigen::MatrixXd d = squared_distances(inputs, inputs);
    if (d.size() > 0) max_sq = d.maxCoeff();
    double extent = std::sqrt(max_sq);
    if (extent <= 0.0) extent = 1.0;
    s.length_scale = {0.05 * extent, 2.0 * extent, 8};
    return s;
}

namespace {

// Fast LML with the squared-distance matrix hoisted out of the grid loop.
class LmlEvaluator {
  public:
    LmlEvaluator(const Dataset& train, double jitter)
        : sq_(squared_distances(train.inputs, train.inputs)),
          jitter_(jitter),
          n_(train.size()) {
        TargetTransform t = TargetTransform::standardizing(train.targets);
        y_ = (train.targets.array() - t.mean) / t.scale;
    }

    double operator()(double sig_var, double len, double noise) const {
        Eigen::MatrixXd k =
            sig_var * (-sq_ * (1.0 / (2.0 * len * len))).array().exp();
        double jitter = jitter_;
        Eigen::LLT<Eigen::MatrixXd> llt;
        for (int attempt = 0; attempt <= 8; ++attempt) {
            Eigen::MatrixXd kj = k;
            kj.diagonal().array() += noise + jitter;
            llt.compute(kj);
            if (llt.info() == Eigen::Success) break;
            jitter *= 2.0;
            if (attempt == 8) return -std::numeric_limits<double>::infinity();
        }
        Eigen::MatrixXd l = llt.matrixL();
        Eigen::VectorXd a = l.triangularView<Eigen::Lower>().solve(y_);
        double quad = a.squaredNorm();
        double logdet = 2.0 * l.diagonal().array().log().sum();
        return -0.5 * quad - 0.5 * logdet -
               0.5 * static_cast<double>(n_) * std::log(2.0 * std::numbers::pi);
    }

  private:
    Eigen::MatrixXd sq_;
    Eigen::VectorXd y_;
    double jitter_;
    int n_;
};

}  // namespace

KernelParams optimize_hyperparams(const Dataset& train, const HyperSearchSpec& search) {
    train.validate();
    search.signal_variance.validate("signal_variance");
    search.length_scale.validate("length_scale");
    if (!search.fixed_noise_variance) search.noise_variance.validate("noise_variance");

    LmlEvaluator lml(train, search.jitter);

    const int noise_steps = search.fixed_noise_variance ? 1 : search.noise_variance.steps;
    auto noise_at = [&](int i) {
        return search.fixed_noise_variance ? *search.fixed_noise_variance
                                           : search.noise_variance.at(i);
    };

    double best = -std::numeric_limits<double>::infinity();
    double best_sig = 0.0, best_len = 0.0, best_noise = 0.0;
    int best_sig_i = 0, best_len_i = 0, best_noise_i = 0;

    for (int si = 0; si < search.signal_variance.steps; ++si) {
        double sig = search.signal_variance.at(si);
        for (int li = 0; li < search.length_scale.steps; ++li) {
            double len = search.length_scale.at(li);
            for (int ni = 0; ni < noise_steps; ++ni) {
                double noise = noise_at(ni);
                double v = lml(sig, len, noise);
                if (v > best) {  // strict: earlier grid index wins ties
                    best = v;
                    best_sig = sig;
                    best_len = len;
                    best_noise = noise;
                    best_sig_i = si;
                    best_len_i = li;
                    best_noise_i = ni;
                }
            }
        }
    }
    if (!std::isfinite(best))
        throw FactorizationError("no grid point admitted a factorization");

    // Coordinate-wise golden-section refinement in log space, one grid cell
    // around the incumbent on each side.
    constexpr double kGolden = 0.6180339887498949;
    auto refine = [&](double current, const GridRange& range, int grid_i, int grid_steps,
                      auto eval) {
        if (grid_steps <= 1) return current;
        double lo = std::log(range.at(std::max(0, grid_i - 1)));
        double hi = std::log(range.at(std::min(grid_steps - 1, grid_i + 1)));
        double a = lo, b = hi;
        double x1 = b - kGolden * (b - a);
        double x2 = a + kGolden * (b - a);
        double f1 = eval(std::exp(x1));
        double f2 = eval(std::exp(x2));
        for (int it = 0; it < search.refine_iters; ++it) {
            if (f1 >= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kGolden * (b - a);
                f1 = eval(std::exp(x1));
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kGolden * (b - a);
                f2 = eval(std::exp(x2));
            }
        }
        double cand = f1 >= f2 ? std::exp(x1) : std::exp(x2);
        double cand_v = f1 >= f2 ? f1 : f2;
        if (cand_v > best) {
            best = cand_v;
            return cand;
        }
        return current;
    };

    for (int pass = 0; pass < search.refine_passes; ++pass) {
        best_sig = refine(best_sig, search.signal_variance, best_sig_i,
                          search.signal_variance.steps,
                          [&](double v) { return lml(v, best_len, best_noise); });
        best_len = refine(best_len, search.length_scale, best_len_i,
                          search.length_scale.steps,
                          [&](double v) { return lml(best_sig, v, best_noise); });
        if (!search.fixed_noise_variance)
            best_noise = refine(best_noise, search.noise_variance, best_noise_i,
                                noise_steps,
                                [&](double v) { return lml(best_sig, best_len, v); });
    }

    KernelParams out;
    out.signal_variance = best_sig;
    out.length_scale = best_len;
    out.noise_variance = best_noise;
    out.jitter = search.jitter;
    return out;
}

}  // namespace ace::gp

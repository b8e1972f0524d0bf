#pragma once

#include <optional>

#include "ace/gp.hpp"

namespace ace::gp {

// Log-spaced search range for one hyperparameter. steps == 1 pins the value
// at low.
struct GridRange {
    double low = 0.0;
    double high = 0.0;
    int steps = 0;

    void validate(const char* name) const;
    double at(int i) const;  // i-th log-spaced grid value
};

// Lower bounds deliberately exclude the degenerate interpolation fit (length
// scale below the data spacing with vanishing noise): it ties the smooth
// explanation on marginal likelihood while reporting junk posterior variance.
struct HyperSearchSpec {
    GridRange signal_variance{0.05, 20.0, 5};
    GridRange length_scale{0.05, 2.0, 8};
    GridRange noise_variance{1e-2, 1.0, 4};
    // When set, noise is not searched; the grid collapses to 2-D.
    std::optional<double> fixed_noise_variance;
    double jitter = 1e-8;
    // Coordinate-wise local refinement after the grid pass.
    int refine_passes = 2;
    int refine_iters = 10;

    // Length-scale bounds scaled to the data extent; target-space ranges are
    // already scale-free because fitting standardizes targets.
    static HyperSearchSpec for_inputs(const Eigen::MatrixXd& inputs);
};

// Maximizes the log marginal likelihood of the standardized targets over a
// deterministic log grid, then refines one coordinate at a time. Ties break
// toward the earliest grid index, and the search is single-threaded by
// construction, so results never depend on the machine.
KernelParams optimize_hyperparams(const Dataset& train, const HyperSearchSpec& search);

}  // namespace ace::gp

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ace {

enum class ProjectionMethod { Pca, Tsne };

/// Fitted dimensionality reduction. PCA carries a reusable linear map;
/// t-SNE only caches fitted coordinates (it has no out-of-sample transform).
struct Projection {
    ProjectionMethod method = ProjectionMethod::Pca;
    int input_dim = 0;
    int output_dim = 0;
    Eigen::VectorXd pca_mean;
    Eigen::MatrixXd pca_components;  // output_dim x input_dim, orthonormal rows
    std::vector<std::pair<std::string, Eigen::VectorXd>> tsne_coords;
    uint64_t rng_seed = 0;
};

/// Centers the rows of `embeddings` and keeps the top principal directions.
/// Sign convention: each component's first coefficient above 1e-12 in
/// magnitude is positive.
Projection pca_fit(const Eigen::MatrixXd& embeddings, int output_dim);

Eigen::MatrixXd pca_transform(const Projection& proj, const Eigen::MatrixXd& embeddings);

struct TsneOptions {
    int output_dim = 2;
    double perplexity = 5.0;
    int iterations = 1000;
    uint64_t seed = 0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    int momentum_switch_iter = 250;
};

/// Exact (O(n^2)) t-SNE, fully deterministic for a given seed.
Eigen::MatrixXd tsne_coordinates(const Eigen::MatrixXd& embeddings, const TsneOptions& opts);

/// tsne_coordinates plus per-id caching in the returned Projection.
Projection tsne_fit(const Eigen::MatrixXd& embeddings, const std::vector<std::string>& ids,
                    const TsneOptions& opts);

}  // namespace ace

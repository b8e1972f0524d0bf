#include "ace/projection.hpp"

#include <Eigen/SVD>

#include "ace/errors.hpp"

namespace ace {

Projection pca_fit(const Eigen::MatrixXd& embeddings, int output_dim) {
    const Eigen::Index n = embeddings.rows();
    const Eigen::Index d = embeddings.cols();
    if (n < 2) throw ValidationError("pca needs at least 2 points");
    const Eigen::Index max_dim = std::min(n - 1, d);
    if (output_dim < 1 || output_dim > max_dim)
        throw ValidationError("output_dim " + std::to_string(output_dim) +
                              " outside [1, " + std::to_string(max_dim) + "]");

    Projection proj;
    proj.method = ProjectionMethod::Pca;
    proj.input_dim = static_cast<int>(d);
    proj.output_dim = output_dim;
    proj.pca_mean = embeddings.colwise().mean();

    Eigen::MatrixXd centered = embeddings.rowwise() - proj.pca_mean.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    proj.pca_components = svd.matrixV().leftCols(output_dim).transpose();

    for (Eigen::Index c = 0; c < proj.pca_components.rows(); ++c) {
        for (Eigen::Index j = 0; j < d; ++j) {
            double coeff = proj.pca_components(c, j);
            if (std::abs(coeff) > 1e-12) {
                if (coeff < 0.0) proj.pca_components.row(c) = -proj.pca_components.row(c);
                break;
            }
        }
    }
    return proj;
}

Eigen::MatrixXd pca_transform(const Projection& proj, const Eigen::MatrixXd& embeddings) {
    if (proj.method != ProjectionMethod::Pca)
        throw ValidationError("projection is not PCA");
    if (embeddings.cols() != proj.input_dim)
        throw DimensionError("points have dimension " + std::to_string(embeddings.cols()) +
                             " but the projection expects " +
                             std::to_string(proj.input_dim));
    return (embeddings.rowwise() - proj.pca_mean.transpose()) *
           proj.pca_components.transpose();
}

Projection tsne_fit(const Eigen::MatrixXd& embeddings, const std::vector<std::string>& ids,
                    const TsneOptions& opts) {
    if (static_cast<Eigen::Index>(ids.size()) != embeddings.rows())
        throw DimensionError("ids count does not match embedding rows");
    Eigen::MatrixXd coords = tsne_coordinates(embeddings, opts);
    Projection proj;
    proj.method = ProjectionMethod::Tsne;
    proj.input_dim = static_cast<int>(embeddings.cols());
    proj.output_dim = opts.output_dim;
    proj.rng_seed = opts.seed;
    for (Eigen::Index i = 0; i < coords.rows(); ++i)
        proj.tsne_coords.emplace_back(ids[static_cast<size_t>(i)],
                                      coords.row(i).transpose());
    return proj;
}

}  // namespace ace

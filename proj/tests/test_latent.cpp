#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ace/embedding.hpp"
#include "ace/errors.hpp"
#include "ace/projection.hpp"
#include "ace/rng.hpp"

using namespace ace;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed) {
    Rng rng = Rng::keyed(seed, 0, 0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

CapabilityRecord record_with_embedding(const std::string& id, Eigen::VectorXd e) {
    CapabilityRecord r;
    r.id = id;
    r.name = id;
    r.area = "area";
    r.description = "desc";
    r.embedding = std::move(e);
    return r;
}

}  // namespace

TEST_CASE("embedding input layout") {
    CapabilityRecord r;
    r.name = "modular arithmetic";
    r.area = "Number Theory";
    r.description = "Works with residues.";
    CHECK(build_embedding_input(r) ==
          "name: modular arithmetic\narea: Number Theory\ndescription: Works with "
          "residues.");
    r.area.clear();
    CHECK_THROWS_AS(build_embedding_input(r), ValidationError);
}

TEST_CASE("content hash is stable and collision-averse on small edits") {
    std::string a = "name: x\narea: y\ndescription: z";
    CHECK(content_hash(a) == content_hash(a));
    CHECK(content_hash(a).size() == 16);
    CHECK(content_hash(a) != content_hash(a + " "));
    // frozen FNV-1a reference: empty input hashes to the offset basis
    CHECK(fnv1a64("") == 14695981039346656037ull);
}

TEST_CASE("two-point principal axis is the diagonal") {
    Eigen::MatrixXd x(2, 2);
    x << 1.0, 1.0, -1.0, -1.0;
    Projection p = pca_fit(x, 1);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(p.pca_components(0, 0) == doctest::Approx(inv_sqrt2));
    CHECK(p.pca_components(0, 1) == doctest::Approx(inv_sqrt2));
    Eigen::MatrixXd z = pca_transform(p, x);
    CHECK(z(0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(z(1, 0) == doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("projection matches an eigendecomposition of the covariance") {
    Eigen::MatrixXd x = random_matrix(30, 6, 99);
    Projection p = pca_fit(x, 3);

    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered /
                          static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    REQUIRE(eig.info() == Eigen::Success);

    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd expected = eig.eigenvectors().col(5 - c);
        // align sign with the fitted component before comparing
        if (expected.dot(p.pca_components.row(c)) < 0.0) expected = -expected;
        CHECK((p.pca_components.row(c).transpose() - expected).norm() ==
              doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("component rows are orthonormal") {
    Eigen::MatrixXd x = random_matrix(20, 5, 7);
    Projection p = pca_fit(x, 4);
    Eigen::MatrixXd gram = p.pca_components * p.pca_components.transpose();
    CHECK(gram.isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-10));
}

TEST_CASE("component sign is fixed deterministically") {
    Eigen::MatrixXd x = random_matrix(12, 4, 3);
    Projection a = pca_fit(x, 2);
    Projection b = pca_fit(x, 2);
    CHECK(a.pca_components.isApprox(b.pca_components));
    for (int c = 0; c < 2; ++c) {
        for (int j = 0; j < 4; ++j) {
            if (std::abs(a.pca_components(c, j)) > 1e-12) {
                CHECK(a.pca_components(c, j) > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("dimension preconditions") {
    Eigen::MatrixXd one_row(1, 4);
    one_row.setZero();
    CHECK_THROWS_AS(pca_fit(one_row, 1), ValidationError);
    Eigen::MatrixXd x = random_matrix(5, 3, 1);
    CHECK_THROWS_AS(pca_fit(x, 5), ValidationError);
    CHECK_THROWS_AS(pca_fit(x, 0), ValidationError);
    CHECK_NOTHROW(pca_fit(x, 3));
    Eigen::MatrixXd tall = random_matrix(3, 8, 1);
    CHECK_THROWS_AS(pca_fit(tall, 3), ValidationError);  // capped at n - 1 rows
    CHECK_NOTHROW(pca_fit(tall, 2));
}

TEST_CASE("transform rejects mismatched input width") {
    Eigen::MatrixXd x = random_matrix(6, 4, 2);
    Projection p = pca_fit(x, 2);
    Eigen::MatrixXd wrong = random_matrix(3, 5, 4);
    CHECK_THROWS_AS(pca_transform(p, wrong), DimensionError);
}

TEST_CASE("neighbor map is deterministic and recentered") {
    Eigen::MatrixXd x = random_matrix(40, 8, 21);
    TsneOptions opts;
    opts.perplexity = 5.0;
    opts.iterations = 300;
    opts.seed = 9;
    Eigen::MatrixXd a = tsne_coordinates(x, opts);
    Eigen::MatrixXd b = tsne_coordinates(x, opts);
    CHECK(a.isApprox(b));
    CHECK(a.rows() == 40);
    CHECK(a.cols() == 2);
    CHECK(a.colwise().mean().norm() == doctest::Approx(0.0).epsilon(1e-9));

    opts.seed = 10;
    Eigen::MatrixXd c = tsne_coordinates(x, opts);
    CHECK_FALSE(a.isApprox(c));
}

TEST_CASE("neighbor map keeps close points close") {
    // two tight, far-apart blobs must stay separated
    Rng rng = Rng::keyed(4, 0, 0);
    Eigen::MatrixXd x(24, 5);
    for (int i = 0; i < 24; ++i) {
        double center = i < 12 ? 0.0 : 50.0;
        for (int j = 0; j < 5; ++j) x(i, j) = center + 0.1 * rng.next_gaussian();
    }
    TsneOptions opts;  // default iteration budget; the layout needs the
    opts.perplexity = 4.0;  // post-exaggeration phase to recompress
    Eigen::MatrixXd z = tsne_coordinates(x, opts);

    Eigen::RowVectorXd c0 = z.topRows(12).colwise().mean();
    Eigen::RowVectorXd c1 = z.bottomRows(12).colwise().mean();
    double spread0 = (z.topRows(12).rowwise() - c0).rowwise().norm().maxCoeff();
    double spread1 = (z.bottomRows(12).rowwise() - c1).rowwise().norm().maxCoeff();
    CHECK((c0 - c1).norm() > 2.0 * std::max(spread0, spread1));
}

TEST_CASE("neighbor map preconditions") {
    Eigen::MatrixXd x = random_matrix(10, 6, 5);
    TsneOptions opts;
    opts.perplexity = 5.0;  // needs n > 3 * perplexity
    CHECK_THROWS_AS(tsne_coordinates(x, opts), ValidationError);
    opts.perplexity = 3.0;
    opts.output_dim = 4;
    CHECK_THROWS_AS(tsne_coordinates(x, opts), ValidationError);
    opts.output_dim = 6;
    CHECK_THROWS_AS(tsne_coordinates(x, opts), ValidationError);
}

TEST_CASE("fitted neighbor map caches per-id coordinates") {
    Eigen::MatrixXd x = random_matrix(20, 4, 17);
    std::vector<std::string> ids;
    for (int i = 0; i < 20; ++i) ids.push_back("cap" + std::to_string(i));
    TsneOptions opts;
    opts.perplexity = 3.0;
    opts.iterations = 250;
    Projection p = tsne_fit(x, ids, opts);
    CHECK(p.method == ProjectionMethod::Tsne);
    REQUIRE(p.tsne_coords.size() == 20);
    CHECK(p.tsne_coords[3].first == "cap3");
    CHECK(p.tsne_coords[3].second.size() == 2);
}

TEST_CASE("cosine similarity matrix") {
    std::vector<CapabilityRecord> records;
    Eigen::VectorXd e1(2), e2(2), e3(2);
    e1 << 1.0, 0.0;
    e2 << 0.0, 2.0;
    e3 << 3.0, 3.0;
    records.push_back(record_with_embedding("a", e1));
    records.push_back(record_with_embedding("b", e2));
    records.push_back(record_with_embedding("c", e3));
    Eigen::MatrixXd s = cosine_similarity_matrix(records);
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(s(0, 1) == doctest::Approx(0.0));
    CHECK(s(0, 2) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s(1, 2) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s == s.transpose());

    records.push_back(record_with_embedding("zero", Eigen::VectorXd::Zero(2)));
    CHECK_THROWS_WITH_AS(cosine_similarity_matrix(records),
                         doctest::Contains("zero"), ValidationError);
}

TEST_CASE("vector csv round trip") {
    auto path = temp_path("ace_vectors.csv");
    std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
    Eigen::VectorXd v1(3), v2(3);
    v1 << 0.25, -1.5, 3.0;
    v2 << 1e-9, 2.5, 0.1;
    rows.emplace_back("alpha", v1);
    rows.emplace_back("beta, quoted", v2);
    write_vector_csv(rows, path.string(), "z");

    auto back = read_vector_csv(path.string(), "z");
    REQUIRE(back.size() == 2);
    CHECK(back[0].first == "alpha");
    CHECK(back[1].first == "beta, quoted");
    CHECK(back[0].second.isApprox(v1));
    CHECK(back[1].second.isApprox(v2));
    std::filesystem::remove(path);
}

TEST_CASE("vector csv rejects a foreign header") {
    auto path = temp_path("ace_vectors_bad.csv");
    std::ofstream(path) << "id,w0,w1\na,1,2\n";
    CHECK_THROWS_AS(read_vector_csv(path.string(), "z"), Error);
    std::filesystem::remove(path);
}

TEST_CASE("file-backed embeddings land on matching records") {
    auto path = temp_path("ace_embed_src.csv");
    std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
    Eigen::VectorXd v(2);
    v << 0.5, 0.6;
    rows.emplace_back("known", v);
    write_vector_csv(rows, path.string(), "e");

    std::vector<CapabilityRecord> records;
    CapabilityRecord r;
    r.id = "known";
    r.name = "known";
    r.area = "a";
    r.description = "d";
    records.push_back(r);
    apply_embeddings_from_file(records, path.string());
    CHECK(records[0].embedding->isApprox(v));

    records[0].id = "unknown";
    CHECK_THROWS_AS(apply_embeddings_from_file(records, path.string()), LookupError);
    std::filesystem::remove(path);
}

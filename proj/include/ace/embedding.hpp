#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ace/http.hpp"
#include "ace/records.hpp"

namespace ace {

/// Text sent to the embedding endpoint for one capability:
/// "name: {name}\narea: {area}\ndescription: {description}".
std::string build_embedding_input(const CapabilityRecord& record);

uint64_t fnv1a64(const std::string& text);
/// 16-hex-digit content key used by the embedding cache.
std::string content_hash(const std::string& text);

struct EmbeddingConfig {
    EndpointConfig endpoint;
    int dimension = 512;
    int batch_size = 64;
    std::string cache_path;  // empty disables caching
};

/// Fetches embeddings over an OpenAI-compatible endpoint, in batches, with
/// retries, consulting a content-hash cache so unchanged inputs are never
/// re-requested.
class EmbeddingClient {
  public:
    EmbeddingClient(std::shared_ptr<HttpTransport> transport, EmbeddingConfig config);
    void fetch(std::vector<CapabilityRecord>& records);

  private:
    std::shared_ptr<HttpTransport> transport_;
    EmbeddingConfig config_;
};

/// Pairwise cosine similarities in record order.
Eigen::MatrixXd cosine_similarity_matrix(const std::vector<CapabilityRecord>& records);

/// id→vector CSV with header "id,{prefix}0,...". Embeddings use prefix "e",
/// latent coordinates use prefix "z".
std::vector<std::pair<std::string, Eigen::VectorXd>> read_vector_csv(
    const std::string& path, const std::string& prefix);
void write_vector_csv(const std::vector<std::pair<std::string, Eigen::VectorXd>>& rows,
                      const std::string& path, const std::string& prefix);

/// File-backed alternative to the endpoint: copies vectors from an
/// embeddings CSV onto matching records; missing ids are an error.
void apply_embeddings_from_file(std::vector<CapabilityRecord>& records,
                                const std::string& path);

}  // namespace ace

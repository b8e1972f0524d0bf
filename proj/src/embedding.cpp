#include "ace/embedding.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "ace/csv.hpp"
#include "ace/errors.hpp"
#include "ace/strings.hpp"

namespace ace {

using nlohmann::json;

std::string build_embedding_input(const CapabilityRecord& record) {
    if (record.name.empty()) throw ValidationError("name empty");
    if (record.area.empty()) throw ValidationError("area empty");
    if (record.description.empty()) throw ValidationError("description empty");
    return "name: " + record.name + "\narea: " + record.area +
           "\ndescription: " + record.description;
}

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string content_hash(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

namespace {

std::map<std::string, Eigen::VectorXd> load_cache(const std::string& path) {
    std::map<std::string, Eigen::VectorXd> cache;
    std::ifstream in(path);
    if (!in) return cache;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("hash") || !j.contains("embedding")) continue;
        const auto& arr = j["embedding"];
        Eigen::VectorXd v(arr.size());
        for (size_t i = 0; i < arr.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
        cache[j["hash"].get<std::string>()] = std::move(v);
    }
    return cache;
}

void append_cache(const std::string& path, const std::string& hash,
                  const Eigen::VectorXd& v) {
    std::ofstream out(path, std::ios::app);
    if (!out) return;
    json j;
    j["hash"] = hash;
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    j["embedding"] = std::move(arr);
    out << j.dump() << "\n";
}

}  // namespace

EmbeddingClient::EmbeddingClient(std::shared_ptr<HttpTransport> transport,
                                 EmbeddingConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {
    if (config_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

void EmbeddingClient::fetch(std::vector<CapabilityRecord>& records) {
    auto cache = config_.cache_path.empty() ? std::map<std::string, Eigen::VectorXd>{}
                                            : load_cache(config_.cache_path);

    std::vector<size_t> pending;
    std::vector<std::string> inputs(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        inputs[i] = build_embedding_input(records[i]);
        auto it = cache.find(content_hash(inputs[i]));
        if (it != cache.end())
            records[i].embedding = it->second;
        else
            pending.push_back(i);
    }

    for (size_t start = 0; start < pending.size();
         start += static_cast<size_t>(config_.batch_size)) {
        size_t end = std::min(pending.size(), start + static_cast<size_t>(config_.batch_size));
        json body;
        body["model"] = config_.endpoint.model;
        if (config_.dimension > 0) body["dimensions"] = config_.dimension;
        json arr = json::array();
        for (size_t k = start; k < end; ++k) arr.push_back(inputs[pending[k]]);
        body["input"] = std::move(arr);

        HttpResponse res =
            post_with_retries(*transport_, config_.endpoint, "/v1/embeddings", body.dump());
        json parsed;
        try {
            parsed = json::parse(res.body);
        } catch (const json::exception& e) {
            throw ParseError("embedding response not JSON (" + std::string(e.what()) +
                             "): " + res.body.substr(0, 200));
        }
        if (!parsed.contains("data") || !parsed["data"].is_array() ||
            parsed["data"].size() != end - start)
            throw ParseError("embedding response has wrong item count: " +
                             res.body.substr(0, 200));

        for (size_t k = start; k < end; ++k) {
            const auto& item = parsed["data"][k - start];
            if (!item.contains("embedding"))
                throw ParseError("embedding response item missing vector");
            const auto& vec = item["embedding"];
            if (config_.dimension > 0 &&
                static_cast<int>(vec.size()) != config_.dimension)
                throw DimensionError("endpoint returned dimension " +
                                     std::to_string(vec.size()) + ", expected " +
                                     std::to_string(config_.dimension));
            Eigen::VectorXd v(vec.size());
            for (size_t i = 0; i < vec.size(); ++i)
                v[static_cast<Eigen::Index>(i)] = vec[i].get<double>();
            records[pending[k]].embedding = v;
            if (!config_.cache_path.empty())
                append_cache(config_.cache_path, content_hash(inputs[pending[k]]), v);
        }
    }
    validate_collection(records);
}

Eigen::MatrixXd cosine_similarity_matrix(const std::vector<CapabilityRecord>& records) {
    const auto n = static_cast<Eigen::Index>(records.size());
    if (n == 0) throw ValidationError("no records");
    Eigen::Index d = -1;
    for (const auto& r : records) {
        if (!r.embedding)
            throw ValidationError("capability '" + r.id + "' has no embedding");
        if (d < 0) d = r.embedding->size();
    }
    Eigen::MatrixXd unit(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd& v = *records[static_cast<size_t>(i)].embedding;
        double norm = v.norm();
        if (norm < 1e-12)
            throw ValidationError("capability '" + records[static_cast<size_t>(i)].id +
                                  "' has a zero-norm embedding");
        unit.row(i) = v.transpose() / norm;
    }
    Eigen::MatrixXd sim = unit * unit.transpose();
    sim.diagonal().setOnes();
    return sim.cwiseMin(1.0).cwiseMax(-1.0);
}

std::vector<std::pair<std::string, Eigen::VectorXd>> read_vector_csv(
    const std::string& path, const std::string& prefix) {
    CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "id")
        throw ParseError(path + ": first column must be 'id'");
    const size_t d = table.header.size() - 1;
    if (d == 0) throw ParseError(path + ": no vector columns");
    for (size_t j = 0; j < d; ++j) {
        std::string expect = prefix + std::to_string(j);
        if (table.header[j + 1] != expect)
            throw ParseError(path + ": expected column '" + expect + "', found '" +
                             table.header[j + 1] + "'");
    }
    std::vector<std::pair<std::string, Eigen::VectorXd>> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(d));
        for (size_t j = 0; j < d; ++j) {
            try {
                v[static_cast<Eigen::Index>(j)] = std::stod(row[j + 1]);
            } catch (const std::exception&) {
                throw ParseError(path + ": non-numeric value '" + row[j + 1] +
                                 "' for id '" + row[0] + "'");
            }
        }
        out.emplace_back(row[0], std::move(v));
    }
    return out;
}

void write_vector_csv(const std::vector<std::pair<std::string, Eigen::VectorXd>>& rows,
                      const std::string& path, const std::string& prefix) {
    if (rows.empty()) throw ValidationError("no rows to write");
    CsvTable table;
    table.header.push_back("id");
    for (Eigen::Index j = 0; j < rows[0].second.size(); ++j)
        table.header.push_back(prefix + std::to_string(j));
    for (const auto& [id, v] : rows) {
        if (v.size() != rows[0].second.size())
            throw DimensionError("row '" + id + "' has dimension " +
                                 std::to_string(v.size()) + ", expected " +
                                 std::to_string(rows[0].second.size()));
        std::vector<std::string> row;
        row.push_back(id);
        for (Eigen::Index j = 0; j < v.size(); ++j) row.push_back(format_double(v[j]));
        table.rows.push_back(std::move(row));
    }
    write_csv(table, path);
}

void apply_embeddings_from_file(std::vector<CapabilityRecord>& records,
                                const std::string& path) {
    auto rows = read_vector_csv(path, "e");
    std::map<std::string, const Eigen::VectorXd*> by_id;
    for (const auto& [id, v] : rows) by_id[id] = &v;
    for (auto& r : records) {
        auto it = by_id.find(r.id);
        if (it == by_id.end())
            throw LookupError("no embedding for capability '" + r.id + "' in " + path);
        r.embedding = *it->second;
    }
    validate_collection(records);
}

}  // namespace ace

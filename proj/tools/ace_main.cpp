#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ace/active_loop.hpp"
#include "ace/chat.hpp"
#include "ace/csv.hpp"
#include "ace/embedding.hpp"
#include "ace/errors.hpp"
#include "ace/harness.hpp"
#include "ace/oracle.hpp"
#include "ace/pipeline.hpp"
#include "ace/projection.hpp"
#include "ace/records.hpp"
#include "ace/rng.hpp"
#include "ace/strings.hpp"

namespace {

using namespace ace;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Eigen::MatrixXd rows_to_matrix(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front().second.size());
    for (size_t i = 0; i < rows.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = rows[i].second.transpose();
    return m;
}

std::string metric4(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

int run_embed(const std::string& input, const std::string& output,
              const std::string& endpoint, const std::string& model,
              const std::string& from_file, int dim, std::string cache) {
    auto records = read_capabilities_jsonl(input);
    if (!from_file.empty()) {
        apply_embeddings_from_file(records, from_file);
    } else {
        EmbeddingConfig config;
        config.endpoint.base_url = endpoint;
        config.endpoint.model = model;
        config.dimension = dim;
        if (cache.empty()) cache = output + ".cache.jsonl";
        config.cache_path = cache;
        EmbeddingClient client(std::make_shared<HttplibTransport>(endpoint), config);
        client.fetch(records);
    }
    std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
    for (const auto& r : records) rows.emplace_back(r.id, *r.embedding);
    write_vector_csv(rows, output, "e");
    std::cout << "wrote " << rows.size() << " embeddings to " << output << "\n";
    return 0;
}

int run_reduce(const std::string& embeddings_path, const std::string& method, int dim,
               uint64_t seed, const std::string& output, double perplexity,
               int iterations) {
    auto rows = read_vector_csv(embeddings_path, "e");
    Eigen::MatrixXd m = rows_to_matrix(rows);
    Eigen::MatrixXd latent;
    if (method == "pca") {
        Projection proj = pca_fit(m, dim);
        latent = pca_transform(proj, m);
    } else if (method == "tsne") {
        TsneOptions opts;
        opts.output_dim = dim;
        opts.seed = seed;
        opts.perplexity = perplexity;
        opts.iterations = iterations;
        latent = tsne_coordinates(m, opts);
    } else {
        throw ConfigError("unknown method '" + method + "' (valid: pca, tsne)");
    }
    std::vector<std::pair<std::string, Eigen::VectorXd>> out;
    for (size_t i = 0; i < rows.size(); ++i)
        out.emplace_back(rows[i].first, latent.row(static_cast<Eigen::Index>(i)));
    write_vector_csv(out, output, "z");
    std::cout << "wrote " << out.size() << " latent points to " << output << "\n";
    return 0;
}

void print_summary(const std::map<std::string, MetricSeries>& series) {
    for (const auto& [name, s] : series) {
        size_t last = s.mean_rmse.size() - 1;
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "%s: final rmse %.4f [%.4f, %.4f], final std %.4f [%.4f, %.4f]",
                      name.c_str(), s.mean_rmse[last], s.rmse_ci_low[last],
                      s.rmse_ci_high[last], s.mean_post_std[last], s.std_ci_low[last],
                      s.std_ci_high[last]);
        std::cout << buf << "\n";
    }
}

int run_single_al(const std::string& scores_path, const std::string& latent_path,
                  const AcquisitionKind& acq, int budget, uint64_t seed,
                  double test_split, const std::string& out_dir) {
    TableOracle oracle = TableOracle::from_csv(scores_path);
    auto latents = read_vector_csv(latent_path, "z");

    for (const auto& [id, _] : oracle.scores())
        if (std::find_if(latents.begin(), latents.end(),
                         [&](const auto& p) { return p.first == id; }) == latents.end())
            throw ValidationError("no latent point for scored capability '" + id + "'");

    std::vector<Candidate> all;
    for (const auto& [id, z] : latents) all.push_back({id, z});

    std::optional<TestSet> test;
    std::vector<Candidate> train = all;
    if (test_split > 0.0) {
        std::vector<size_t> order(all.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng split_rng = Rng::keyed(seed, 0, 0x5817u);
        split_rng.shuffle(order);
        auto n_train = static_cast<size_t>(
            std::llround(static_cast<double>(all.size()) * (1.0 - test_split)));
        if (n_train < 2 || n_train >= all.size())
            throw ValidationError("test split leaves too few training candidates");
        train.clear();
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(all.size() - n_train),
                            all.front().point.size());
        Eigen::VectorXd truths(static_cast<Eigen::Index>(all.size() - n_train));
        for (size_t i = 0; i < all.size(); ++i) {
            const Candidate& c = all[order[i]];
            if (i < n_train) {
                train.push_back(c);
            } else {
                auto row = static_cast<Eigen::Index>(i - n_train);
                pts.row(row) = c.point.transpose();
                truths[row] = oracle.scores().at(c.id);
            }
        }
        test = TestSet{pts, truths};
    }

    LoopConfig loop;
    loop.seed_count = 2;
    loop.budget = std::min<int>(budget, static_cast<int>(train.size()));
    loop.acquisition = acq;
    loop.rng_seed = seed;
    auto [state, trace] = run(train, loop, oracle, test);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::string trace_path = out_dir + "/trace.csv";
    write_trace_csv(trace, trace_path);
    std::cout << "wrote " << trace.size() << " trace records to " << trace_path << "\n";
    return 0;
}

std::unique_ptr<ChatTransport> make_transport(const std::string& transport,
                                              const std::string& fixtures,
                                              const std::string& endpoint,
                                              const std::string& model) {
    if (transport == "mock") {
        if (fixtures.empty()) throw ConfigError("mock transport needs --fixtures DIR");
        return std::make_unique<FixtureChatTransport>(fixtures);
    }
    if (transport != "live")
        throw ConfigError("unknown transport '" + transport + "' (valid: live, mock)");
    EndpointConfig config;
    config.base_url = endpoint;
    config.model = model;
    if (api_key_from_env(config).empty())
        throw ConfigError("live transport requires the ACE_API_KEY environment variable");
    return std::make_unique<LiveChatTransport>(std::make_shared<HttplibTransport>(endpoint),
                                               config);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active capability elicitation toolkit"};
    app.require_subcommand(1);

    // embed
    auto* embed = app.add_subcommand("embed", "Embed capability descriptions");
    std::string embed_input, embed_output, embed_endpoint, embed_model, embed_from_file,
        embed_cache;
    int embed_dim = 512;
    embed->add_option("--input", embed_input, "capabilities JSONL")->required();
    embed->add_option("--output", embed_output, "embeddings CSV")->required();
    embed->add_option("--endpoint", embed_endpoint, "embedding API base URL");
    embed->add_option("--model", embed_model, "embedding model name");
    embed->add_option("--from-file", embed_from_file, "existing embeddings CSV");
    embed->add_option("--dim", embed_dim, "embedding dimension");
    embed->add_option("--cache", embed_cache, "embedding cache file");

    // reduce
    auto* reduce = app.add_subcommand("reduce", "Project embeddings to latent space");
    std::string reduce_embeddings, reduce_method = "pca", reduce_output;
    int reduce_dim = 2, reduce_iterations = 1000;
    uint64_t reduce_seed = 0;
    double reduce_perplexity = 5.0;
    reduce->add_option("--embeddings", reduce_embeddings, "embeddings CSV")->required();
    reduce->add_option("--method", reduce_method, "pca or tsne");
    reduce->add_option("--dim", reduce_dim, "latent dimension");
    reduce->add_option("--seed", reduce_seed, "random seed (tsne)");
    reduce->add_option("--output", reduce_output, "latent CSV")->required();
    reduce->add_option("--perplexity", reduce_perplexity, "tsne perplexity");
    reduce->add_option("--iterations", reduce_iterations, "tsne iterations");

    // run-toy
    auto* toy = app.add_subcommand("run-toy", "Noisy-sine active-learning benchmark");
    std::vector<std::string> toy_acquisitions;
    int toy_reps = 200, toy_candidates = 32, toy_test_points = 1000, toy_jobs = 0;
    uint64_t toy_seed = 42;
    double toy_noise = 0.1;
    std::string toy_out = "out", toy_config;
    toy->add_option("--acquisition", toy_acquisitions, "alm|alc|ucb (repeatable)");
    toy->add_option("--reps", toy_reps, "repetitions");
    toy->add_option("--seed", toy_seed, "base seed");
    toy->add_option("--out", toy_out, "output directory");
    toy->add_option("--candidates", toy_candidates, "pool size");
    toy->add_option("--test-points", toy_test_points, "test grid size");
    toy->add_option("--noise-std", toy_noise, "label noise std");
    toy->add_option("--jobs", toy_jobs, "parallel repetitions (default: cores)");
    toy->add_option("--config", toy_config, "experiment config JSON");

    // run-al
    auto* al = app.add_subcommand("run-al", "Active learning over a score table");
    std::string al_scores, al_latent, al_acquisition = "alm", al_out = "out", al_config;
    int al_budget = 0, al_reps = 1, al_jobs = 0;
    uint64_t al_seed = 0;
    double al_test_split = 0.0;
    al->add_option("--scores", al_scores, "scores CSV");
    al->add_option("--latent", al_latent, "latent CSV");
    al->add_option("--acquisition", al_acquisition, "alm|alc|ucb");
    al->add_option("--budget", al_budget, "max evaluations including seeds");
    al->add_option("--seed", al_seed, "seed");
    al->add_option("--test-split", al_test_split, "held-out fraction");
    al->add_option("--out", al_out, "output directory");
    al->add_option("--reps", al_reps, "harness repetitions (1 = single run)");
    al->add_option("--jobs", al_jobs, "parallel repetitions");
    al->add_option("--config", al_config, "experiment config JSON");

    // gen
    auto* gen = app.add_subcommand("gen", "Generation pipeline");
    gen->require_subcommand(1);
    std::string gen_transport = "mock", gen_fixtures, gen_endpoint, gen_model, gen_out;

    auto* gen_areas_cmd = gen->add_subcommand("areas", "Generate capability areas");
    std::string ga_domain = "Mathematics";
    int ga_num = 10, ga_caps_per_area = 8;
    gen_areas_cmd->add_option("--domain", ga_domain, "domain name");
    gen_areas_cmd->add_option("--num-areas", ga_num, "area count");
    gen_areas_cmd->add_option("--caps-per-area", ga_caps_per_area, "capabilities per area");

    auto* gen_caps_cmd = gen->add_subcommand("capabilities", "Generate capabilities");
    std::string gc_area, gc_domain = "Mathematics", gc_prior, gc_sample;
    int gc_count = 1;
    gen_caps_cmd->add_option("--area", gc_area, "capability area")->required();
    gen_caps_cmd->add_option("--domain", gc_domain, "domain name");
    gen_caps_cmd->add_option("--count", gc_count, "capability count");
    gen_caps_cmd->add_option("--prior", gc_prior, "existing capabilities JSONL");
    gen_caps_cmd->add_option("--sample-json", gc_sample, "sample capability JSON file");

    auto* gen_tasks_cmd = gen->add_subcommand("tasks", "Generate tasks for a capability");
    std::string gt_capabilities, gt_capability;
    int gt_count = 5;
    gen_tasks_cmd->add_option("--capabilities", gt_capabilities, "capabilities JSONL")
        ->required();
    gen_tasks_cmd->add_option("--capability", gt_capability, "capability id")->required();
    gen_tasks_cmd->add_option("--count", gt_count, "task count");

    for (auto* sub : {gen_areas_cmd, gen_caps_cmd, gen_tasks_cmd}) {
        sub->add_option("--transport", gen_transport, "live or mock");
        sub->add_option("--fixtures", gen_fixtures, "mock fixture directory");
        sub->add_option("--endpoint", gen_endpoint, "chat API base URL");
        sub->add_option("--model", gen_model, "scientist model name");
        sub->add_option("--out", gen_out, "output JSONL")->required();
    }

    // verify-metrics
    auto* vm = app.add_subcommand("verify-metrics", "Precision/recall/accuracy");
    long vm_tp = 0, vm_fn = 0, vm_fp = 0, vm_tn = 0;
    vm->add_option("--tp", vm_tp, "true positives")->required();
    vm->add_option("--fn", vm_fn, "false negatives")->required();
    vm->add_option("--fp", vm_fp, "false positives")->required();
    vm->add_option("--tn", vm_tn, "true negatives")->required();

    // similarity
    auto* sim = app.add_subcommand("similarity", "Pairwise cosine similarity matrix");
    std::string sim_embeddings, sim_output;
    sim->add_option("--embeddings", sim_embeddings, "embeddings CSV")->required();
    sim->add_option("--output", sim_output, "similarity CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (embed->parsed()) {
            if (!embed_from_file.empty() && !embed_endpoint.empty())
                throw ConfigError("--endpoint and --from-file are mutually exclusive");
            if (embed_from_file.empty() && embed_endpoint.empty())
                throw ConfigError("one of --endpoint or --from-file is required");
            return run_embed(embed_input, embed_output, embed_endpoint, embed_model,
                             embed_from_file, embed_dim, embed_cache);
        }

        if (reduce->parsed())
            return run_reduce(reduce_embeddings, reduce_method, reduce_dim, reduce_seed,
                              reduce_output, reduce_perplexity, reduce_iterations);

        if (toy->parsed()) {
            ExperimentConfig config;
            if (!toy_config.empty())
                config = parse_experiment_config(read_text_file(toy_config));
            config.scenario = Scenario::Toy;
            if (toy->count("--reps")) config.repetitions = toy_reps;
            else if (toy_config.empty()) config.repetitions = toy_reps;
            if (toy->count("--seed") || toy_config.empty()) config.base_rng_seed = toy_seed;
            if (toy->count("--out") || toy_config.empty()) config.output_dir = toy_out;
            if (toy->count("--candidates")) config.toy.num_candidates = toy_candidates;
            if (toy->count("--test-points")) config.toy.test_points = toy_test_points;
            if (toy->count("--noise-std")) config.toy.noise_std = toy_noise;
            if (!toy_acquisitions.empty()) {
                config.acquisitions.clear();
                for (const auto& a : toy_acquisitions)
                    config.acquisitions.push_back(AcquisitionKind::parse(a));
            } else if (config.acquisitions.empty()) {
                config.acquisitions = {AcquisitionKind::parse("alm"),
                                       AcquisitionKind::parse("alc")};
            }
            config.jobs = toy_jobs > 0
                              ? toy_jobs
                              : static_cast<int>(
                                    std::max(1u, std::thread::hardware_concurrency()));
            auto series = run_toy_experiment(config);
            emit_report(series, scenario_name(config.scenario), config.output_dir);
            print_summary(series);
            return 0;
        }

        if (al->parsed()) {
            if (al_reps <= 1) {
                if (al_scores.empty() || al_latent.empty())
                    throw ConfigError("--scores and --latent are required");
                if (al_budget < 2) throw ConfigError("--budget must be at least 2");
                return run_single_al(al_scores, al_latent,
                                     AcquisitionKind::parse(al_acquisition), al_budget,
                                     al_seed, al_test_split, al_out);
            }
            ExperimentConfig config;
            if (!al_config.empty())
                config = parse_experiment_config(read_text_file(al_config));
            config.scenario = Scenario::CapabilityTable;
            config.repetitions = al_reps;
            if (al->count("--scores")) config.capability.scores_path = al_scores;
            if (al->count("--latent")) config.capability.latent_path = al_latent;
            if (al->count("--seed") || al_config.empty()) {
                config.base_rng_seed = al_seed;
                config.capability.split_seed = al_seed;
            }
            if (al->count("--test-split"))
                config.capability.split_fraction = 1.0 - al_test_split;
            if (al->count("--budget")) config.capability.budget = al_budget;
            if (al->count("--out") || al_config.empty()) config.output_dir = al_out;
            if (al->count("--acquisition")) {
                config.acquisitions = {AcquisitionKind::parse(al_acquisition)};
            } else if (config.acquisitions.empty()) {
                config.acquisitions = {AcquisitionKind::parse("alm"),
                                       AcquisitionKind::parse("alc")};
            }
            config.jobs = al_jobs > 0
                              ? al_jobs
                              : static_cast<int>(
                                    std::max(1u, std::thread::hardware_concurrency()));
            auto series = run_capability_experiment(config);
            emit_report(series, scenario_name(config.scenario), config.output_dir);
            print_summary(series);
            return 0;
        }

        if (gen->parsed()) {
            auto transport =
                make_transport(gen_transport, gen_fixtures, gen_endpoint, gen_model);
            if (gen_areas_cmd->parsed()) {
                auto areas =
                    generate_areas(ga_domain, ga_num, ga_caps_per_area, *transport);
                std::ofstream out(gen_out);
                if (!out) throw Error("cannot write " + gen_out);
                for (size_t i = 0; i < areas.size(); ++i)
                    out << nlohmann::json{{"index", i}, {"area", areas[i]}}.dump() << "\n";
                std::cout << "wrote " << areas.size() << " areas to " << gen_out << "\n";
            } else if (gen_caps_cmd->parsed()) {
                std::vector<std::string> prior;
                if (!gc_prior.empty())
                    for (const auto& r : read_capabilities_jsonl(gc_prior))
                        prior.push_back(r.name);
                std::string sample = gc_sample.empty() ? "{}" : read_text_file(gc_sample);
                auto records = generate_capabilities(gc_area, gc_domain, prior, gc_count,
                                                     sample, *transport);
                write_capabilities_jsonl(records, gen_out);
                std::cout << "wrote " << records.size() << " capabilities to " << gen_out
                          << "\n";
            } else {
                auto records = read_capabilities_jsonl(gt_capabilities);
                auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) {
                    return r.id == gt_capability;
                });
                if (it == records.end())
                    throw LookupError("no capability '" + gt_capability + "' in " +
                                      gt_capabilities);
                auto tasks = generate_tasks(*it, gt_count, *transport);
                write_tasks_jsonl(tasks, gen_out);
                std::cout << "wrote " << tasks.size() << " tasks to " << gen_out << "\n";
            }
            return 0;
        }

        if (vm->parsed()) {
            VerificationMetrics m = verification_metrics({vm_tp, vm_fn, vm_fp, vm_tn});
            std::cout << "precision " << metric4(m.precision) << " recall "
                      << metric4(m.recall) << " accuracy " << metric4(m.accuracy)
                      << "\n";
            return 0;
        }

        if (sim->parsed()) {
            auto rows = read_vector_csv(sim_embeddings, "e");
            std::vector<CapabilityRecord> records;
            for (const auto& [id, v] : rows) {
                CapabilityRecord r;
                r.id = id;
                r.name = id;
                r.area = "-";
                r.description = "-";
                r.embedding = v;
                records.push_back(std::move(r));
            }
            Eigen::MatrixXd sim_matrix = cosine_similarity_matrix(records);
            CsvTable table;
            table.header.push_back("id");
            for (const auto& [id, _] : rows) table.header.push_back(id);
            for (size_t i = 0; i < rows.size(); ++i) {
                std::vector<std::string> row{rows[i].first};
                for (size_t j = 0; j < rows.size(); ++j)
                    row.push_back(format_double(sim_matrix(static_cast<Eigen::Index>(i),
                                                           static_cast<Eigen::Index>(j))));
                table.rows.push_back(std::move(row));
            }
            write_csv(table, sim_output);
            std::cout << "wrote " << rows.size() << "x" << rows.size()
                      << " similarity matrix to " << sim_output << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "ace/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "ace/csv.hpp"
#include "ace/embedding.hpp"
#include "ace/errors.hpp"
#include "ace/rng.hpp"
#include "ace/strings.hpp"
#include "ace/svg.hpp"

namespace ace {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
    if (acquisitions.empty()) throw ValidationError("no acquisitions configured");
    for (const auto& a : acquisitions) a.validate();
    if (scenario == Scenario::Toy) {
        if (toy.num_candidates < 3) throw ValidationError("num_candidates must be >= 3");
        if (toy.test_points < 1) throw ValidationError("test_points must be >= 1");
        if (toy.noise_std < 0.0) throw ValidationError("noise_std must be >= 0");
    } else {
        if (capability.scores_path.empty()) throw ConfigError("scores_path missing");
        if (capability.latent_path.empty()) throw ConfigError("latent_path missing");
        if (!(capability.split_fraction > 0.0 && capability.split_fraction < 1.0))
            throw ValidationError("split_fraction must be in (0,1)");
    }
    if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

double rmse(const std::vector<double>& predictions, const std::vector<double>& truths) {
    if (predictions.size() != truths.size() || predictions.empty())
        throw ValidationError("rmse needs equal nonzero lengths, got " +
                              std::to_string(predictions.size()) + " and " +
                              std::to_string(truths.size()));
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - truths[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

double mean_posterior_std(const gp::GpModel& model, const Eigen::MatrixXd& test) {
    if (test.rows() == 0) throw ValidationError("test set is empty");
    auto preds = model.predict(test);
    double sum = 0.0;
    for (const auto& p : preds) sum += std::sqrt(p.variance);
    return sum / static_cast<double>(preds.size());
}

Ci ci95(const std::vector<double>& samples) {
    if (samples.size() < 2) throw ValidationError("ci95 needs at least 2 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= n - 1.0;
    double half = 1.96 * std::sqrt(var) / std::sqrt(n);
    return {mean, mean - half, mean + half};
}

namespace {

Ci aggregate_ci(const std::vector<double>& samples) {
    if (samples.size() == 1) return {samples[0], samples[0], samples[0]};
    return ci95(samples);
}

// traces_by_rep[r] is one repetition's trace for a single acquisition.
MetricSeries aggregate(const AcquisitionKind& acquisition,
                       const std::vector<std::vector<TraceRecord>>& traces_by_rep) {
    const size_t iters = traces_by_rep.front().size();
    for (const auto& t : traces_by_rep)
        if (t.size() != iters)
            throw Error("repetitions produced different iteration counts (" +
                        std::to_string(t.size()) + " vs " + std::to_string(iters) + ")");

    MetricSeries series;
    series.acquisition = acquisition;
    for (size_t k = 0; k < iters; ++k) {
        std::vector<double> rmses, stds;
        for (const auto& t : traces_by_rep) {
            if (!t[k].test_rmse || !t[k].test_mean_std)
                throw Error("trace record lacks test metrics");
            rmses.push_back(*t[k].test_rmse);
            stds.push_back(*t[k].test_mean_std);
        }
        Ci r = aggregate_ci(rmses);
        Ci s = aggregate_ci(stds);
        series.mean_rmse.push_back(r.mean);
        series.rmse_ci_low.push_back(r.low);
        series.rmse_ci_high.push_back(r.high);
        series.mean_post_std.push_back(s.mean);
        series.std_ci_low.push_back(s.low);
        series.std_ci_high.push_back(s.high);
    }
    return series;
}

// One repetition of either scenario = per-acquisition traces.
using RepTraces = std::vector<std::vector<TraceRecord>>;

std::map<std::string, MetricSeries> run_repetitions(
    const ExperimentConfig& config,
    const std::function<RepTraces(int rep)>& run_one) {
    std::vector<RepTraces> results(static_cast<size_t>(config.repetitions));

    if (config.jobs <= 1 || config.repetitions == 1) {
        for (int r = 0; r < config.repetitions; ++r)
            results[static_cast<size_t>(r)] = run_one(r);
    } else {
        int jobs = std::min(config.jobs, config.repetitions);
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> failures(static_cast<size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (int r = w; r < config.repetitions; r += jobs)
                        results[static_cast<size_t>(r)] = run_one(r);
                } catch (...) {
                    failures[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (const auto& f : failures)
            if (f) std::rethrow_exception(f);
    }

    std::map<std::string, MetricSeries> out;
    for (size_t a = 0; a < config.acquisitions.size(); ++a) {
        std::vector<std::vector<TraceRecord>> by_rep;
        by_rep.reserve(results.size());
        for (const auto& rep : results) by_rep.push_back(rep[a]);
        out.emplace(config.acquisitions[a].name(),
                    aggregate(config.acquisitions[a], by_rep));
    }
    return out;
}

}  // namespace

std::map<std::string, MetricSeries> run_toy_experiment(const ExperimentConfig& config) {
    config.validate();
    if (config.scenario != Scenario::Toy) throw ConfigError("config is not a toy scenario");

    const int n = config.toy.num_candidates;
    Eigen::MatrixXd test_points(config.toy.test_points, 1);
    Eigen::VectorXd truths(config.toy.test_points);
    for (int j = 0; j < config.toy.test_points; ++j) {
        double x = config.toy.test_points == 1
                       ? 0.0
                       : static_cast<double>(j) / (config.toy.test_points - 1.0);
        test_points(j, 0) = x;
        truths[j] = SyntheticOracle::target(x);
    }
    TestSet test{test_points, truths};

    auto run_one = [&](int rep) -> RepTraces {
        const uint64_t rep_seed = config.base_rng_seed + static_cast<uint64_t>(rep);
        Rng draw = Rng::keyed(rep_seed, 0xca4du, 0);
        std::vector<Candidate> candidates;
        std::map<std::string, double> labels;
        for (int i = 0; i < n; ++i) {
            Candidate c;
            c.id = std::to_string(i);
            c.point = Eigen::VectorXd::Constant(1, draw.next_double());
            double noise = config.toy.noise_std == 0.0
                               ? 0.0
                               : config.toy.noise_std *
                                     keyed_gaussian(rep_seed, 0x401eu,
                                                    static_cast<uint64_t>(i));
            labels[c.id] = SyntheticOracle::target(c.point[0]) + noise;
            candidates.push_back(std::move(c));
        }

        RepTraces traces;
        for (const auto& acq : config.acquisitions) {
            TableOracle oracle(labels);
            LoopConfig loop;
            loop.seed_count = 2;
            loop.budget = n;
            loop.acquisition = acq;
            loop.rng_seed = rep_seed;
            auto [state, trace] = run(candidates, loop, oracle, test);
            traces.push_back(std::move(trace));
        }
        return traces;
    };

    return run_repetitions(config, run_one);
}

std::map<std::string, MetricSeries> run_capability_experiment(
    const ExperimentConfig& config) {
    config.validate();
    if (config.scenario != Scenario::CapabilityTable)
        throw ConfigError("config is not a capability scenario");

    TableOracle table = TableOracle::from_csv(config.capability.scores_path);
    auto latents = read_vector_csv(config.capability.latent_path, "z");

    std::set<std::string> score_ids, latent_ids;
    for (const auto& [id, _] : table.scores()) score_ids.insert(id);
    for (const auto& [id, _] : latents) latent_ids.insert(id);
    std::vector<std::string> orphans;
    for (const auto& id : score_ids)
        if (!latent_ids.count(id)) orphans.push_back(id + " (no latent)");
    for (const auto& id : latent_ids)
        if (!score_ids.count(id)) orphans.push_back(id + " (no score)");
    if (!orphans.empty()) {
        std::string joined;
        for (const auto& o : orphans) joined += (joined.empty() ? "" : ", ") + o;
        throw ValidationError("scores/latent id mismatch: " + joined);
    }

    std::vector<Candidate> all;
    for (const auto& [id, z] : latents) all.push_back({id, z});
    const size_t n = all.size();
    const auto n_train = static_cast<size_t>(
        std::llround(static_cast<double>(n) * config.capability.split_fraction));
    if (n_train < 2 || n_train >= n)
        throw ValidationError("split leaves " + std::to_string(n_train) +
                              " training candidates of " + std::to_string(n));

    auto run_one = [&, n_train](int rep) -> RepTraces {
        const uint64_t rep_seed = config.base_rng_seed + static_cast<uint64_t>(rep);
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        Rng split_rng = Rng::keyed(config.capability.split_seed,
                                   static_cast<uint64_t>(rep), 0x5817u);
        split_rng.shuffle(order);

        std::vector<Candidate> train;
        Eigen::MatrixXd test_points(static_cast<Eigen::Index>(n - n_train),
                                    all.front().point.size());
        Eigen::VectorXd truths(static_cast<Eigen::Index>(n - n_train));
        for (size_t i = 0; i < n; ++i) {
            const Candidate& c = all[order[i]];
            if (i < n_train) {
                train.push_back(c);
            } else {
                auto row = static_cast<Eigen::Index>(i - n_train);
                test_points.row(row) = c.point.transpose();
                truths[row] = table.scores().at(c.id);
            }
        }
        TestSet test{test_points, truths};

        RepTraces traces;
        for (const auto& acq : config.acquisitions) {
            TableOracle oracle(table.scores());
            LoopConfig loop;
            loop.seed_count = 2;
            loop.budget = config.capability.budget > 0
                              ? std::min(config.capability.budget,
                                         static_cast<int>(n_train))
                              : static_cast<int>(n_train);
            loop.acquisition = acq;
            loop.rng_seed = rep_seed;
            auto [state, trace] = run(train, loop, oracle, test);
            traces.push_back(std::move(trace));
        }
        return traces;
    };

    return run_repetitions(config, run_one);
}

std::vector<std::string> emit_report(const std::map<std::string, MetricSeries>& series,
                                     const std::string& scenario_name,
                                     const std::string& output_dir) {
    if (series.empty()) throw ValidationError("no series to report");
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);

    std::vector<std::string> written;
    for (const auto& [name, s] : series) {
        CsvTable table;
        table.header = {"iteration", "mean_rmse", "rmse_lo", "rmse_hi",
                        "mean_std",  "std_lo",    "std_hi"};
        for (size_t k = 0; k < s.mean_rmse.size(); ++k) {
            table.rows.push_back(
                {std::to_string(k + 1), format_double(s.mean_rmse[k]),
                 format_double(s.rmse_ci_low[k]), format_double(s.rmse_ci_high[k]),
                 format_double(s.mean_post_std[k]), format_double(s.std_ci_low[k]),
                 format_double(s.std_ci_high[k])});
        }
        std::string path = output_dir + "/" + scenario_name + "_" + name + ".csv";
        write_csv(table, path);
        written.push_back(path);
    }

    auto chart = [&](const std::string& metric, auto mean_of, auto lo_of, auto hi_of) {
        std::vector<SvgSeries> chart_series;
        for (const auto& [name, s] : series) {
            SvgSeries cs;
            cs.label = name;
            for (size_t k = 0; k < s.mean_rmse.size(); ++k) {
                cs.x.push_back(static_cast<double>(k + 1));
                cs.y.push_back(mean_of(s, k));
                cs.lo.push_back(lo_of(s, k));
                cs.hi.push_back(hi_of(s, k));
            }
            chart_series.push_back(std::move(cs));
        }
        std::string path = output_dir + "/" + scenario_name + "_" + metric + ".svg";
        write_line_chart_svg(path, scenario_name + " " + metric, "iteration", metric,
                             chart_series);
        written.push_back(path);
    };
    chart(
        "rmse", [](const MetricSeries& s, size_t k) { return s.mean_rmse[k]; },
        [](const MetricSeries& s, size_t k) { return s.rmse_ci_low[k]; },
        [](const MetricSeries& s, size_t k) { return s.rmse_ci_high[k]; });
    chart(
        "std", [](const MetricSeries& s, size_t k) { return s.mean_post_std[k]; },
        [](const MetricSeries& s, size_t k) { return s.std_ci_low[k]; },
        [](const MetricSeries& s, size_t k) { return s.std_ci_high[k]; });
    return written;
}

std::string scenario_name(Scenario scenario) {
    return scenario == Scenario::Toy ? "toy" : "capability";
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig config;
    if (j.contains("scenario")) {
        std::string s = j["scenario"].get<std::string>();
        if (s == "toy")
            config.scenario = Scenario::Toy;
        else if (s == "capability_table")
            config.scenario = Scenario::CapabilityTable;
        else
            throw ConfigError("unknown scenario '" + s +
                              "' (valid: toy, capability_table)");
    }
    if (j.contains("repetitions")) config.repetitions = j["repetitions"].get<int>();
    if (j.contains("acquisitions")) {
        for (const auto& item : j["acquisitions"]) {
            if (item.is_string()) {
                config.acquisitions.push_back(AcquisitionKind::parse(item.get<std::string>()));
            } else {
                AcquisitionKind kind = AcquisitionKind::parse(item.at("kind").get<std::string>());
                if (item.contains("ucb_beta")) kind.ucb_beta = item["ucb_beta"].get<double>();
                config.acquisitions.push_back(kind);
            }
        }
    }
    if (j.contains("toy")) {
        const auto& t = j["toy"];
        if (t.contains("num_candidates")) config.toy.num_candidates = t["num_candidates"].get<int>();
        if (t.contains("test_points")) config.toy.test_points = t["test_points"].get<int>();
        if (t.contains("noise_std")) config.toy.noise_std = t["noise_std"].get<double>();
    }
    if (j.contains("capability")) {
        const auto& c = j["capability"];
        if (c.contains("scores_path")) config.capability.scores_path = c["scores_path"].get<std::string>();
        if (c.contains("latent_path")) config.capability.latent_path = c["latent_path"].get<std::string>();
        if (c.contains("split_fraction")) config.capability.split_fraction = c["split_fraction"].get<double>();
        if (c.contains("split_seed")) config.capability.split_seed = c["split_seed"].get<uint64_t>();
        if (c.contains("budget")) config.capability.budget = c["budget"].get<int>();
    }
    if (j.contains("base_rng_seed")) config.base_rng_seed = j["base_rng_seed"].get<uint64_t>();
    if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("jobs")) config.jobs = j["jobs"].get<int>();
    return config;
}

}  // namespace ace

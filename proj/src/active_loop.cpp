#include "ace/active_loop.hpp"

#include <cmath>
#include <fstream>

#include "ace/csv.hpp"
#include "ace/errors.hpp"
#include "ace/harness.hpp"
#include "ace/rng.hpp"
#include "ace/strings.hpp"

namespace ace {

void LoopConfig::validate() const {
    if (seed_count < 1) throw ValidationError("seed_count must be >= 1");
    if (budget < seed_count)
        throw ValidationError("budget " + std::to_string(budget) +
                              " below seed_count " + std::to_string(seed_count));
    if (hyper_refit_every < 1) throw ValidationError("hyper_refit_every must be >= 1");
    acquisition.validate();
    if (fixed_params) fixed_params->validate();
}

namespace {

Eigen::MatrixXd pool_matrix(const std::vector<Candidate>& pool) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pool.size()), pool.front().point.size());
    for (size_t i = 0; i < pool.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = pool[i].point.transpose();
    return m;
}

std::vector<std::string> pool_ids(const std::vector<Candidate>& pool) {
    std::vector<std::string> ids;
    ids.reserve(pool.size());
    for (const auto& c : pool) ids.push_back(c.id);
    return ids;
}

gp::GpModel fit_model(const gp::Dataset& labeled, const LoopConfig& config,
                      const gp::KernelParams* reuse_params) {
    gp::FitOptions opts;
    opts.standardize = config.standardize;
    if (config.fixed_params) return gp::GpModel::fit(labeled, *config.fixed_params, opts);
    if (reuse_params) return gp::GpModel::fit(labeled, *reuse_params, opts);
    gp::HyperSearchSpec search = config.search;
    if (config.scale_length_to_data)
        search.length_scale = gp::HyperSearchSpec::for_inputs(labeled.inputs).length_scale;
    return gp::GpModel::fit(labeled, gp::optimize_hyperparams(labeled, search), opts);
}

}  // namespace

double pool_mean_std(const LoopState& state) {
    if (state.pool.empty()) return 0.0;
    return mean_posterior_std(state.model, pool_matrix(state.pool));
}

LoopState initialize(const std::vector<Candidate>& candidates, const LoopConfig& config,
                     Oracle& oracle) {
    config.validate();
    if (candidates.size() < static_cast<size_t>(config.seed_count))
        throw ValidationError("need at least " + std::to_string(config.seed_count) +
                              " candidates, have " + std::to_string(candidates.size()));
    const Eigen::Index dim = candidates.front().point.size();
    for (const auto& c : candidates)
        if (c.point.size() != dim)
            throw DimensionError("candidate '" + c.id + "' has dimension " +
                                 std::to_string(c.point.size()) + ", expected " +
                                 std::to_string(dim));

    Rng rng = Rng::keyed(config.rng_seed, 0x5eedu, 0);
    std::vector<size_t> picks =
        rng.sample_without_replacement(candidates.size(), static_cast<size_t>(config.seed_count));
    std::vector<bool> picked(candidates.size(), false);
    for (size_t p : picks) picked[p] = true;

    LoopState state;
    state.labeled.inputs.resize(config.seed_count, dim);
    state.labeled.targets.resize(config.seed_count);
    for (size_t k = 0; k < picks.size(); ++k) {
        const Candidate& c = candidates[picks[k]];
        double y;
        try {
            y = oracle.evaluate(c.id, c.point);
        } catch (const std::exception& e) {
            throw Error("seed evaluation failed for '" + c.id + "' (" +
                        std::to_string(k) + " of " + std::to_string(picks.size()) +
                        " done): " + e.what());
        }
        state.labeled.inputs.row(static_cast<Eigen::Index>(k)) = c.point.transpose();
        state.labeled.targets[static_cast<Eigen::Index>(k)] = y;
        state.labeled_ids.push_back(c.id);
    }
    for (size_t i = 0; i < candidates.size(); ++i)
        if (!picked[i]) state.pool.push_back(candidates[i]);

    state.model = fit_model(state.labeled, config, nullptr);
    state.iteration = 0;
    return state;
}

std::pair<LoopState, TraceRecord> step(const LoopState& state, const LoopConfig& config,
                                       Oracle& oracle) {
    if (state.pool.empty()) throw ValidationError("pool is empty");

    PoolScores scores =
        score_pool(state.model, pool_matrix(state.pool), config.acquisition,
                   pool_ids(state.pool));
    int winner = select_index(scores);
    const Candidate& chosen = state.pool[static_cast<size_t>(winner)];

    double y = oracle.evaluate(chosen.id, chosen.point);

    LoopState next;
    next.labeled = state.labeled.appended(chosen.point, y);
    next.labeled_ids = state.labeled_ids;
    next.labeled_ids.push_back(chosen.id);
    next.pool = state.pool;
    next.pool.erase(next.pool.begin() + winner);
    next.iteration = state.iteration + 1;

    bool reoptimize = next.iteration % config.hyper_refit_every == 0;
    const gp::KernelParams reuse = state.model.params();
    next.model = fit_model(next.labeled, config, reoptimize ? nullptr : &reuse);

    TraceRecord trace;
    trace.iteration = next.iteration;
    trace.selected_id = chosen.id;
    trace.acquisition_score = scores.scores[winner];
    trace.observed_score = y;
    trace.pool_mean_std = pool_mean_std(next);
    return {std::move(next), trace};
}

std::pair<LoopState, std::vector<TraceRecord>> run(
    const std::vector<Candidate>& candidates, const LoopConfig& config, Oracle& oracle,
    const std::optional<TestSet>& test) {
    LoopState state = initialize(candidates, config, oracle);
    std::vector<TraceRecord> traces;

    auto should_stop = [&](const LoopState& s) {
        if (static_cast<int>(s.labeled.size()) >= config.budget) return true;
        if (s.pool.empty()) return true;
        return config.stop_std_threshold && pool_mean_std(s) < *config.stop_std_threshold;
    };

    while (!should_stop(state)) {
        auto [next, trace] = step(state, config, oracle);
        if (test) {
            auto preds = next.model.predict(test->points);
            std::vector<double> means;
            means.reserve(preds.size());
            for (const auto& p : preds) means.push_back(p.mean);
            std::vector<double> truths(test->truths.data(),
                                       test->truths.data() + test->truths.size());
            trace.test_rmse = rmse(means, truths);
            trace.test_mean_std = mean_posterior_std(next.model, test->points);
        }
        traces.push_back(std::move(trace));
        state = std::move(next);
    }
    return {std::move(state), std::move(traces)};
}

void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path) {
    CsvTable table;
    table.header = {"iteration",      "selected_id",   "acquisition_score",
                    "observed_score", "pool_mean_std", "test_rmse"};
    for (const auto& t : trace) {
        table.rows.push_back({std::to_string(t.iteration), t.selected_id,
                              format_double(t.acquisition_score),
                              format_double(t.observed_score),
                              format_double(t.pool_mean_std),
                              t.test_rmse ? format_double(*t.test_rmse) : ""});
    }
    write_csv(table, path);
}

}  // namespace ace

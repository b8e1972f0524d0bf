#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ace/errors.hpp"
#include "ace/harness.hpp"
#include "ace/svg.hpp"

using namespace ace;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_toy_config() {
    ExperimentConfig config;
    config.scenario = Scenario::Toy;
    config.repetitions = 3;
    config.acquisitions = {AcquisitionKind{AcquisitionName::Alm},
                           AcquisitionKind{AcquisitionName::Alc}};
    config.toy.num_candidates = 8;
    config.toy.test_points = 21;
    config.toy.noise_std = 0.05;
    config.base_rng_seed = 11;
    return config;
}

// Twelve capabilities on a 2-D latent line with scores that track the first
// coordinate, enough structure for the GP to beat random splits.
void write_capability_fixture(const std::filesystem::path& dir) {
    std::ofstream scores(dir / "scores.csv");
    scores << "capability_id,score\n";
    std::ofstream latent(dir / "latent.csv");
    latent << "id,z0,z1\n";
    for (int i = 0; i < 12; ++i) {
        double x = i / 11.0;
        scores << "cap" << i << "," << 0.3 + 0.5 * x << "\n";
        latent << "cap" << i << "," << x << "," << (i % 2 == 0 ? 0.1 : -0.1) << "\n";
    }
}

bool same_series(const MetricSeries& a, const MetricSeries& b) {
    return a.mean_rmse == b.mean_rmse && a.rmse_ci_low == b.rmse_ci_low &&
           a.rmse_ci_high == b.rmse_ci_high && a.mean_post_std == b.mean_post_std &&
           a.std_ci_low == b.std_ci_low && a.std_ci_high == b.std_ci_high;
}

}  // namespace

TEST_CASE("rmse matches the closed form and rejects shape mismatches") {
    CHECK(rmse({0.0, 1.0}, {0.0, 0.0}) == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(rmse({2.0, 2.0, 2.0}, {2.0, 2.0, 2.0}) == 0.0);
    CHECK_THROWS_WITH_AS(rmse({1.0}, {1.0, 2.0}),
                         "rmse needs equal nonzero lengths, got 1 and 2",
                         ValidationError);
    CHECK_THROWS_AS(rmse({}, {}), ValidationError);
}

TEST_CASE("ci95 is the normal interval with the sample deviation") {
    Ci c = ci95({0.0, 2.0});
    CHECK(c.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.low == doctest::Approx(-0.96).epsilon(1e-12));
    CHECK(c.high == doctest::Approx(2.96).epsilon(1e-12));

    Ci flat = ci95({0.5, 0.5, 0.5});
    CHECK(flat.low == doctest::Approx(flat.high).epsilon(1e-15));

    CHECK_THROWS_WITH_AS(ci95({1.0}), "ci95 needs at least 2 samples", ValidationError);
}

TEST_CASE("mean posterior std averages predictive deviations") {
    gp::Dataset train;
    train.inputs = Eigen::MatrixXd::Zero(1, 1);
    train.targets = Eigen::VectorXd::Zero(1);
    gp::KernelParams params;
    params.noise_variance = 0.01;
    gp::GpModel model = gp::GpModel::fit(train, params, {.standardize = false});

    Eigen::MatrixXd test(2, 1);
    test << 0.0, 100.0;
    auto preds = model.predict(test);
    double expected = (std::sqrt(preds[0].variance) + std::sqrt(preds[1].variance)) / 2.0;
    CHECK(mean_posterior_std(model, test) == doctest::Approx(expected).epsilon(1e-15));

    CHECK_THROWS_WITH_AS(mean_posterior_std(model, Eigen::MatrixXd(0, 1)),
                         "test set is empty", ValidationError);
}

TEST_CASE("experiment config validation rejects each bad field") {
    ExperimentConfig config = small_toy_config();
    CHECK_NOTHROW(config.validate());

    ExperimentConfig bad = config;
    bad.repetitions = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = config;
    bad.acquisitions.clear();
    CHECK_THROWS_WITH_AS(bad.validate(), "no acquisitions configured", ValidationError);

    bad = config;
    bad.toy.num_candidates = 2;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = config;
    bad.toy.test_points = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = config;
    bad.toy.noise_std = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = config;
    bad.jobs = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    ExperimentConfig cap;
    cap.scenario = Scenario::CapabilityTable;
    cap.acquisitions = config.acquisitions;
    CHECK_THROWS_WITH_AS(cap.validate(), "scores_path missing", ConfigError);
    cap.capability.scores_path = "s.csv";
    CHECK_THROWS_WITH_AS(cap.validate(), "latent_path missing", ConfigError);
    cap.capability.latent_path = "z.csv";
    cap.capability.split_fraction = 1.0;
    CHECK_THROWS_WITH_AS(cap.validate(), "split_fraction must be in (0,1)",
                         ValidationError);
}

TEST_CASE("config json fills both scenarios and acquisition forms") {
    ExperimentConfig toy = parse_experiment_config(R"({
        "scenario": "toy",
        "repetitions": 7,
        "acquisitions": ["alm", {"kind": "ucb", "ucb_beta": 2.5}],
        "toy": {"num_candidates": 12, "test_points": 33, "noise_std": 0.2},
        "base_rng_seed": 99,
        "output_dir": "results",
        "jobs": 4
    })");
    CHECK(toy.scenario == Scenario::Toy);
    CHECK(toy.repetitions == 7);
    REQUIRE(toy.acquisitions.size() == 2);
    CHECK(toy.acquisitions[0].kind == AcquisitionName::Alm);
    CHECK(toy.acquisitions[1].kind == AcquisitionName::Ucb);
    CHECK(toy.acquisitions[1].ucb_beta == 2.5);
    CHECK(toy.toy.num_candidates == 12);
    CHECK(toy.toy.test_points == 33);
    CHECK(toy.toy.noise_std == 0.2);
    CHECK(toy.base_rng_seed == 99);
    CHECK(toy.output_dir == "results");
    CHECK(toy.jobs == 4);

    ExperimentConfig cap = parse_experiment_config(R"({
        "scenario": "capability_table",
        "acquisitions": ["alc"],
        "capability": {"scores_path": "s.csv", "latent_path": "z.csv",
                       "split_fraction": 0.6, "split_seed": 5, "budget": 9}
    })");
    CHECK(cap.scenario == Scenario::CapabilityTable);
    CHECK(cap.capability.scores_path == "s.csv");
    CHECK(cap.capability.latent_path == "z.csv");
    CHECK(cap.capability.split_fraction == 0.6);
    CHECK(cap.capability.split_seed == 5);
    CHECK(cap.capability.budget == 9);
    CHECK(cap.repetitions == 200);  // untouched default

    CHECK(scenario_name(toy.scenario) == "toy");
    CHECK(scenario_name(cap.scenario) == "capability");

    CHECK_THROWS_AS(parse_experiment_config("{not json"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"scenario": "banana"})"),
                         "unknown scenario 'banana' (valid: toy, capability_table)",
                         ConfigError);
}

TEST_CASE("toy experiment aggregates one series per acquisition") {
    ExperimentConfig config = small_toy_config();
    auto series = run_toy_experiment(config);
    REQUIRE(series.size() == 2);
    REQUIRE(series.count("alm") == 1);
    REQUIRE(series.count("alc") == 1);

    for (const auto& [name, s] : series) {
        // budget 8 with 2 seed labels leaves 6 recorded iterations
        REQUIRE(s.mean_rmse.size() == 6);
        REQUIRE(s.mean_post_std.size() == 6);
        for (size_t k = 0; k < s.mean_rmse.size(); ++k) {
            CHECK(std::isfinite(s.mean_rmse[k]));
            CHECK(s.mean_post_std[k] > 0.0);
            CHECK(s.rmse_ci_low[k] <= s.mean_rmse[k]);
            CHECK(s.mean_rmse[k] <= s.rmse_ci_high[k]);
            CHECK(s.std_ci_low[k] <= s.mean_post_std[k]);
            CHECK(s.mean_post_std[k] <= s.std_ci_high[k]);
        }
    }

    auto again = run_toy_experiment(config);
    CHECK(same_series(series.at("alm"), again.at("alm")));
    CHECK(same_series(series.at("alc"), again.at("alc")));
}

TEST_CASE("repetition threads change nothing but wall time") {
    ExperimentConfig config = small_toy_config();
    config.repetitions = 4;
    config.acquisitions = {AcquisitionKind{AcquisitionName::Alm}};
    auto serial = run_toy_experiment(config);
    config.jobs = 3;
    auto threaded = run_toy_experiment(config);
    CHECK(same_series(serial.at("alm"), threaded.at("alm")));
}

TEST_CASE("capability experiment joins scores with latent coordinates") {
    auto dir = scratch_dir("ace_harness_cap");
    write_capability_fixture(dir);

    ExperimentConfig config;
    config.scenario = Scenario::CapabilityTable;
    config.repetitions = 2;
    config.acquisitions = {AcquisitionKind{AcquisitionName::Alc}};
    config.capability.scores_path = (dir / "scores.csv").string();
    config.capability.latent_path = (dir / "latent.csv").string();
    config.capability.split_fraction = 0.5;
    config.capability.split_seed = 3;

    auto series = run_capability_experiment(config);
    REQUIRE(series.count("alc") == 1);
    const auto& s = series.at("alc");
    // 6 training candidates, 2 seeds, exhaustion at budget 6 -> 4 iterations
    REQUIRE(s.mean_rmse.size() == 4);
    for (double v : s.mean_rmse) CHECK(std::isfinite(v));

    auto again = run_capability_experiment(config);
    CHECK(same_series(s, again.at("alc")));

    config.capability.budget = 3;
    auto capped = run_capability_experiment(config);
    CHECK(capped.at("alc").mean_rmse.size() == 1);

    std::filesystem::remove_all(dir);
}

TEST_CASE("capability experiment names every orphaned id") {
    auto dir = scratch_dir("ace_harness_orphan");
    std::ofstream(dir / "scores.csv")
        << "capability_id,score\na,0.5\nb,0.25\nc,0.75\nd,0.5\n";
    std::ofstream(dir / "latent.csv") << "id,z0\na,0\nb,1\nc,2\ne,3\n";

    ExperimentConfig config;
    config.scenario = Scenario::CapabilityTable;
    config.repetitions = 1;
    config.acquisitions = {AcquisitionKind{AcquisitionName::Alm}};
    config.capability.scores_path = (dir / "scores.csv").string();
    config.capability.latent_path = (dir / "latent.csv").string();
    CHECK_THROWS_WITH_AS(run_capability_experiment(config),
                         "scores/latent id mismatch: d (no latent), e (no score)",
                         ValidationError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("scenario guards reject the wrong runner") {
    ExperimentConfig toy = small_toy_config();
    CHECK_THROWS_AS(run_capability_experiment(toy), Error);

    auto dir = scratch_dir("ace_harness_guard");
    write_capability_fixture(dir);
    ExperimentConfig cap;
    cap.scenario = Scenario::CapabilityTable;
    cap.repetitions = 1;
    cap.acquisitions = {AcquisitionKind{AcquisitionName::Alm}};
    cap.capability.scores_path = (dir / "scores.csv").string();
    cap.capability.latent_path = (dir / "latent.csv").string();
    CHECK_THROWS_WITH_AS(run_toy_experiment(cap), "config is not a toy scenario",
                         ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("report writes one csv per acquisition and one chart per metric") {
    auto dir = scratch_dir("ace_harness_report");

    MetricSeries alm;
    alm.acquisition = AcquisitionKind{AcquisitionName::Alm};
    alm.mean_rmse = {0.5, 0.25};
    alm.rmse_ci_low = {0.4, 0.2};
    alm.rmse_ci_high = {0.6, 0.3};
    alm.mean_post_std = {0.3, 0.2};
    alm.std_ci_low = {0.25, 0.15};
    alm.std_ci_high = {0.35, 0.25};
    MetricSeries alc = alm;
    alc.acquisition = AcquisitionKind{AcquisitionName::Alc};
    alc.mean_rmse = {0.45, 0.2};

    std::map<std::string, MetricSeries> series{{"alm", alm}, {"alc", alc}};
    auto written = emit_report(series, "toy", dir.string());
    REQUIRE(written.size() == 4);
    for (const auto& path : written) CHECK(std::filesystem::exists(path));
    CHECK(std::filesystem::exists(dir / "toy_alm.csv"));
    CHECK(std::filesystem::exists(dir / "toy_alc.csv"));
    CHECK(std::filesystem::exists(dir / "toy_rmse.svg"));
    CHECK(std::filesystem::exists(dir / "toy_std.svg"));

    std::string csv = slurp(dir / "toy_alm.csv");
    CHECK(csv.rfind("iteration,mean_rmse,rmse_lo,rmse_hi,mean_std,std_lo,std_hi\n", 0) == 0);
    CHECK(csv.find("\n1,0.5,0.4,0.6,0.3,0.25,0.35\n") != std::string::npos);
    CHECK(csv.find("\n2,0.25,0.2,0.3,0.2,0.15,0.25\n") != std::string::npos);

    std::string svg = slurp(dir / "toy_rmse.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find(">alm</text>") != std::string::npos);
    CHECK(svg.find(">alc</text>") != std::string::npos);
    CHECK(svg.find("toy rmse") != std::string::npos);

    CHECK_THROWS_WITH_AS(emit_report({}, "toy", dir.string()), "no series to report",
                         ValidationError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("line chart validates series shapes") {
    auto dir = scratch_dir("ace_harness_svg");
    auto path = (dir / "chart.svg").string();

    CHECK_THROWS_WITH_AS(write_line_chart_svg(path, "t", "x", "y", {}),
                         "no series to plot", ValidationError);

    SvgSeries lop;
    lop.label = "lop";
    lop.x = {1.0, 2.0};
    lop.y = {1.0};
    CHECK_THROWS_WITH_AS(write_line_chart_svg(path, "t", "x", "y", {lop}),
                         "series 'lop' has inconsistent lengths", ValidationError);

    SvgSeries band;
    band.label = "band";
    band.x = {1.0, 2.0};
    band.y = {1.0, 2.0};
    band.lo = {0.5};
    band.hi = {1.5, 2.5};
    CHECK_THROWS_WITH_AS(write_line_chart_svg(path, "t", "x", "y", {band}),
                         "series 'band' band lengths differ", ValidationError);

    band.lo = {0.5, 1.5};
    CHECK_NOTHROW(write_line_chart_svg(path, "t", "x", "y", {band}));
    std::string svg = slurp(path);
    CHECK(svg.find("<polygon") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    std::filesystem::remove_all(dir);
}

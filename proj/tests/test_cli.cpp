#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ace/chat.hpp"
#include "ace/errors.hpp"
#include "ace/http.hpp"
#include "ace/oracle.hpp"
#include "ace/records.hpp"

using namespace ace;

namespace {

struct CliResult {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(ACE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[512];
    while (size_t n = fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, n);
    int status = pclose(pipe);
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

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

size_t line_count(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

void write_embeddings_csv(const std::filesystem::path& path, int n, int d) {
    std::ofstream out(path);
    out << "id";
    for (int j = 0; j < d; ++j) out << ",e" << j;
    out << "\n";
    for (int i = 0; i < n; ++i) {
        out << "cap" << i;
        for (int j = 0; j < d; ++j) out << "," << (0.1 * (i + 1) * (j + 2));
        out << "\n";
    }
}

void write_score_fixture(const std::filesystem::path& dir, int n) {
    std::ofstream scores(dir / "scores.csv");
    scores << "capability_id,score\n";
    std::ofstream latent(dir / "latent.csv");
    latent << "id,z0,z1\n";
    for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(i) / (n - 1);
        scores << "cap" << i << "," << 0.2 + 0.6 * x << "\n";
        latent << "cap" << i << "," << x << "," << (i % 3) * 0.1 << "\n";
    }
}

const std::string kFixtures = std::string(ACE_SOURCE_DIR) + "/tests/fixtures/pipeline";

}  // namespace

TEST_CASE("capability jsonl survives a round trip") {
    auto dir = scratch_dir("ace_cli_records");
    auto path = (dir / "caps.jsonl").string();

    CapabilityRecord full;
    full.id = "modular arithmetic";
    full.name = "Modular Arithmetic";
    full.area = "Algebra";
    full.domain = "Mathematics";
    full.description = "Residue computations.";
    full.class_source = "class ModularArithmetic(Task): pass";
    full.embedding = Eigen::Vector3d(0.25, -1.0, 2.0);
    full.latent = Eigen::Vector2d(1.5, -0.5);
    full.score = 0.75;

    CapabilityRecord bare;
    bare.id = "logic";
    bare.name = "logic";
    bare.area = "Logic";
    bare.description = "Propositional proofs.";

    write_capabilities_jsonl({full, bare}, path);
    auto back = read_capabilities_jsonl(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == full.id);
    CHECK(back[0].name == full.name);
    CHECK(back[0].area == full.area);
    CHECK(back[0].domain == full.domain);
    CHECK(back[0].description == full.description);
    CHECK(back[0].class_source == full.class_source);
    REQUIRE(back[0].embedding.has_value());
    CHECK(back[0].embedding->isApprox(*full.embedding));
    REQUIRE(back[0].latent.has_value());
    CHECK(back[0].latent->isApprox(*full.latent));
    CHECK(back[0].score == 0.75);
    CHECK_FALSE(back[1].embedding.has_value());
    CHECK_FALSE(back[1].score.has_value());

    // id defaults to the lowercased name when absent
    std::ofstream(path) << R"({"name": "Chain Rule", "area": "Calculus", "description": "d"})"
                        << "\n";
    CHECK(read_capabilities_jsonl(path)[0].id == "chain rule");

    std::ofstream(path) << R"({"name": "a", "area": "A", "description": "d"})" << "\n"
                        << "{broken\n";
    CHECK_THROWS_WITH_AS(read_capabilities_jsonl(path),
                         doctest::Contains((path + ":2:").c_str()), ParseError);

    std::ofstream(path) << R"({"name": "a", "area": "A", "description": "d"})" << "\n"
                        << R"({"name": "a", "area": "A", "description": "d"})" << "\n";
    CHECK_THROWS_WITH_AS(read_capabilities_jsonl(path), "duplicate capability id 'a'",
                         ValidationError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("task jsonl survives a round trip and rejects empty problems") {
    auto dir = scratch_dir("ace_cli_tasks");
    auto path = (dir / "tasks.jsonl").string();

    TaskRecord t;
    t.id = "logic:1";
    t.capability_id = "logic";
    t.problem = "Prove p -> p.";
    t.solution = "trivial";
    t.verified = true;
    write_tasks_jsonl({t}, path);
    auto back = read_tasks_jsonl(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == t.id);
    CHECK(back[0].capability_id == t.capability_id);
    CHECK(back[0].problem == t.problem);
    CHECK(back[0].solution == t.solution);
    CHECK(back[0].verified);

    std::ofstream(path) << R"({"id": "x", "capability_id": "c", "problem": ""})" << "\n";
    CHECK_THROWS_AS(read_tasks_jsonl(path), ValidationError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("retries back off and give up with the last status") {
    ScriptedTransport transport;
    transport.enqueue(500, "upstream hiccup");
    transport.enqueue(503, "");
    transport.enqueue(200, "{\"ok\":true}");

    EndpointConfig config;
    config.backoff_initial_s = 0.25;
    config.backoff_factor = 3.0;
    std::vector<double> sleeps;
    HttpResponse res = post_with_retries(transport, config, "/v1/x", "{}",
                                         [&](double s) { sleeps.push_back(s); });
    CHECK(res.status == 200);
    CHECK(res.body == "{\"ok\":true}");
    CHECK(sleeps == std::vector<double>{0.25, 0.75});
    CHECK(transport.requests().size() == 3);

    ScriptedTransport failing;
    for (int i = 0; i < 3; ++i) failing.enqueue(500, "bad gateway");
    CHECK_THROWS_WITH_AS(
        post_with_retries(failing, config, "/v1/x", "{}", [](double) {}),
        doctest::Contains("request to /v1/x failed after 3 attempts (status 500): "
                          "bad gateway"),
        HttpError);
}

TEST_CASE("authorization header follows the configured environment variable") {
    EndpointConfig config;
    config.api_key_env = "ACE_CLI_TEST_KEY";
    unsetenv("ACE_CLI_TEST_KEY");
    CHECK(api_key_from_env(config).empty());

    ScriptedTransport transport;
    transport.enqueue(200, "ok");
    post_with_retries(transport, config, "/p", "{}", [](double) {});
    CHECK(transport.requests()[0].headers.count("Authorization") == 0);

    setenv("ACE_CLI_TEST_KEY", "sekret", 1);
    ScriptedTransport keyed;
    keyed.enqueue(200, "ok");
    post_with_retries(keyed, config, "/p", "{}", [](double) {});
    CHECK(keyed.requests()[0].headers.at("Authorization") == "Bearer sekret");
    unsetenv("ACE_CLI_TEST_KEY");
}

TEST_CASE("live chat transport builds the completion request and parses the reply") {
    auto transport = std::make_shared<ScriptedTransport>();
    nlohmann::json reply{{"choices", {{{"message", {{"content", "THOUGHT: hi"}}}}}}};
    transport->enqueue(200, reply.dump());

    EndpointConfig config;
    config.model = "scientist-1";
    LiveChatTransport chat(transport, config);
    CHECK(chat.complete("area_gen", "be brief", "list areas") == "THOUGHT: hi");

    auto body = nlohmann::json::parse(transport->requests()[0].body);
    CHECK(transport->requests()[0].path == "/v1/chat/completions");
    CHECK(body["model"] == "scientist-1");
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "be brief");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == "list areas");

    transport->enqueue(200, "{\"unexpected\": 1}");
    CHECK_THROWS_WITH_AS(chat.complete("area_gen", "", "x"),
                         doctest::Contains("chat response not in expected shape"),
                         ParseError);
}

TEST_CASE("rate limiter needs a positive rate and honors its burst") {
    CHECK_THROWS_WITH_AS(RateLimiter(0.0), "rate must be positive", ConfigError);
    RateLimiter limiter(1000.0, 2.0);
    limiter.acquire();
    limiter.acquire();  // burst capacity, no sleep
}

TEST_CASE("cli reports verification metrics with fixed precision") {
    auto full = run_cli("verify-metrics --tp 158 --fn 14 --fp 1 --tn 7");
    CHECK(full.code == 0);
    CHECK(full.output == "precision 0.9937 recall 0.9186 accuracy 0.9167\n");

    auto degenerate = run_cli("verify-metrics --tp 0 --fn 0 --fp 0 --tn 5");
    CHECK(degenerate.code == 0);
    CHECK(degenerate.output == "precision undefined recall undefined accuracy 1.0000\n");

    CHECK(run_cli("verify-metrics --tp 1 --fn 1 --fp 1").code == 2);
}

TEST_CASE("cli exits 2 on usage errors and 0 on help") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    auto help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(help.output.find("Active capability elicitation toolkit") != std::string::npos);
}

TEST_CASE("cli reduce is deterministic for both methods") {
    auto dir = scratch_dir("ace_cli_reduce");
    write_embeddings_csv(dir / "emb.csv", 6, 4);
    std::string base = "reduce --embeddings " + (dir / "emb.csv").string();

    auto a = run_cli(base + " --method pca --dim 2 --output " + (dir / "p1.csv").string());
    auto b = run_cli(base + " --method pca --dim 2 --output " + (dir / "p2.csv").string());
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.output.find("wrote 6 latent points") != std::string::npos);
    std::string p1 = slurp(dir / "p1.csv");
    CHECK(p1 == slurp(dir / "p2.csv"));
    CHECK(p1.rfind("id,z0,z1\n", 0) == 0);

    std::string tsne = base + " --method tsne --dim 2 --perplexity 1 --iterations 250";
    REQUIRE(run_cli(tsne + " --seed 3 --output " + (dir / "t1.csv").string()).code == 0);
    REQUIRE(run_cli(tsne + " --seed 3 --output " + (dir / "t2.csv").string()).code == 0);
    REQUIRE(run_cli(tsne + " --seed 4 --output " + (dir / "t3.csv").string()).code == 0);
    CHECK(slurp(dir / "t1.csv") == slurp(dir / "t2.csv"));
    CHECK(slurp(dir / "t1.csv") != slurp(dir / "t3.csv"));

    auto bad = run_cli(base + " --method umap --output " + (dir / "u.csv").string());
    CHECK(bad.code == 2);
    CHECK(bad.output.find("unknown method 'umap' (valid: pca, tsne)") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli embed copies vectors from a file and rejects ambiguous sources") {
    auto dir = scratch_dir("ace_cli_embed");
    CapabilityRecord a, b;
    a.id = "alpha";
    a.name = "alpha";
    a.area = "A";
    a.description = "first";
    b.id = "beta";
    b.name = "beta";
    b.area = "B";
    b.description = "second";
    write_capabilities_jsonl({a, b}, (dir / "caps.jsonl").string());
    std::ofstream(dir / "emb.csv") << "id,e0,e1\nalpha,1,0\nbeta,0.5,0.5\n";

    std::string base = "embed --input " + (dir / "caps.jsonl").string() + " --output " +
                       (dir / "out.csv").string();
    auto ok = run_cli(base + " --from-file " + (dir / "emb.csv").string());
    CHECK(ok.code == 0);
    CHECK(ok.output.find("wrote 2 embeddings") != std::string::npos);
    std::string csv = slurp(dir / "out.csv");
    CHECK(csv.rfind("id,e0,e1\n", 0) == 0);
    CHECK(csv.find("alpha,1,0") != std::string::npos);
    CHECK(csv.find("beta,0.5,0.5") != std::string::npos);

    auto both = run_cli(base + " --from-file " + (dir / "emb.csv").string() +
                        " --endpoint http://x");
    CHECK(both.code == 2);
    CHECK(both.output.find("mutually exclusive") != std::string::npos);
    auto neither = run_cli(base);
    CHECK(neither.code == 2);
    CHECK(neither.output.find("one of --endpoint or --from-file is required") !=
          std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli run-al writes a reproducible trace") {
    auto dir = scratch_dir("ace_cli_runal");
    write_score_fixture(dir, 12);
    std::string base = "run-al --scores " + (dir / "scores.csv").string() + " --latent " +
                       (dir / "latent.csv").string() +
                       " --acquisition alc --budget 6 --seed 5";

    auto first = run_cli(base + " --out " + (dir / "r1").string());
    REQUIRE(first.code == 0);
    CHECK(first.output.find("wrote 4 trace records") != std::string::npos);
    std::string trace = slurp(dir / "r1" / "trace.csv");
    CHECK(trace.rfind("iteration,selected_id,acquisition_score,observed_score,", 0) == 0);
    CHECK(line_count(trace) == 5);  // header + one row per step after the 2 seeds

    auto second = run_cli(base + " --out " + (dir / "r2").string());
    REQUIRE(second.code == 0);
    CHECK(trace == slurp(dir / "r2" / "trace.csv"));

    CHECK(run_cli(base + " --budget 1").code == 2);
    auto missing = run_cli("run-al --budget 6");
    CHECK(missing.code == 2);
    CHECK(missing.output.find("--scores and --latent are required") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli run-al with repetitions emits the aggregate report") {
    auto dir = scratch_dir("ace_cli_runal_reps");
    write_score_fixture(dir, 12);
    auto res = run_cli("run-al --scores " + (dir / "scores.csv").string() + " --latent " +
                       (dir / "latent.csv").string() +
                       " --reps 2 --test-split 0.5 --budget 4 --seed 1 --jobs 1 --out " +
                       (dir / "rep").string());
    REQUIRE(res.code == 0);
    CHECK(res.output.find("alm: final rmse") != std::string::npos);
    CHECK(res.output.find("alc: final rmse") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "rep" / "capability_alm.csv"));
    CHECK(std::filesystem::exists(dir / "rep" / "capability_alc.csv"));
    CHECK(std::filesystem::exists(dir / "rep" / "capability_rmse.svg"));
    CHECK(std::filesystem::exists(dir / "rep" / "capability_std.svg"));
    // budget 4 minus 2 seeds leaves 2 recorded iterations
    CHECK(line_count(slurp(dir / "rep" / "capability_alm.csv")) == 3);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli run-toy is reproducible and honors config files") {
    auto dir = scratch_dir("ace_cli_runtoy");
    std::string base =
        "run-toy --reps 2 --candidates 6 --test-points 5 --acquisition alm "
        "--seed 3 --jobs 1";
    auto a = run_cli(base + " --out " + (dir / "t1").string());
    auto b = run_cli(base + " --out " + (dir / "t2").string());
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.output.find("alm: final rmse") != std::string::npos);
    CHECK(slurp(dir / "t1" / "toy_alm.csv") == slurp(dir / "t2" / "toy_alm.csv"));
    CHECK(std::filesystem::exists(dir / "t1" / "toy_rmse.svg"));
    CHECK(std::filesystem::exists(dir / "t1" / "toy_std.svg"));

    std::ofstream(dir / "config.json") << R"({
        "repetitions": 2,
        "acquisitions": ["alm"],
        "toy": {"num_candidates": 7, "test_points": 9, "noise_std": 0.05},
        "base_rng_seed": 4
    })";
    auto c = run_cli("run-toy --config " + (dir / "config.json").string() +
                     " --jobs 1 --out " + (dir / "t3").string());
    REQUIRE(c.code == 0);
    // 7 candidates minus 2 seeds: the config file controls the pool size
    CHECK(line_count(slurp(dir / "t3" / "toy_alm.csv")) == 6);

    auto bad = run_cli("run-toy --config " + (dir / "missing.json").string());
    CHECK(bad.code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli gen drives the pipeline from fixture transcripts") {
    auto dir = scratch_dir("ace_cli_gen");

    auto areas = run_cli("gen areas --domain Mathematics --num-areas 3 "
                         "--caps-per-area 8 --transport mock --fixtures " +
                         kFixtures + "/areas_ok --out " + (dir / "areas.jsonl").string());
    REQUIRE(areas.code == 0);
    CHECK(areas.output.find("wrote 3 areas") != std::string::npos);
    std::istringstream lines(slurp(dir / "areas.jsonl"));
    std::string line;
    std::vector<std::string> names;
    while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        names.push_back(j.at("area").get<std::string>());
    }
    CHECK(names == std::vector<std::string>{"Algebra", "Geometry and Trigonometry",
                                            "Probability and Statistics"});

    auto caps = run_cli("gen capabilities --area \"Modular Arithmetic\" --count 2 "
                        "--transport mock --fixtures " +
                        kFixtures + "/caps_ok --out " + (dir / "caps.jsonl").string());
    REQUIRE(caps.code == 0);
    CHECK(caps.output.find("wrote 2 capabilities") != std::string::npos);
    auto records = read_capabilities_jsonl((dir / "caps.jsonl").string());
    REQUIRE(records.size() == 2);
    CHECK(records[0].id == "chinese remainder theorem");
    CHECK(records[1].id == "quadratic residues");
    CHECK_FALSE(records[0].class_source.empty());

    auto tasks = run_cli("gen tasks --capabilities " + (dir / "caps.jsonl").string() +
                         " --capability \"chinese remainder theorem\" --count 3 "
                         "--transport mock --fixtures " +
                         kFixtures + "/tasks_ok --out " + (dir / "tasks.jsonl").string());
    REQUIRE(tasks.code == 0);
    CHECK(tasks.output.find("wrote 3 tasks") != std::string::npos);
    auto task_records = read_tasks_jsonl((dir / "tasks.jsonl").string());
    REQUIRE(task_records.size() == 3);
    CHECK(task_records[0].id == "chinese remainder theorem:1");
    CHECK(task_records[0].capability_id == "chinese remainder theorem");
    CHECK_FALSE(task_records[0].verified);

    auto unknown = run_cli("gen tasks --capabilities " + (dir / "caps.jsonl").string() +
                           " --capability nope --transport mock --fixtures " +
                           kFixtures + "/tasks_ok --out " + (dir / "x.jsonl").string());
    CHECK(unknown.code == 1);
    CHECK(unknown.output.find("no capability 'nope'") != std::string::npos);

    auto no_fixtures = run_cli("gen areas --transport mock --out " +
                               (dir / "y.jsonl").string());
    CHECK(no_fixtures.code == 2);
    CHECK(no_fixtures.output.find("mock transport needs --fixtures DIR") !=
          std::string::npos);

    std::filesystem::remove_all(dir);
}

TEST_CASE("cli gen live transport requires an api key") {
    std::string cmd = std::string("env -u ACE_API_KEY ") + ACE_CLI_PATH +
                      " gen areas --transport live --endpoint http://localhost:1 "
                      "--out /tmp/ace_cli_unused.jsonl 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[256];
    while (size_t n = fread(buf, 1, sizeof(buf), pipe)) output.append(buf, n);
    int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(output.find("live transport requires the ACE_API_KEY environment variable") !=
          std::string::npos);
}

TEST_CASE("shipped score fixture drives the full csv flow") {
    const std::string data = std::string(ACE_SOURCE_DIR) + "/data/fixtures";
    auto scores = TableOracle::from_csv(data + "/o3_mini_scores.csv").scores();
    REQUIRE(scores.size() == 78);
    CHECK(scores.at("abstract algebra") == 0.97);
    CHECK(scores.at("stirling numbers second kind") == 0.17);
    for (const auto& [id, s] : scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }

    auto records = read_capabilities_jsonl(data + "/capabilities_math.jsonl");
    REQUIRE(records.size() == 78);
    for (const auto& r : records) CHECK(scores.count(r.id) == 1);

    auto dir = scratch_dir("ace_cli_shipped");
    auto reduced = run_cli("reduce --embeddings " + data +
                           "/embeddings_math.csv --method pca --dim 2 --output " +
                           (dir / "latent.csv").string());
    REQUIRE(reduced.code == 0);
    CHECK(reduced.output.find("wrote 78 latent points") != std::string::npos);

    auto al = run_cli("run-al --scores " + data + "/o3_mini_scores.csv --latent " +
                      (dir / "latent.csv").string() +
                      " --acquisition alc --budget 10 --seed 7 --out " +
                      (dir / "al").string());
    REQUIRE(al.code == 0);
    CHECK(al.output.find("wrote 8 trace records") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli similarity writes the labeled square matrix") {
    auto dir = scratch_dir("ace_cli_sim");
    std::ofstream(dir / "emb.csv") << "id,e0,e1\na,1,0\nb,0,1\nc,1,0\n";
    auto res = run_cli("similarity --embeddings " + (dir / "emb.csv").string() +
                       " --output " + (dir / "sim.csv").string());
    REQUIRE(res.code == 0);
    CHECK(res.output.find("wrote 3x3 similarity matrix") != std::string::npos);
    std::string csv = slurp(dir / "sim.csv");
    CHECK(csv.rfind("id,a,b,c\n", 0) == 0);
    CHECK(csv.find("a,1,0,1\n") != std::string::npos);
    CHECK(csv.find("b,0,1,0\n") != std::string::npos);
    std::filesystem::remove_all(dir);
}

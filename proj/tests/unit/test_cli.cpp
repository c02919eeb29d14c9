// Command surface: artifact layout, byte-determinism of split outputs,
// grid parsing, report aggregation, process exit codes.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dsn/cli.hpp"
#include "dsn/report.hpp"
#include "support/helpers.hpp"

using namespace dsn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    fs::path dir;
    Workspace() : dir(fs::temp_directory_path() / "dsn_cli_test") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string operator/(const std::string& p) const { return (dir / p).string(); }
};

ExperimentConfig mini_cfg(const std::string& data_dir) {
    ExperimentConfig cfg = dsn::test::tiny_config();
    cfg.data_dir = data_dir;
    cfg.max_epochs = 1;
    cfg.seeds = {0};
    cfg.batch = 32;
    return cfg;
}

}  // namespace

TEST_CASE("preprocess + split: artifacts exist and split output is byte-deterministic") {
    Workspace ws;
    SynthSpec spec;
    spec.nodes = 50;
    spec.events = 600;
    spec.days = 60;
    cli::cmd_synth(spec, ws / "raw.csv", {});
    cli::cmd_preprocess(ws / "raw.csv", "auto", ws / "data", "mini", {});
    CHECK(fs::exists(ws / "data/events.txt"));
    CHECK(fs::exists(ws / "data/manifest.txt"));
    CHECK(fs::exists(ws / "data/node_map.txt"));
    const DatasetManifest m = read_manifest(ws / "data/manifest.txt");
    CHECK(m.node_count == 50);
    CHECK(m.event_count == 600);
    // node map joins dense ids back to the originals
    auto map = read_node_map(ws / "data/node_map.txt");
    CHECK(map.size() == 50);

    cli::cmd_split(ws / "data", 0.1, 7, ws / "s1", {});
    cli::cmd_split(ws / "data", 0.1, 7, ws / "s2", {});
    CHECK(slurp(ws / "s1/split.txt") == slurp(ws / "s2/split.txt"));
    CHECK(slurp(ws / "s1/negatives.tsv") == slurp(ws / "s2/negatives.tsv"));
}

TEST_CASE("train + eval + report: run directory carries everything needed to reproduce") {
    Workspace ws;
    SynthSpec spec;
    spec.nodes = 40;
    spec.events = 500;
    spec.days = 50;
    cli::cmd_synth(spec, ws / "raw.csv", {});
    cli::cmd_preprocess(ws / "raw.csv", "auto", ws / "data", "mini", {});

    ExperimentConfig cfg = mini_cfg(ws / "data");
    cli::cmd_train(cfg, ws / "run", {});
    CHECK(fs::exists(ws / "run/config.txt"));
    CHECK(fs::exists(ws / "run/inputs.txt"));
    CHECK(fs::exists(ws / "run/results.csv"));
    CHECK(fs::exists(ws / "run/seed0/best.ckpt"));
    // the stored config resolves to the one we ran
    ExperimentConfig back = ExperimentConfig::from_file(ws / "run/config.txt");
    CHECK(back.to_text() == cfg.to_text());
    // inputs.txt records the source checksum and seeds
    const std::string inputs = slurp(ws / "run/inputs.txt");
    CHECK(inputs.find("source_checksum=") != std::string::npos);
    CHECK(inputs.find("seeds=0") != std::string::npos);

    cli::cmd_eval(cfg, ws / "run/seed0/best.ckpt", 0, "test_trans", ws / "m.txt", {});
    Metrics m = read_metrics_file(ws / "m.txt");
    CHECK(m.support() > 0);
    // matches the metrics the training run wrote for the same subset
    Metrics train_m = read_metrics_file(ws / "run/seed0/metrics_test_trans.txt");
    CHECK(m.to_text() == train_m.to_text());

    cli::cmd_report({ws / "run"}, ws / "agg", {});
    CHECK(fs::exists(ws / "agg/aggregate.csv"));

    // mean macro-f1 equals the hand average of per-seed values
    auto rows = read_results_csv(ws / "run/results.csv");
    double mean = 0;
    for (auto& r : rows) mean += r.test_hybrid.macro_f1;
    mean /= rows.size();
    RunReport rep;
    rep.per_seed = rows;
    CHECK(mean_over_seeds(rep, "test", "hybrid").macro_f1 == doctest::Approx(mean));
}

TEST_CASE("grid parsing and sweep selection") {
    auto grid = cli::parse_grid("lambda=0,0.1;walk_len=1,2");
    REQUIRE(grid.size() == 2);
    CHECK(grid[0].first == "lambda");
    CHECK(grid[0].second == std::vector<std::string>{"0", "0.1"});
    CHECK_THROWS_AS(cli::parse_grid(""), Error);
    CHECK_THROWS_AS(cli::parse_grid("lambda"), Error);

    Workspace ws;
    SynthSpec spec;
    spec.nodes = 30;
    spec.events = 400;
    spec.days = 40;
    cli::cmd_synth(spec, ws / "raw.csv", {});
    cli::cmd_preprocess(ws / "raw.csv", "auto", ws / "data", "mini", {});
    ExperimentConfig cfg = mini_cfg(ws / "data");
    cli::cmd_sweep(cfg, "lambda=0,0.1", ws / "sweep", {});
    CHECK(fs::exists(ws / "sweep/lambda=0/results.csv"));
    CHECK(fs::exists(ws / "sweep/lambda=0.1/results.csv"));
    CHECK(fs::exists(ws / "sweep/sweep.csv"));
    CHECK(fs::exists(ws / "sweep/best.txt"));
    const std::string sweep_rows = slurp(ws / "sweep/sweep.csv");
    CHECK(sweep_rows.find("lambda=0,") != std::string::npos);
    CHECK(sweep_rows.find("lambda=0.1,") != std::string::npos);

    // report over the two sweep points emits plot data for the varying key
    cli::cmd_report({ws / "sweep/lambda=0", ws / "sweep/lambda=0.1"}, ws / "agg", {});
    CHECK(fs::exists(ws / "agg/plot_lambda.csv"));
    const std::string plot = slurp(ws / "agg/plot_lambda.csv");
    CHECK(plot.find("lambda,phase,subset") != std::string::npos);
}

#ifdef DSN_CLI_BINARY
TEST_CASE("process exit codes: 0 success, 2 validation failure") {
    Workspace ws;
    const std::string bin = DSN_CLI_BINARY;
    const std::string ok = bin + " synth --out " + (ws / "x.csv") +
                           " --nodes 30 --events 200 --days 20 >/dev/null 2>&1";
    CHECK(std::system(ok.c_str()) == 0);
    const std::string bad =
        bin + " preprocess --input " + (ws / "missing.csv") + " --out " + (ws / "d") +
        " >/dev/null 2>&1";
    const int rc = std::system(bad.c_str());
    CHECK(WEXITSTATUS(rc) == 2);
}
#endif

// dsn: dynamic signed network edge prediction toolchain.
//
// Subcommands: preprocess, split, train, eval, report, sweep, synth.
// Exit codes: 0 success, 2 validation failure, 3 invariant violation.

#include <CLI11.hpp>
#include <cstdio>

#include "dsn/cli.hpp"
#include "dsn/common.hpp"

namespace {

void log_stdout(const std::string& s) {
    std::printf("%s\n", s.c_str());
    std::fflush(stdout);
}

dsn::ExperimentConfig load_config(const std::string& path,
                                  const std::vector<std::string>& overrides) {
    dsn::ExperimentConfig cfg = path.empty() ? dsn::ExperimentConfig{}
                                             : dsn::ExperimentConfig::from_file(path);
    // environment overrides are honored for paths only
    if (const char* env = std::getenv("DSN_DATA_DIR")) cfg.data_dir = env;
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw dsn::validation_error("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic signed network edge prediction"};
    app.require_subcommand(1);

    // preprocess
    std::string in_path, out_dir, format = "auto", name;
    auto* pre = app.add_subcommand("preprocess", "ingest a raw event file");
    pre->add_option("--input", in_path, "delimited text: src,dst,time,sign[,weight]")
        ->required();
    pre->add_option("--out", out_dir, "output directory")->required();
    pre->add_option("--format", format, "auto|header|headerless");
    pre->add_option("--name", name, "dataset name for the manifest");

    // split
    std::string split_data, split_out;
    double mask_ratio = 0.1;
    uint64_t split_seed = 0;
    auto* spl = app.add_subcommand("split", "chronological split + masked nodes + negatives");
    spl->add_option("--data", split_data, "preprocessed dataset directory")->required();
    spl->add_option("--out", split_out, "output directory")->required();
    spl->add_option("--ratio", mask_ratio, "masked-node ratio (default 0.1)");
    spl->add_option("--seed", split_seed, "sampling seed");

    // train
    std::string cfg_path, run_dir;
    std::vector<std::string> overrides;
    auto* trn = app.add_subcommand("train", "multi-seed training run");
    trn->add_option("--config", cfg_path, "config file (key=value)");
    trn->add_option("--out", run_dir, "run directory")->required();
    trn->add_option("--set", overrides, "config overrides key=value")->take_all();

    // eval
    std::string eval_cfg, eval_ckpt, eval_subset = "test_hybrid", eval_out;
    int eval_seed = 0;
    std::vector<std::string> eval_overrides;
    auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on one subset");
    evl->add_option("--config", eval_cfg, "config file");
    evl->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    evl->add_option("--seed", eval_seed, "split seed the checkpoint was trained under");
    evl->add_option("--subset", eval_subset, "val|test_hybrid|test_trans|test_induc");
    evl->add_option("--out", eval_out, "metrics output file")->required();
    evl->add_option("--set", eval_overrides, "config overrides")->take_all();

    // report
    std::vector<std::string> report_dirs;
    std::string report_out;
    auto* rep = app.add_subcommand("report", "aggregate run directories");
    rep->add_option("runs", report_dirs, "run directories")->required();
    rep->add_option("--out", report_out, "output directory")->required();

    // sweep
    std::string sweep_cfg, sweep_grid, sweep_out;
    std::vector<std::string> sweep_overrides;
    auto* swp = app.add_subcommand("sweep", "cartesian grid over config keys");
    swp->add_option("--config", sweep_cfg, "base config file");
    swp->add_option("--grid", sweep_grid, "e.g. lambda=0,0.1;walk_len=1,2")->required();
    swp->add_option("--out", sweep_out, "sweep directory")->required();
    swp->add_option("--set", sweep_overrides, "config overrides")->take_all();

    // synth
    dsn::SynthSpec synth;
    std::string synth_out;
    auto* syn = app.add_subcommand("synth", "generate a synthetic signed event stream");
    syn->add_option("--out", synth_out, "output csv")->required();
    syn->add_option("--nodes", synth.nodes, "node count");
    syn->add_option("--events", synth.events, "event count");
    syn->add_option("--days", synth.days, "unique timestamp count");
    syn->add_option("--neg-fraction", synth.neg_fraction, "target share of -1 events");
    syn->add_option("--seed", synth.seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) dsn::cli::cmd_preprocess(in_path, format, out_dir, name, log_stdout);
        else if (spl->parsed())
            dsn::cli::cmd_split(split_data, mask_ratio, split_seed, split_out, log_stdout);
        else if (trn->parsed())
            dsn::cli::cmd_train(load_config(cfg_path, overrides), run_dir, log_stdout);
        else if (evl->parsed())
            dsn::cli::cmd_eval(load_config(eval_cfg, eval_overrides), eval_ckpt, eval_seed,
                               eval_subset, eval_out, log_stdout);
        else if (rep->parsed()) dsn::cli::cmd_report(report_dirs, report_out, log_stdout);
        else if (swp->parsed())
            dsn::cli::cmd_sweep(load_config(sweep_cfg, sweep_overrides), sweep_grid, sweep_out,
                                log_stdout);
        else if (syn->parsed()) dsn::cli::cmd_synth(synth, synth_out, log_stdout);
    } catch (const dsn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == dsn::ErrorKind::Validation ? 2 : 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}

#include "dsn/cli.hpp"

#include <filesystem>
#include <fstream>

#include "dsn/pipeline.hpp"

namespace dsn::cli {

namespace fs = std::filesystem;

namespace {

void log_line(const LogFn& log, const std::string& s) {
    if (log) log(s);
}

struct LoadedData {
    EventStream events;
    DatasetManifest manifest;
};

LoadedData load_dataset(const std::string& data_dir) {
    LoadedData d;
    d.events = read_events_file(data_dir + "/events.txt");
    d.manifest = read_manifest(data_dir + "/manifest.txt");
    if (static_cast<int64_t>(d.events.size()) != d.manifest.event_count)
        throw validation_error("dataset dir inconsistent: event count mismatch in " + data_dir);
    return d;
}

template <class T>
RunReport run_cfg(const ExperimentConfig& cfg, const LoadedData& data,
                  const std::string& out_dir, const LogFn& log) {
    return run_experiment<T>(cfg, data.events, data.manifest, out_dir,
                             [&](const std::string& s) { log_line(log, s); });
}

RunReport run_any_precision(const ExperimentConfig& cfg, const LoadedData& data,
                            const std::string& out_dir, const LogFn& log) {
    if (cfg.precision == "f64") return run_cfg<double>(cfg, data, out_dir, log);
    return run_cfg<float>(cfg, data, out_dir, log);
}

}  // namespace

void cmd_preprocess(const std::string& input, const std::string& format,
                    const std::string& out_dir, const std::string& dataset_name,
                    const LogFn& log) {
    IngestFormat fmt = IngestFormat::Auto;
    if (format == "header") fmt = IngestFormat::CsvWithHeader;
    else if (format == "headerless") fmt = IngestFormat::CsvHeaderless;
    else if (format != "auto") throw validation_error("unknown format: " + format);

    IngestResult r = ingest_events(input, fmt, dataset_name);
    fs::create_directories(out_dir);
    write_events_file(out_dir + "/events.txt", r.events);
    write_manifest(out_dir + "/manifest.txt", r.manifest);
    write_node_map(out_dir + "/node_map.txt", r.node_id_map, r.manifest.source_checksum);
    log_line(log, "ingested " + std::to_string(r.manifest.event_count) + " events, " +
                      std::to_string(r.manifest.node_count) + " nodes (sign encoding " +
                      r.manifest.sign_encoding + ")");
}

void cmd_split(const std::string& data_dir, double mask_ratio, uint64_t seed,
               const std::string& out_dir, const LogFn& log) {
    LoadedData d = load_dataset(data_dir);
    const auto cutoffs = chronological_split(d.events);
    auto masked = sample_masked_nodes(d.events, cutoffs.first, d.manifest.node_count,
                                      mask_ratio, seed);
    const SplitSpec split = apply_mask(d.events, cutoffs, std::move(masked), seed, mask_ratio);
    std::vector<SignedEvent> eval_events;
    for (const SignedEvent& e : d.events)
        if (e.time >= split.train_cutoff) eval_events.push_back(e);
    const EvalNegatives negs =
        generate_eval_negatives(eval_events, eval_node_set(d.events, split), seed);

    fs::create_directories(out_dir);
    write_split_file(out_dir + "/split.txt", split, d.manifest.source_checksum);
    write_negatives_file(out_dir + "/negatives.tsv", negs, d.manifest.source_checksum);
    log_line(log, "split: train " + std::to_string(split.train_ids.size()) + " val " +
                      std::to_string(split.val_ids.size()) + " test " +
                      std::to_string(split.test_ids.size()) + " (trans " +
                      std::to_string(split.trans_test_ids.size()) + ", induc " +
                      std::to_string(split.induc_test_ids.size()) + "), masked " +
                      std::to_string(split.masked_nodes.size()));
}

void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir, const LogFn& log) {
    cfg.validate();
    if (cfg.data_dir.empty()) throw validation_error("config: data_dir is required for train");
    LoadedData d = load_dataset(cfg.data_dir);
    const RunReport report = run_any_precision(cfg, d, out_dir, log);
    for (const char* subset : {"hybrid", "trans", "induc"}) {
        const SubsetMean m = mean_over_seeds(report, "test", subset);
        log_line(log, std::string("mean test ") + subset + " macro_f1 " +
                          std::to_string(m.macro_f1));
    }
}

void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint, int seed,
              const std::string& subset, const std::string& out_path, const LogFn& log) {
    cfg.validate();
    LoadedData d = load_dataset(cfg.data_dir);
    EvalSubset s;
    if (subset == "val") s = EvalSubset::Val;
    else if (subset == "test_hybrid") s = EvalSubset::TestHybrid;
    else if (subset == "test_trans") s = EvalSubset::TestTrans;
    else if (subset == "test_induc") s = EvalSubset::TestInduc;
    else throw validation_error("unknown subset: " + subset);

    const auto run_seed = static_cast<uint64_t>(seed);
    const auto cutoffs = chronological_split(d.events);
    auto masked = sample_masked_nodes(d.events, cutoffs.first, d.manifest.node_count,
                                      cfg.mask_ratio, run_seed);
    const SplitSpec split =
        apply_mask(d.events, cutoffs, std::move(masked), run_seed, cfg.mask_ratio);
    std::vector<SignedEvent> eval_events;
    for (const SignedEvent& e : d.events)
        if (e.time >= split.train_cutoff) eval_events.push_back(e);
    const EvalNegatives negs =
        generate_eval_negatives(eval_events, eval_node_set(d.events, split), run_seed);

    Metrics m;
    if (cfg.precision == "f64") {
        Trainer<double> tr(cfg, d.events, split, d.manifest.node_count, run_seed);
        num::load_checkpoint(checkpoint, tr.model().params());
        m = tr.evaluate(s, negs);
    } else {
        Trainer<float> tr(cfg, d.events, split, d.manifest.node_count, run_seed);
        num::load_checkpoint(checkpoint, tr.model().params());
        m = tr.evaluate(s, negs);
    }
    write_metrics_file(out_path, m);
    log_line(log, subset + ": accuracy " + std::to_string(m.accuracy) + " weighted_f1 " +
                      std::to_string(m.weighted_f1) + " macro_f1 " + std::to_string(m.macro_f1));
}

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
                const LogFn& log) {
    if (run_dirs.empty()) throw validation_error("report: need at least one run directory");
    std::vector<RunDirSummary> runs;
    for (const std::string& dir : run_dirs) runs.push_back(load_run_dir(dir));
    write_aggregate_report(out_dir, runs);
    log_line(log, "aggregated " + std::to_string(runs.size()) + " runs into " + out_dir);
}

std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid(
    const std::string& grid_spec) {
    std::vector<std::pair<std::string, std::vector<std::string>>> grid;
    std::stringstream ss(grid_spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw validation_error("grid: expected key=v1,v2 in '" + part + "'");
        std::vector<std::string> values;
        std::stringstream vs(part.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, ',')) values.push_back(v);
        if (values.empty()) throw validation_error("grid: no values for " + part.substr(0, eq));
        grid.push_back({part.substr(0, eq), values});
    }
    if (grid.empty()) throw validation_error("grid: empty specification");
    return grid;
}

void cmd_sweep(const ExperimentConfig& base, const std::string& grid_spec,
               const std::string& out_dir, const LogFn& log) {
    base.validate();
    const auto grid = parse_grid(grid_spec);
    LoadedData d = load_dataset(base.data_dir);
    fs::create_directories(out_dir);

    struct Point {
        std::string name;
        ExperimentConfig cfg;
        double val_macro_f1 = 0;
        double test_macro_f1 = 0;
    };
    std::vector<Point> points;
    std::vector<size_t> idx(grid.size(), 0);
    while (true) {
        Point p;
        p.cfg = base;
        for (size_t g = 0; g < grid.size(); ++g) {
            p.cfg.set(grid[g].first, grid[g].second[idx[g]]);
            if (g) p.name += "_";
            p.name += grid[g].first + "=" + grid[g].second[idx[g]];
        }
        p.cfg.validate();
        points.push_back(std::move(p));
        size_t g = 0;
        for (; g < grid.size(); ++g) {
            if (++idx[g] < grid[g].second.size()) break;
            idx[g] = 0;
        }
        if (g == grid.size()) break;
    }

    for (Point& p : points) {
        log_line(log, "sweep point " + p.name);
        const RunReport r = run_any_precision(p.cfg, d, out_dir + "/" + p.name, log);
        p.val_macro_f1 = mean_over_seeds(r, "val", "hybrid").macro_f1;
        p.test_macro_f1 = mean_over_seeds(r, "test", "hybrid").macro_f1;
    }

    const Point* best = &points.front();
    for (const Point& p : points)
        if (p.val_macro_f1 > best->val_macro_f1) best = &p;

    std::FILE* f = std::fopen((out_dir + "/sweep.csv").c_str(), "wb");
    if (!f) throw validation_error("cannot write sweep.csv");
    std::fprintf(f, "point,val_macro_f1,test_macro_f1,selected\n");
    for (const Point& p : points)
        std::fprintf(f, "%s,%.6f,%.6f,%d\n", p.name.c_str(), p.val_macro_f1, p.test_macro_f1,
                     &p == best ? 1 : 0);
    std::fclose(f);
    best->cfg.write_file(out_dir + "/best.txt");
    log_line(log, "best by validation macro_f1: " + best->name);
}

void cmd_synth(const SynthSpec& spec, const std::string& out_path, const LogFn& log) {
    write_synthetic_csv(out_path, spec);
    log_line(log, "wrote synthetic stream (" + std::to_string(spec.events) + " events, " +
                      std::to_string(spec.nodes) + " nodes) to " + out_path);
}

}  // namespace dsn::cli

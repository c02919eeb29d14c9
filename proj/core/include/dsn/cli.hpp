// Command implementations behind the `dsn` binary: preprocess, split,
// train, eval, report, sweep, synth. Each command validates its inputs,
// writes only into its output directory and reports failures through
// dsn::Error (validation -> exit 2, invariant -> exit 3).

#ifndef DSN_CLI_HPP
#define DSN_CLI_HPP

#include <functional>
#include <string>
#include <vector>

#include "dsn/config.hpp"
#include "dsn/synth.hpp"

namespace dsn::cli {

using LogFn = std::function<void(const std::string&)>;

/// Ingest a raw delimited file; writes events.txt, manifest.txt and
/// node_map.txt into out_dir.
void cmd_preprocess(const std::string& input, const std::string& format,
                    const std::string& out_dir, const std::string& dataset_name,
                    const LogFn& log);

/// Seeded split artifacts (split.txt + negatives.tsv) for a preprocessed
/// dataset directory.
void cmd_split(const std::string& data_dir, double mask_ratio, uint64_t seed,
               const std::string& out_dir, const LogFn& log);

/// Full multi-seed experiment per the config; run artifacts under out_dir.
void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir, const LogFn& log);

/// Re-evaluate a checkpoint on one subset; writes a metrics file.
void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint, int seed,
              const std::string& subset, const std::string& out_path, const LogFn& log);

/// Aggregate one or more run directories into mean tables and plot CSVs.
void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
                const LogFn& log);

/// Cartesian grid sweep; each point runs as a child run directory, the
/// winner by validation Macro-F1 is recorded in sweep.csv/best.txt.
void cmd_sweep(const ExperimentConfig& base, const std::string& grid_spec,
               const std::string& out_dir, const LogFn& log);

/// Deterministic synthetic dataset file (see SynthSpec).
void cmd_synth(const SynthSpec& spec, const std::string& out_path, const LogFn& log);

/// "key=v1,v2;key2=..." -> list of (key, values). Keys must be config keys.
std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid(
    const std::string& grid_spec);

}  // namespace dsn::cli

#endif  // DSN_CLI_HPP

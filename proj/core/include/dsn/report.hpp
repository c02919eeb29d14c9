// Run reports: per-seed, per-subset metrics, their seed means (arithmetic
// mean of metric values, never pooled confusions), and the CSV/plot-data
// emission used by the report and sweep commands.

#ifndef DSN_REPORT_HPP
#define DSN_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "dsn/metrics.hpp"

namespace dsn {

struct SeedResult {
    int seed = 0;
    int best_epoch = 0;
    int epochs_run = 0;
    double wall_seconds = 0;  // reported in report.txt only, never in metrics files
    Metrics val_hybrid, val_trans, val_induc;
    Metrics test_hybrid, test_trans, test_induc;
};

struct RunReport {
    std::string config_text;
    std::vector<SeedResult> per_seed;
};

struct SubsetMean {
    double accuracy = 0, weighted_f1 = 0, macro_f1 = 0;
};

/// Arithmetic mean over seeds of one (phase, subset) metric slice.
SubsetMean mean_over_seeds(const RunReport& report, const std::string& phase,
                           const std::string& subset);

const Metrics& select_metrics(const SeedResult& r, const std::string& phase,
                              const std::string& subset);

void write_results_csv(const std::string& path, const RunReport& report);
std::vector<SeedResult> read_results_csv(const std::string& path);
void write_report_text(const std::string& path, const RunReport& report);

/// Aggregation across run directories (each containing config.txt and
/// results.csv): a mean table per run plus, for every config key whose
/// value varies across runs, a plot-data CSV of metric means against that
/// key's values.
struct RunDirSummary {
    std::string dir;
    std::map<std::string, std::string> config;  // raw key=value pairs
    std::vector<SeedResult> seeds;
};

RunDirSummary load_run_dir(const std::string& dir);
void write_aggregate_report(const std::string& out_dir,
                            const std::vector<RunDirSummary>& runs);

}  // namespace dsn

#endif  // DSN_REPORT_HPP

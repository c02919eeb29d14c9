#include "dsn/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dsn {

namespace {
const char* kPhases[] = {"val", "test"};
const char* kSubsets[] = {"hybrid", "trans", "induc"};
}  // namespace

const Metrics& select_metrics(const SeedResult& r, const std::string& phase,
                              const std::string& subset) {
    if (phase == "val") {
        if (subset == "hybrid") return r.val_hybrid;
        if (subset == "trans") return r.val_trans;
        return r.val_induc;
    }
    if (subset == "hybrid") return r.test_hybrid;
    if (subset == "trans") return r.test_trans;
    return r.test_induc;
}

namespace {
Metrics& select_metrics_mut(SeedResult& r, const std::string& phase, const std::string& subset) {
    return const_cast<Metrics&>(select_metrics(r, phase, subset));
}
}  // namespace

SubsetMean mean_over_seeds(const RunReport& report, const std::string& phase,
                           const std::string& subset) {
    SubsetMean m;
    if (report.per_seed.empty()) return m;
    for (const SeedResult& r : report.per_seed) {
        const Metrics& x = select_metrics(r, phase, subset);
        m.accuracy += x.accuracy;
        m.weighted_f1 += x.weighted_f1;
        m.macro_f1 += x.macro_f1;
    }
    const double n = static_cast<double>(report.per_seed.size());
    m.accuracy /= n;
    m.weighted_f1 /= n;
    m.macro_f1 /= n;
    return m;
}

void write_results_csv(const std::string& path, const RunReport& report) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    std::fprintf(f, "seed,phase,subset,accuracy,weighted_f1,macro_f1,f1_pos,f1_neg,f1_nonedge,"
                    "best_epoch,epochs_run\n");
    for (const SeedResult& r : report.per_seed)
        for (const char* phase : kPhases)
            for (const char* subset : kSubsets) {
                const Metrics& m = select_metrics(r, phase, subset);
                std::fprintf(f, "%d,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.seed,
                             phase, subset, m.accuracy, m.weighted_f1, m.macro_f1, m.f1[0],
                             m.f1[1], m.f1[2], r.best_epoch, r.epochs_run);
            }
    std::fclose(f);
}

std::vector<SeedResult> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    std::vector<SeedResult> out;
    std::string line;
    std::getline(in, line);  // header
    auto find_or_add = [&](int seed) -> SeedResult& {
        for (auto& r : out)
            if (r.seed == seed) return r;
        out.emplace_back();
        out.back().seed = seed;
        return out.back();
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        if (cols.size() != 11) throw validation_error("results csv: malformed row in " + path);
        SeedResult& r = find_or_add(std::stoi(cols[0]));
        Metrics& m = select_metrics_mut(r, cols[1], cols[2]);
        m.accuracy = std::stod(cols[3]);
        m.weighted_f1 = std::stod(cols[4]);
        m.macro_f1 = std::stod(cols[5]);
        m.f1[0] = std::stod(cols[6]);
        m.f1[1] = std::stod(cols[7]);
        m.f1[2] = std::stod(cols[8]);
        r.best_epoch = std::stoi(cols[9]);
        r.epochs_run = std::stoi(cols[10]);
    }
    return out;
}

void write_report_text(const std::string& path, const RunReport& report) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    std::fprintf(f, "seeds=%zu\n", report.per_seed.size());
    for (const char* phase : kPhases)
        for (const char* subset : kSubsets) {
            const SubsetMean m = mean_over_seeds(report, phase, subset);
            std::fprintf(f, "mean_%s_%s_accuracy=%.6f\n", phase, subset, m.accuracy);
            std::fprintf(f, "mean_%s_%s_weighted_f1=%.6f\n", phase, subset, m.weighted_f1);
            std::fprintf(f, "mean_%s_%s_macro_f1=%.6f\n", phase, subset, m.macro_f1);
        }
    double wall = 0;
    for (const SeedResult& r : report.per_seed) wall += r.wall_seconds;
    std::fprintf(f, "total_wall_seconds=%.1f\n", wall);
    std::fclose(f);
}

RunDirSummary load_run_dir(const std::string& dir) {
    RunDirSummary s;
    s.dir = dir;
    std::ifstream cfg(dir + "/config.txt");
    if (!cfg) throw validation_error("run dir missing config.txt: " + dir);
    std::string line;
    while (std::getline(cfg, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) s.config[line.substr(0, eq)] = line.substr(eq + 1);
    }
    s.seeds = read_results_csv(dir + "/results.csv");
    return s;
}

void write_aggregate_report(const std::string& out_dir,
                            const std::vector<RunDirSummary>& runs) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::FILE* f = std::fopen((out_dir + "/aggregate.csv").c_str(), "wb");
        if (!f) throw validation_error("cannot write aggregate.csv");
        std::fprintf(f, "run,phase,subset,mean_accuracy,mean_weighted_f1,mean_macro_f1\n");
        for (const RunDirSummary& r : runs) {
            RunReport rep;
            rep.per_seed = r.seeds;
            for (const char* phase : kPhases)
                for (const char* subset : kSubsets) {
                    const SubsetMean m = mean_over_seeds(rep, phase, subset);
                    std::fprintf(f, "%s,%s,%s,%.6f,%.6f,%.6f\n", r.dir.c_str(), phase, subset,
                                 m.accuracy, m.weighted_f1, m.macro_f1);
                }
        }
        std::fclose(f);
    }

    // one plot-data csv per config key that varies across the given runs
    std::set<std::string> varying;
    if (runs.size() > 1) {
        for (const auto& [key, value] : runs.front().config)
            for (const RunDirSummary& r : runs) {
                auto it = r.config.find(key);
                if (it == r.config.end() || it->second != value) {
                    varying.insert(key);
                    break;
                }
            }
    }
    for (const std::string& key : varying) {
        std::FILE* f = std::fopen((out_dir + "/plot_" + key + ".csv").c_str(), "wb");
        if (!f) continue;
        std::fprintf(f, "%s,phase,subset,mean_macro_f1,mean_weighted_f1,mean_accuracy\n",
                     key.c_str());
        for (const RunDirSummary& r : runs) {
            RunReport rep;
            rep.per_seed = r.seeds;
            const auto it = r.config.find(key);
            const std::string val = it == r.config.end() ? "" : it->second;
            for (const char* phase : kPhases)
                for (const char* subset : kSubsets) {
                    const SubsetMean m = mean_over_seeds(rep, phase, subset);
                    std::fprintf(f, "%s,%s,%s,%.6f,%.6f,%.6f\n", val.c_str(), phase, subset,
                                 m.macro_f1, m.weighted_f1, m.accuracy);
                }
        }
        std::fclose(f);
    }
}

}  // namespace dsn

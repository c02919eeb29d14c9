// 3-class evaluation metrics from a confusion matrix: accuracy,
// per-class precision/recall/F1, Macro-F1 and Weighted-F1.

#ifndef DSN_METRICS_HPP
#define DSN_METRICS_HPP

#include <array>
#include <cstdint>
#include <string>

#include "dsn/events.hpp"

namespace dsn {

using Confusion = std::array<std::array<int64_t, kNumLabels>, kNumLabels>;  // [true][pred]

struct Metrics {
    double accuracy = 0;
    double weighted_f1 = 0;
    double macro_f1 = 0;
    std::array<double, kNumLabels> precision{};
    std::array<double, kNumLabels> recall{};
    std::array<double, kNumLabels> f1{};
    Confusion confusion{};

    int64_t support() const;
    std::string to_text() const;
};

/// Standard one-vs-rest derivation; every 0/0 yields 0. Macro-F1 is the
/// unweighted mean over the three classes (absent classes count as 0);
/// Weighted-F1 weights each class by its true-label frequency.
Metrics compute_metrics(const Confusion& confusion);

inline void add_outcome(Confusion& c, Label truth, Label pred) {
    ++c[static_cast<int>(truth)][static_cast<int>(pred)];
}

inline Confusion add_confusions(const Confusion& a, const Confusion& b) {
    Confusion out{};
    for (int i = 0; i < kNumLabels; ++i)
        for (int j = 0; j < kNumLabels; ++j) out[i][j] = a[i][j] + b[i][j];
    return out;
}

void write_metrics_file(const std::string& path, const Metrics& m);
Metrics read_metrics_file(const std::string& path);

}  // namespace dsn

#endif  // DSN_METRICS_HPP

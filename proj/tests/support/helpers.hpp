// Shared fixtures for the test suites: tiny configs, hand-built and
// random event streams, independent reference implementations used as
// oracles, and small statistics helpers.

#ifndef DSN_TESTS_HELPERS_HPP
#define DSN_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "dsn/config.hpp"
#include "dsn/events.hpp"
#include "dsn/metrics.hpp"
#include "dsn/tensor.hpp"

namespace dsn::test {

/// Small model dimensions so property suites and gradient checks stay fast.
inline ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.d_emb = 4;
    cfg.d_model = 8;
    cfg.d_time = 3;
    cfg.heads = 2;
    cfg.attn_layers = 2;
    cfg.ff_hidden = 8;
    cfg.msg_hidden = 8;
    cfg.time_hidden = 3;
    cfg.head_hidden1 = 8;
    cfg.head_hidden2 = 6;
    cfg.k_neighbors = 4;
    cfg.walks = 3;
    cfg.walk_len = 2;
    cfg.batch = 8;
    cfg.threads = 1;
    cfg.seeds = {0};
    return cfg;
}

inline SignedEvent ev(NodeId u, NodeId v, Time t, int s, StreamIndex idx, double w = 1.0) {
    return SignedEvent{u, v, t, s, w, idx};
}

/// Events sorted by (time, index); indices already unique and ordered.
inline EventStream make_stream(std::initializer_list<SignedEvent> events) {
    EventStream s(events);
    std::stable_sort(s.begin(), s.end(), [](const SignedEvent& a, const SignedEvent& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.stream_index < b.stream_index;
    });
    return s;
}

/// Random stream with tied timestamps to exercise micro-step handling.
inline EventStream random_stream(std::mt19937_64& rng, int nodes, int events, int max_day) {
    std::vector<double> times;
    for (int i = 0; i < events; ++i)
        times.push_back(static_cast<double>(rng() % static_cast<uint64_t>(max_day)));
    std::sort(times.begin(), times.end());
    EventStream s;
    for (int i = 0; i < events; ++i) {
        SignedEvent e;
        e.src = static_cast<NodeId>(rng() % nodes);
        do {
            e.dst = static_cast<NodeId>(rng() % nodes);
        } while (nodes > 1 && e.dst == e.src);
        e.time = times[i];
        e.sign = (rng() % 4 == 0) ? -1 : +1;
        e.weight = 1.0;
        e.stream_index = i;
        s.push_back(e);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Brute-force label lookup by linear scan (no sorting assumptions).
inline Label label_oracle(const EventStream& s, NodeId u, NodeId v, Time t) {
    bool pos = false, neg = false;
    for (const auto& e : s)
        if (e.src == u && e.dst == v && e.time == t) (e.sign > 0 ? pos : neg) = true;
    if (pos) return Label::Pos;
    if (neg) return Label::Neg;
    return Label::NonEdge;
}

/// Independent metrics computation, structured differently from the
/// library's (per-class loops over explicit tp/fp/fn counters).
struct OracleMetrics {
    double accuracy, weighted_f1, macro_f1;
    double f1[3];
};

inline OracleMetrics metrics_oracle(const Confusion& c) {
    OracleMetrics m{};
    double total = 0, correct = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            total += static_cast<double>(c[i][j]);
            if (i == j) correct += static_cast<double>(c[i][j]);
        }
    m.accuracy = total > 0 ? correct / total : 0;
    for (int k = 0; k < 3; ++k) {
        double tp = static_cast<double>(c[k][k]);
        double pred_k = 0, true_k = 0;
        for (int i = 0; i < 3; ++i) {
            pred_k += static_cast<double>(c[i][k]);
            true_k += static_cast<double>(c[k][i]);
        }
        const double prec = pred_k > 0 ? tp / pred_k : 0;
        const double rec = true_k > 0 ? tp / true_k : 0;
        m.f1[k] = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0;
        m.macro_f1 += m.f1[k] / 3.0;
        if (total > 0) m.weighted_f1 += m.f1[k] * (true_k / total);
    }
    return m;
}

/// Chi-square statistic for observed counts against uniform expectation.
inline double chi_square_uniform(const std::vector<int64_t>& counts) {
    int64_t n = 0;
    for (int64_t c : counts) n += c;
    const double expect = static_cast<double>(n) / counts.size();
    double stat = 0;
    for (int64_t c : counts) {
        const double d = c - expect;
        stat += d * d / expect;
    }
    return stat;
}

/// Total variation distance between an empirical distribution (counts)
/// and a target probability vector.
inline double tv_distance(const std::vector<int64_t>& counts, const std::vector<double>& target) {
    int64_t n = 0;
    for (int64_t c : counts) n += c;
    double tv = 0;
    for (size_t i = 0; i < counts.size(); ++i)
        tv += std::abs(static_cast<double>(counts[i]) / n - target[i]);
    return tv / 2;
}

// 0.99 quantiles of the chi-square distribution for small df (targets
// "p > 0.01": statistic below the quantile means no rejection).
inline double chi2_crit_99(int df) {
    static const double q[] = {0,      6.635,  9.210,  11.345, 13.277, 15.086, 16.812,
                               18.475, 20.090, 21.666, 23.209, 24.725, 26.217, 27.688,
                               29.141, 30.578, 32.000, 33.409, 34.805, 36.191, 37.566};
    return q[df];
}

}  // namespace dsn::test

#endif  // DSN_TESTS_HELPERS_HPP

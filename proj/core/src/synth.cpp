#include "dsn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace dsn {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draw an index from a cumulative weight table.
size_t draw_cum(const std::vector<double>& cum, std::mt19937_64& rng) {
    const double x = uniform01(rng) * cum.back();
    return static_cast<size_t>(std::lower_bound(cum.begin(), cum.end(), x) - cum.begin());
}

}  // namespace

EventStream generate_synthetic_stream(const SynthSpec& spec) {
    if (spec.nodes < 2 || spec.events < spec.nodes)
        throw validation_error("synthetic stream: need events >= nodes >= 2");
    std::mt19937_64 rng(mix64(spec.seed));
    const auto V = static_cast<size_t>(spec.nodes);
    const auto E = static_cast<size_t>(spec.events);

    // Per-node latent structure. Trust-network texture: most nodes are
    // trustworthy, a minority is not, and a small set flips mid-stream.
    const int communities = std::max<int>(2, static_cast<int>(std::sqrt(double(V)) / 3));
    std::vector<double> tau(V), harsh(V);
    std::vector<int> comm(V);
    std::vector<int64_t> flip_day(V, -1);
    for (size_t i = 0; i < V; ++i) {
        tau[i] = uniform01(rng) < 0.8 ? 0.75 + 0.25 * uniform01(rng) : 0.6 * uniform01(rng);
        harsh[i] = 0.12 * uniform01(rng);
        comm[i] = static_cast<int>(rng() % communities);
        if (uniform01(rng) < spec.flip_fraction)
            flip_day[i] = static_cast<int64_t>((0.3 + 0.6 * uniform01(rng)) * spec.days);
    }

    // Skewed activity/popularity over independent rank permutations.
    std::vector<size_t> act_rank(V), pop_rank(V);
    std::iota(act_rank.begin(), act_rank.end(), size_t{0});
    std::iota(pop_rank.begin(), pop_rank.end(), size_t{0});
    std::shuffle(act_rank.begin(), act_rank.end(), rng);
    std::shuffle(pop_rank.begin(), pop_rank.end(), rng);
    std::vector<double> act_cum(V), pop_w(V);
    std::vector<std::vector<double>> comm_cum(communities);
    std::vector<std::vector<size_t>> comm_members(communities);
    {
        double acc = 0;
        for (size_t r = 0; r < V; ++r) {
            acc += std::pow(double(r + 1), -0.8);
            act_cum[r] = acc;  // indexed by rank; node = act_rank[r]
        }
        for (size_t r = 0; r < V; ++r) pop_w[pop_rank[r]] = std::pow(double(r + 1), -1.0);
        for (size_t i = 0; i < V; ++i) comm_members[comm[i]].push_back(i);
        for (int c = 0; c < communities; ++c) {
            double a = 0;
            comm_cum[c].reserve(comm_members[c].size());
            for (size_t i : comm_members[c]) {
                a += pop_w[i];
                comm_cum[c].push_back(a);
            }
        }
        double a = 0;
        for (size_t i = 0; i < V; ++i) {
            a += pop_w[i];
            pop_w[i] = a;  // reuse as global cumulative
        }
    }

    // Debut schedule guarantees every node appears at least once, spread
    // over the first 95% of the stream so cold starts keep arriving.
    std::vector<size_t> debut(V);
    std::iota(debut.begin(), debut.end(), size_t{0});
    std::shuffle(debut.begin(), debut.end(), rng);
    std::vector<int64_t> debut_of_event(E, -1);
    const size_t debut_span = std::max(E * 19 / 20, V);  // >= V keeps slots distinct
    for (size_t j = 0; j < V; ++j)
        debut_of_event[j * debut_span / V] = static_cast<int64_t>(debut[j]);

    std::vector<int> recent_neg(V, 0);              // count over last incoming signs
    std::vector<std::vector<int>> last_in(V);       // rolling window of incoming signs
    std::vector<std::pair<NodeId, NodeId>> repeat_pool;
    repeat_pool.reserve(E / 4);

    EventStream out;
    out.reserve(E);
    for (size_t k = 0; k < E; ++k) {
        const auto day = static_cast<int64_t>(spec.days * k / E);
        NodeId u, v;
        if (debut_of_event[k] >= 0) {
            // scheduled debut: force node coverage, alternating role
            const NodeId fresh = static_cast<NodeId>(debut_of_event[k]);
            const NodeId other = static_cast<NodeId>(
                std::lower_bound(pop_w.begin(), pop_w.end(), uniform01(rng) * pop_w.back()) -
                pop_w.begin());
            if (k % 2 == 0) u = fresh, v = other;
            else u = other, v = fresh;
        } else if (!repeat_pool.empty() && uniform01(rng) < 0.25) {
            const auto& pr = repeat_pool[rng() % repeat_pool.size()];
            u = pr.first;
            v = pr.second;
        } else {
            u = static_cast<NodeId>(act_rank[draw_cum(act_cum, rng)]);
            if (uniform01(rng) < 0.65 && comm_members[comm[u]].size() > 1) {
                const int c = comm[u];
                v = static_cast<NodeId>(comm_members[c][draw_cum(comm_cum[c], rng)]);
            } else {
                v = static_cast<NodeId>(
                    std::lower_bound(pop_w.begin(), pop_w.end(), uniform01(rng) * pop_w.back()) -
                    pop_w.begin());
            }
        }
        for (int tries = 0; u == v && tries < 8; ++tries)
            v = static_cast<NodeId>(rng() % V);
        if (u == v) v = (v + 1) % static_cast<NodeId>(V);

        const bool flipped = flip_day[v] >= 0 && day >= flip_day[v];
        const double t_eff = flipped ? 0.08 : tau[v];
        double p_neg = 0.01 + 0.35 * (1.0 - t_eff) * (1.0 - t_eff) + 0.6 * harsh[u] * (1.0 - t_eff);
        if (recent_neg[v] >= 2) p_neg += 0.20;  // reputation cascade
        p_neg = std::min(p_neg, 0.95);
        const int sign = uniform01(rng) < p_neg ? -1 : +1;

        SignedEvent e;
        e.src = u;
        e.dst = v;
        e.time = static_cast<Time>(day) * spec.day_seconds;
        e.sign = sign;
        e.weight = 1.0;
        e.stream_index = static_cast<StreamIndex>(k);
        out.push_back(e);

        auto& win = last_in[v];
        win.push_back(sign);
        if (sign < 0) ++recent_neg[v];
        if (win.size() > 5) {
            if (win.front() < 0) --recent_neg[v];
            win.erase(win.begin());
        }
        if (repeat_pool.size() < E / 4 && uniform01(rng) < 0.3) repeat_pool.push_back({u, v});
    }
    return out;
}

void write_synthetic_csv(const std::string& path, const SynthSpec& spec) {
    const EventStream events = generate_synthetic_stream(spec);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    for (const auto& e : events)
        std::fprintf(f, "%lld,%lld,%.0f,%d\n", static_cast<long long>(e.src),
                     static_cast<long long>(e.dst), e.time, e.sign);
    std::fclose(f);
}

}  // namespace dsn

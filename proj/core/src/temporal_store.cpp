#include "dsn/temporal_store.hpp"

#include <algorithm>
#include <cmath>

namespace dsn {

void TemporalStore::insert(const SignedEvent& e) {
    if (e.time < last_time_ || (e.time == last_time_ && e.stream_index <= last_index_))
        throw invariant_error("temporal store: out-of-order insertion at stream index " +
                              std::to_string(e.stream_index));
    if (e.src >= node_count() || e.dst >= node_count())
        throw invariant_error("temporal store: node id out of range");
    last_time_ = e.time;
    last_index_ = e.stream_index;
    lists_[e.src].push_back({e.dst, e.time, e.sign, e.weight, +1, e.stream_index});
    lists_[e.dst].push_back({e.src, e.time, e.sign, e.weight, -1, e.stream_index});
    record_count_ += 2;
}

size_t TemporalStore::causal_bound(NodeId u, Time t, std::optional<StreamIndex> micro) const {
    const auto& list = lists_[u];
    const StreamIndex mi = micro ? *micro : std::numeric_limits<StreamIndex>::min();
    auto it = std::lower_bound(list.begin(), list.end(), std::make_pair(t, mi),
                               [](const NeighborRecord& r, const std::pair<Time, StreamIndex>& p) {
                                   if (r.time != p.first) return r.time < p.first;
                                   return r.stream_index < p.second;
                               });
    return static_cast<size_t>(it - list.begin());
}

std::vector<NeighborRecord> TemporalStore::recent_neighbors(NodeId u, Time t, int k,
                                                            std::optional<StreamIndex> micro) const {
    std::vector<NeighborRecord> out;
    if (u < 0 || u >= node_count() || k <= 0) return out;
    const auto& list = lists_[u];
    const size_t bound = causal_bound(u, t, micro);
    const size_t take = std::min(static_cast<size_t>(k), bound);
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) out.push_back(list[bound - 1 - i]);  // newest first
    return out;
}

std::vector<Walk> TemporalStore::sample_walks(NodeId u, Time t, int count, int len, double gamma,
                                              std::mt19937_64& rng,
                                              std::optional<StreamIndex> micro) const {
    walk_calls_.fetch_add(1, std::memory_order_relaxed);
    if (!(gamma >= 0) || !std::isfinite(gamma))
        throw validation_error("walk sampling: gamma must be finite and >= 0");
    std::vector<Walk> walks;
    if (count <= 0 || len <= 0) return walks;
    if (u < 0 || u >= node_count()) return std::vector<Walk>(count);

    walks.resize(count);
    std::vector<double> cum;
    for (int w = 0; w < count; ++w) {
        NodeId cur = u;
        for (int step = 0; step < len; ++step) {
            const auto& list = lists_[cur];
            const size_t bound = causal_bound(cur, t, micro);
            if (bound == 0) break;  // truncate; shorter walks stay meaningful
            size_t pick;
            if (gamma == 0.0) {
                pick = static_cast<size_t>(rng() % bound);  // uniform limit
            } else {
                cum.resize(bound);
                double total = 0;
                // bias is purely temporal: exp(-gamma*log1p(lag)) = (1+lag)^-gamma
                if (gamma == 1.0) {
                    for (size_t i = 0; i < bound; ++i) {
                        total += 1.0 / (1.0 + std::max(t - list[i].time, 0.0));
                        cum[i] = total;
                    }
                } else {
                    for (size_t i = 0; i < bound; ++i) {
                        total += std::pow(1.0 + std::max(t - list[i].time, 0.0), -gamma);
                        cum[i] = total;
                    }
                }
                const double draw = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
                pick = static_cast<size_t>(std::lower_bound(cum.begin(), cum.end(), draw) -
                                           cum.begin());
            }
            const NeighborRecord& rec = list[std::min(pick, bound - 1)];
            walks[w].steps.push_back(rec);
            cur = rec.other;
        }
    }
    return walks;
}

}  // namespace dsn

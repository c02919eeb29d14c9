// Append-only per-node index over historical interactions: causal
// K-recent neighbor lookup and time-decay biased random walk sampling.
// Causality is enforced at lookup time, so the store may be built once
// over a whole retained stream and queried at any micro-position.

#ifndef DSN_TEMPORAL_STORE_HPP
#define DSN_TEMPORAL_STORE_HPP

#include <atomic>
#include <optional>
#include <random>
#include <vector>

#include "dsn/events.hpp"

namespace dsn {

/// A historical interaction viewed from a focal node.
struct NeighborRecord {
    NodeId other = 0;
    Time time = 0;
    int sign = +1;
    double weight = 1;
    int direction = +1;  // +1 the focal node was the source, -1 the destination
    StreamIndex stream_index = 0;
};

/// A temporal walk rooted at (node, query time); steps are the traversed
/// interactions, each viewed from the node it was reached from.
struct Walk {
    std::vector<NeighborRecord> steps;
};

class TemporalStore {
public:
    explicit TemporalStore(int64_t num_nodes) : lists_(static_cast<size_t>(num_nodes)) {}

    /// Events must arrive in non-decreasing (time, stream_index) order.
    void insert(const SignedEvent& e);

    int64_t node_count() const { return static_cast<int64_t>(lists_.size()); }
    int64_t record_count() const { return record_count_; }

    /// Up to k most recent records strictly before (t, micro), newest first.
    std::vector<NeighborRecord> recent_neighbors(NodeId u, Time t, int k,
                                                 std::optional<StreamIndex> micro = {}) const;

    /// `count` walks of length <= len. Next hops are drawn over all causal
    /// incident records with probability proportional to
    /// exp(-gamma * log(1 + (t - t_i))); signs and weights never influence
    /// the transition. A step with no candidates truncates the walk.
    std::vector<Walk> sample_walks(NodeId u, Time t, int count, int len, double gamma,
                                   std::mt19937_64& rng,
                                   std::optional<StreamIndex> micro = {}) const;

    /// Number of sample_walks invocations (ablation wiring checks).
    uint64_t walk_invocations() const { return walk_calls_.load(std::memory_order_relaxed); }

private:
    std::vector<std::vector<NeighborRecord>> lists_;
    Time last_time_ = -1;
    StreamIndex last_index_ = -1;
    int64_t record_count_ = 0;
    mutable std::atomic<uint64_t> walk_calls_{0};

    // index of the first record of `u` at or after (t, micro)
    size_t causal_bound(NodeId u, Time t, std::optional<StreamIndex> micro) const;
};

}  // namespace dsn

#endif  // DSN_TEMPORAL_STORE_HPP

// Chronological 70/15/15 splitting by timestamp quantiles, masked-node
// sampling for the inductive protocol, and cached evaluation negatives.

#ifndef DSN_SPLIT_HPP
#define DSN_SPLIT_HPP

#include <string>
#include <vector>

#include "dsn/events.hpp"

namespace dsn {

struct SplitSpec {
    Time train_cutoff = 0;
    Time val_cutoff = 0;
    std::vector<NodeId> masked_nodes;          // sorted
    std::vector<StreamIndex> train_ids;        // retained training events only
    std::vector<StreamIndex> val_ids;
    std::vector<StreamIndex> test_ids;
    std::vector<StreamIndex> trans_test_ids;   // no masked endpoint
    std::vector<StreamIndex> induc_test_ids;   // >= 1 masked endpoint
    uint64_t seed = 0;
    double mask_ratio = 0.0;

    bool is_masked(NodeId n) const;
};

/// Empirical timestamp quantile cutoffs. An event is train iff
/// time < train_cutoff, val iff train_cutoff <= time < val_cutoff, test
/// otherwise; ties at a cutoff land in the later bucket.
std::pair<Time, Time> chronological_split(const EventStream& stream, double q_train = 0.70,
                                          double q_val = 0.85);

/// Masked-node sample: pool is every node incident to an event with
/// time >= train_cutoff; sample size floor(ratio * total_nodes), uniform
/// without replacement. Returns a sorted set.
std::vector<NodeId> sample_masked_nodes(const EventStream& stream, Time train_cutoff,
                                        int64_t total_nodes, double ratio, uint64_t seed);

/// Buckets the stream, deletes masked-incident training events from the
/// retained stream, and partitions test into transductive/inductive.
SplitSpec apply_mask(const EventStream& stream, std::pair<Time, Time> cutoffs,
                     std::vector<NodeId> masked, uint64_t seed, double mask_ratio);

/// The retained stream: all events except masked-incident training events.
/// These removed events never enter history at any phase.
EventStream retained_stream(const EventStream& stream, const SplitSpec& split);

/// Nodes incident to validation or test events (the evaluation-time node
/// set used for negative endpoint sampling). Sorted.
std::vector<NodeId> eval_node_set(const EventStream& stream, const SplitSpec& split);

struct EvalNegatives {
    struct Pair {
        NodeId src = 0, dst = 0;
        Time time = 0;
    };
    std::vector<Pair> pairs;  // row-aligned with val events then test events
    uint64_t seed = 0;
};

/// One NonEdge partner per evaluation event (1:1), same timestamp as the
/// paired event, endpoints i.i.d. uniform over `nodes` with no rejection.
EvalNegatives generate_eval_negatives(const std::vector<SignedEvent>& eval_events,
                                      const std::vector<NodeId>& nodes, uint64_t seed);

// Artifact I/O. Both files embed the generating seed and the input
// checksum so a run directory is self-describing.
void write_split_file(const std::string& path, const SplitSpec& split,
                      const std::string& checksum);
SplitSpec read_split_file(const std::string& path);
void write_negatives_file(const std::string& path, const EvalNegatives& negs,
                          const std::string& checksum);
EvalNegatives read_negatives_file(const std::string& path);

}  // namespace dsn

#endif  // DSN_SPLIT_HPP

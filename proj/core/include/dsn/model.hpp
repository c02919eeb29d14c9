// The full query model: reads dual-polarity memory, aggregates causal
// neighbors under time-decay attention, pools walk context, disentangles
// static and dynamic polarity factors and scores (u, v, t) over the three
// labels. Pure given (parameters, frozen memory, history prefix, per-query
// rng streams), so queries inside a batch can be encoded in parallel.

#ifndef DSN_MODEL_HPP
#define DSN_MODEL_HPP

#include "dsn/encoder.hpp"
#include "dsn/predictor.hpp"

namespace dsn {

/// Independent deterministic random streams of one query.
struct QueryRngs {
    std::mt19937_64 nodedrop;
    std::mt19937_64 dropout;
    uint64_t walk_seed_u = 0;
    uint64_t walk_seed_v = 0;

    /// role: 0 for the observed-event query, 1 for its NonEdge partner.
    static QueryRngs make(uint64_t run_seed, StreamIndex stream_index, int role) {
        const uint64_t q = static_cast<uint64_t>(stream_index) * 2 + static_cast<uint64_t>(role);
        QueryRngs r;
        r.nodedrop.seed(derive_seed(run_seed, seed_tag::kNodeDrop, q));
        r.dropout.seed(derive_seed(run_seed, seed_tag::kDropout, q));
        r.walk_seed_u = derive_seed(run_seed, seed_tag::kWalk, q, 0);
        r.walk_seed_v = derive_seed(run_seed, seed_tag::kWalk, q, 1);
        return r;
    }
};

template <class T>
class Model {
public:
    Model(const ExperimentConfig& cfg, int64_t num_nodes, uint64_t init_seed)
        : cfg_(cfg),
          num_nodes_(num_nodes),
          params_(init_seed),
          memory_params_(params_, cfg_),
          encoder_(params_, cfg_),
          statics_(params_, cfg_, num_nodes),
          heads_(params_, cfg_),
          predictor_(params_, cfg_) {
        cfg_.validate();
    }

    const ExperimentConfig& config() const { return cfg_; }
    int64_t num_nodes() const { return num_nodes_; }
    num::ParamStore<T>& params() { return params_; }
    const num::ParamStore<T>& params() const { return params_; }
    MemoryParams<T>& memory_params() { return memory_params_; }
    Encoder<T>& encoder() { return encoder_; }
    const Encoder<T>& encoder() const { return encoder_; }
    StaticTables<T>& statics() { return statics_; }
    PolarityHeads<T>& polarity_heads() { return heads_; }
    Predictor<T>& predictor() { return predictor_; }

    /// Query-time feature origin (the dataset's minimum timestamp).
    void set_time_origin(Time t0) { time_origin_ = t0; }
    Time time_origin() const { return time_origin_; }

    /// Masked-node hygiene instrumentation: while set, touching any
    /// flagged node in a query, neighbor record or walk step throws.
    void set_masked_guard(const std::vector<uint8_t>* masked) { guard_ = masked; }

    struct EndpointOut {
        num::Var<T> z_final;
        num::Var<T> z_dyn_pos, z_dyn_neg;
        num::Var<T> z_stat_pos, z_stat_neg;
        bool has_dynamic = false;
        NodeId node = -1;
    };

    EndpointOut encode_endpoint(num::Tape<T>& tape, NodeId u, Time t,
                                std::optional<StreamIndex> micro, const TemporalStore& store,
                                MemoryReader<T>& memory, const StaticLookupCtx& ctx,
                                uint64_t walk_seed) const {
        guard_check(u);
        EndpointOut out;
        out.node = u;
        auto [zs_p, zs_n] = statics_.lookup(tape, u, ctx);
        out.z_stat_pos = zs_p;
        out.z_stat_neg = zs_n;
        if (cfg_.ablate_static_only) {
            out.z_final = tape.concat_cols({zs_p, zs_n});
            return out;
        }

        // query is the concatenation of the node's dual-polarity memories
        num::Var<T> q = tape.concat_cols(
            {memory.read(tape, u, kPosChannel), memory.read(tape, u, kNegChannel)});

        const auto records = store.recent_neighbors(u, t, cfg_.k_neighbors, micro);
        for (const NeighborRecord& r : records) guard_check(r.other);
        q = encoder_.neighbor_attention(tape, q,
                                        encoder_.neighbor_features(tape, records, memory, t));

        if (!cfg_.ablate_no_walk) {
            std::mt19937_64 walk_rng(walk_seed);
            const auto walks = store.sample_walks(u, t, cfg_.walks, cfg_.walk_len,
                                                  cfg_.walk_gamma, walk_rng, micro);
            for (const Walk& w : walks)
                for (const NeighborRecord& s : w.steps) guard_check(s.other);
            const auto enc = encoder_.encode_walks(tape, walks, statics_, ctx, t);
            q = encoder_.fuse_context(tape, q, encoder_.pool_walks(tape, q, enc));
        }

        auto [zd_p, zd_n] = heads_.dynamic_project(tape, q);
        out.z_dyn_pos = zd_p;
        out.z_dyn_neg = zd_n;
        out.has_dynamic = true;
        if (cfg_.ablate_dynamic_only) {
            out.z_final = tape.concat_cols({zd_p, zd_n});
        } else {
            out.z_final = tape.concat_cols({heads_.fuse_polarity(tape, zd_p, zs_p, true),
                                            heads_.fuse_polarity(tape, zd_n, zs_n, false)});
        }
        return out;
    }

    struct QueryOut {
        num::Var<T> probs;  // [1, 3] over (Pos, Neg, NonEdge)
        EndpointOut u_out, v_out;
    };

    QueryOut predict_query(num::Tape<T>& tape, const TemporalStore& store,
                           MemoryReader<T>& memory, NodeId u, NodeId v, Time t,
                           std::optional<StreamIndex> micro, StaticLookupCtx ctx,
                           QueryRngs& rngs, bool training) const {
        ctx.rng = &rngs.nodedrop;
        QueryOut out;
        out.u_out = encode_endpoint(tape, u, t, micro, store, memory, ctx, rngs.walk_seed_u);
        out.v_out = encode_endpoint(tape, v, t, micro, store, memory, ctx, rngs.walk_seed_v);
        num::Var<T> tf = encoder_.time_encode(tape, t - time_origin_);
        num::Var<T> f =
            predictor_.pair_features(tape, out.u_out.z_final, out.v_out.z_final, tf);
        out.probs = predictor_.predict(
            tape, f, training && cfg_.dropout > 0 ? &rngs.dropout : nullptr);
        return out;
    }

private:
    void guard_check(NodeId u) const {
        if (guard_ && (*guard_)[static_cast<size_t>(u)])
            throw invariant_error("masked-node hygiene: node " + std::to_string(u) +
                                  " referenced during training");
    }

    ExperimentConfig cfg_;
    int64_t num_nodes_;
    num::ParamStore<T> params_;
    MemoryParams<T> memory_params_;
    Encoder<T> encoder_;
    StaticTables<T> statics_;
    PolarityHeads<T> heads_;
    Predictor<T> predictor_;
    Time time_origin_ = 0;
    const std::vector<uint8_t>* guard_ = nullptr;
};

}  // namespace dsn

#endif  // DSN_MODEL_HPP

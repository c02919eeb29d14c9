// Polarity-wise static identity tables with an unknown-node fallback,
// dynamic projection heads over the fused query, per-polarity gated
// static-dynamic fusion, and the squared-cosine orthogonality penalty.

#ifndef DSN_DISENTANGLE_HPP
#define DSN_DISENTANGLE_HPP

#include <random>

#include "dsn/config.hpp"
#include "dsn/nn.hpp"

namespace dsn {

/// Controls how static lookups resolve: unknown ids (masked nodes, ids
/// never seen in training) fall back to the shared unknown embedding, and
/// training-time node dropout substitutes it for known ids with p_unk.
struct StaticLookupCtx {
    const std::vector<uint8_t>* known = nullptr;  // null = everything known
    bool training = false;
    double p_unk = 0.0;
    std::mt19937_64* rng = nullptr;

    bool resolves_unknown(NodeId u) const {
        if (known && !(*known)[static_cast<size_t>(u)]) return true;
        if (training && p_unk > 0 && rng)
            return (static_cast<double>((*rng)() >> 11) * 0x1.0p-53) < p_unk;
        return false;
    }
};

template <class T>
class StaticTables {
public:
    StaticTables() = default;
    StaticTables(num::ParamStore<T>& ps, const ExperimentConfig& cfg, int64_t nodes)
        : emb_pos_(&ps.add_gaussian("static.emb_pos", static_cast<int>(nodes), cfg.d_emb, 0.1)),
          emb_neg_(&ps.add_gaussian("static.emb_neg", static_cast<int>(nodes), cfg.d_emb, 0.1)),
          unk_pos_(&ps.add_gaussian("static.unk_pos", 1, cfg.d_emb, 0.1)),
          unk_neg_(&ps.add_gaussian("static.unk_neg", 1, cfg.d_emb, 0.1)) {}

    /// (z_stat_pos, z_stat_neg), each [1, d_emb]. One dropout coin covers
    /// both polarities of a lookup.
    std::pair<num::Var<T>, num::Var<T>> lookup(num::Tape<T>& tape, NodeId u,
                                               const StaticLookupCtx& ctx) const {
        if (u < 0 || u >= emb_pos_->value.rows)
            throw invariant_error("static lookup: node id out of table range");
        if (ctx.resolves_unknown(u)) return {tape.param(*unk_pos_), tape.param(*unk_neg_)};
        return {tape.param_row(*emb_pos_, static_cast<int>(u)),
                tape.param_row(*emb_neg_, static_cast<int>(u))};
    }

    num::Param<T>& emb_pos() { return *emb_pos_; }
    num::Param<T>& emb_neg() { return *emb_neg_; }
    num::Param<T>& unk_pos() { return *unk_pos_; }
    num::Param<T>& unk_neg() { return *unk_neg_; }

private:
    num::Param<T>* emb_pos_ = nullptr;
    num::Param<T>* emb_neg_ = nullptr;
    num::Param<T>* unk_pos_ = nullptr;
    num::Param<T>* unk_neg_ = nullptr;
};

template <class T>
class PolarityHeads {
public:
    PolarityHeads() = default;
    PolarityHeads(num::ParamStore<T>& ps, const ExperimentConfig& cfg)
        : proj_pos_(ps, "disent.proj_pos", {cfg.d_model, cfg.d_model, cfg.d_emb}),
          proj_neg_(ps, "disent.proj_neg", {cfg.d_model, cfg.d_model, cfg.d_emb}),
          gate_pos_(ps, "disent.gate_pos", 2 * cfg.d_emb, cfg.d_emb),
          gate_neg_(ps, "disent.gate_neg", 2 * cfg.d_emb, cfg.d_emb) {}

    /// Two independent heads over the same fused query.
    std::pair<num::Var<T>, num::Var<T>> dynamic_project(num::Tape<T>& tape,
                                                        num::Var<T> q) const {
        return {proj_pos_(tape, q), proj_neg_(tape, q)};
    }

    /// Per-polarity convex combination g⊙dyn + (1-g)⊙stat.
    num::Var<T> fuse_polarity(num::Tape<T>& tape, num::Var<T> z_dyn, num::Var<T> z_stat,
                              bool positive) const {
        const num::Linear<T>& gate = positive ? gate_pos_ : gate_neg_;
        num::Var<T> g = tape.sigmoid(gate(tape, tape.concat_cols({z_dyn, z_stat})));
        // stat + g⊙(dyn - stat)
        return tape.add(z_stat, tape.mul(g, tape.sub(z_dyn, z_stat)));
    }

private:
    num::Mlp<T> proj_pos_, proj_neg_;
    num::Linear<T> gate_pos_, gate_neg_;
};

/// cos^2 similarity of one static/dynamic pair; summed over polarities
/// and nodes by the caller, which applies the 1/(2|B|) factor.
template <class T>
num::Var<T> orthogonality_term(num::Tape<T>& tape, num::Var<T> z_stat, num::Var<T> z_dyn) {
    num::Var<T> c = tape.cosine(z_stat, z_dyn);
    return tape.mul(c, c);
}

}  // namespace dsn

#endif  // DSN_DISENTANGLE_HPP

// History-aware query encoding: learnable time encoding over log-scaled
// lags, a stacked multi-head neighbor attention with per-head learnable
// time decay, GRU walk encoding with cross-attention pooling, and the
// gated residual fusion of walk context into the query.

#ifndef DSN_ENCODER_HPP
#define DSN_ENCODER_HPP

#include <atomic>

#include "dsn/config.hpp"
#include "dsn/disentangle.hpp"
#include "dsn/memory.hpp"
#include "dsn/temporal_store.hpp"

namespace dsn {

template <class T>
class Encoder {
public:
    Encoder() = default;
    Encoder(num::ParamStore<T>& ps, const ExperimentConfig& cfg) : cfg_(&cfg) {
        time_mlp_ = num::Mlp<T>(ps, "time_enc", {1, cfg.time_hidden, cfg.d_time});
        in_proj_ = num::Linear<T>(ps, "attn.in_proj", cfg.neighbor_feat_dim(), cfg.d_model);
        layers_.reserve(cfg.attn_layers);
        for (int l = 0; l < cfg.attn_layers; ++l) {
            AttnLayer layer;
            const std::string base = "attn.l" + std::to_string(l);
            layer.Wq = &ps.add_glorot(base + ".Wq", cfg.d_model, cfg.d_model);
            layer.Wk = &ps.add_glorot(base + ".Wk", cfg.d_model, cfg.d_model);
            layer.Wv = &ps.add_glorot(base + ".Wv", cfg.d_model, cfg.d_model);
            layer.Wo = &ps.add_glorot(base + ".Wo", cfg.d_model, cfg.d_model);
            for (int h = 0; h < cfg.heads; ++h) {
                num::Param<T>& psi =
                    ps.add_const(base + ".psi.h" + std::to_string(h), 1, 1, 0.1);
                if (cfg.ablate_no_decay) {
                    psi.value.fill(T(0));
                    psi.trainable = false;
                }
                layer.psi.push_back(&psi);
            }
            layer.ff1 = num::Linear<T>(ps, base + ".ff1", cfg.d_model, cfg.ff_hidden);
            layer.ff2 = num::Linear<T>(ps, base + ".ff2", cfg.ff_hidden, cfg.d_model);
            layers_.push_back(std::move(layer));
        }
        walk_gru_ = num::GruCell<T>(ps, "walk.gru", cfg.walk_feat_dim(), cfg.d_model);
        walk_WK_ = &ps.add_glorot("walk.WK", cfg.d_model, cfg.d_model);
        walk_WV_ = &ps.add_glorot("walk.WV", cfg.d_model, cfg.d_model);
        walk_WO_ = &ps.add_glorot("walk.WO", cfg.d_model, cfg.d_model);
        fusion_gate_ = num::Linear<T>(ps, "fusion.gate", 2 * cfg.d_model, cfg.d_model);
    }

    /// TimeEnc(dt) over log(1 + dt); negative lags clamp to 0 and bump a
    /// diagnostic counter.
    num::Var<T> time_encode(num::Tape<T>& tape, double dt) const {
        return time_encode_rows(tape, {dt});
    }

    num::Var<T> time_encode_rows(num::Tape<T>& tape, const std::vector<double>& dts) const {
        num::Tensor<T> in(static_cast<int>(dts.size()), 1);
        for (size_t i = 0; i < dts.size(); ++i) {
            double dt = dts[i];
            if (dt < 0) {
                negative_lag_count_.fetch_add(1, std::memory_order_relaxed);
                dt = 0;
            }
            in.data[i] = static_cast<T>(std::log1p(dt));
        }
        return time_mlp_(tape, tape.constant(std::move(in)));
    }

    uint64_t negative_lag_count() const { return negative_lag_count_.load(); }

    // -- neighbor path -------------------------------------------------------

    struct NeighborFeatures {
        num::Var<T> feats;          // [count, 2*d_emb + d_time + 3]
        std::vector<double> lags;   // raw lags t - t_k, row-aligned
        int count = 0;
        num::Tensor<T> mask;        // [1, K]: 1 for the count valid rows
    };

    /// Row k = [m_{v_k}^+ ‖ m_{v_k}^- ‖ TimeEnc(t-t_k) ‖ log(1+lag) ‖ s_k ‖ w_k],
    /// width 2*d_emb + d_time + 3: the log-scaled lag rides along as a raw
    /// scalar next to its learned encoding. The direction flag is
    /// deliberately not part of the neighbor token.
    NeighborFeatures neighbor_features(num::Tape<T>& tape,
                                       const std::vector<NeighborRecord>& records,
                                       MemoryReader<T>& memory, Time t) const {
        NeighborFeatures out;
        out.count = static_cast<int>(records.size());
        out.mask = num::Tensor<T>::zeros(1, cfg_->k_neighbors);
        for (int k = 0; k < std::min(out.count, cfg_->k_neighbors); ++k) out.mask.data[k] = T(1);
        if (out.count == 0) return out;

        std::vector<num::Var<T>> mem_pos, mem_neg;
        num::Tensor<T> lsw(out.count, 3);
        out.lags.reserve(records.size());
        for (int k = 0; k < out.count; ++k) {
            const NeighborRecord& r = records[k];
            mem_pos.push_back(memory.read(tape, r.other, kPosChannel));
            mem_neg.push_back(memory.read(tape, r.other, kNegChannel));
            out.lags.push_back(t - r.time);
            lsw.at(k, 0) = static_cast<T>(std::log1p(std::max(t - r.time, 0.0)));
            lsw.at(k, 1) = static_cast<T>(r.sign);
            lsw.at(k, 2) = static_cast<T>(r.weight);
        }
        num::Var<T> te = time_encode_rows(tape, out.lags);
        out.feats = tape.concat_cols({tape.stack_rows(mem_pos), tape.stack_rows(mem_neg), te,
                                      tape.constant(std::move(lsw))});
        return out;
    }

    /// Stacked time-decay multi-head attention; the query evolves, the
    /// projected neighbor tokens stay fixed. Zero neighbors: q unchanged.
    num::Var<T> neighbor_attention(num::Tape<T>& tape, num::Var<T> q,
                                   const NeighborFeatures& nf) const {
        if (nf.count == 0) return q;
        const int H = cfg_->heads;
        const int dh = cfg_->head_dim();
        num::Var<T> tokens = in_proj_(tape, nf.feats);  // [K', d_model]

        // decay penalty input: log-scaled lags as a constant row
        num::Tensor<T> lag_row(1, nf.count);
        for (int k = 0; k < nf.count; ++k)
            lag_row.data[k] = static_cast<T>(std::log1p(std::max(nf.lags[k], 0.0)));
        num::Var<T> lags = tape.constant(std::move(lag_row));

        for (const AttnLayer& layer : layers_) {
            num::Var<T> qp = tape.matmul(q, tape.param(*layer.Wq));
            num::Var<T> kp = tape.matmul(tokens, tape.param(*layer.Wk));
            num::Var<T> vp = tape.matmul(tokens, tape.param(*layer.Wv));
            std::vector<num::Var<T>> heads;
            heads.reserve(H);
            for (int h = 0; h < H; ++h) {
                num::Var<T> qh = tape.slice_cols(qp, h * dh, dh);
                num::Var<T> kh = tape.slice_cols(kp, h * dh, dh);
                num::Var<T> vh = tape.slice_cols(vp, h * dh, dh);
                num::Var<T> scores =
                    tape.scale(tape.matmul(qh, kh, false, true), 1.0 / std::sqrt(double(dh)));
                num::Var<T> penalty = tape.scale_by(lags, tape.abs_(tape.param(*layer.psi[h])));
                num::Var<T> alpha = tape.softmax_rows(tape.sub(scores, penalty));
                heads.push_back(tape.matmul(alpha, vh));
            }
            num::Var<T> attn = tape.matmul(tape.concat_cols(heads), tape.param(*layer.Wo));
            q = tape.add(q, attn);
            q = tape.add(q, layer.ff2(tape, tape.relu(layer.ff1(tape, q))));
        }
        return q;
    }

    // -- walk path -----------------------------------------------------------

    struct WalkEncoding {
        num::Var<T> hidden;   // [rows, d_model]; invalid when rows == 0
        int rows = 0;
        std::vector<int> walk_of_row;  // owning walk per hidden-state row
        int walk_count = 0;
    };

    /// Step token: [z_{v}^stat+ ‖ z_{v}^stat- ‖ TimeEnc(t-t_i) ‖ log(1+lag) ‖ s ‖ w ‖ d],
    /// width 2*d_emb + d_time + 4 (neighbor token plus the direction flag).
    /// All walks advance in lockstep (sorted by length, one batched GRU
    /// step per depth); every per-step hidden state becomes a row.
    WalkEncoding encode_walks(num::Tape<T>& tape, const std::vector<Walk>& walks,
                              const StaticTables<T>& statics, const StaticLookupCtx& ctx,
                              Time t) const {
        WalkEncoding out;
        std::vector<const Walk*> sorted;
        for (const Walk& w : walks)
            if (!w.steps.empty()) sorted.push_back(&w);
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const Walk* a, const Walk* b) { return a->steps.size() > b->steps.size(); });
        out.walk_count = static_cast<int>(sorted.size());
        if (sorted.empty()) return out;

        const size_t max_len = sorted.front()->steps.size();
        num::Var<T> h;  // [n_t, d_model] carried across depths
        std::vector<num::Var<T>> all_states;
        for (size_t depth = 0; depth < max_len; ++depth) {
            int n = 0;
            while (n < static_cast<int>(sorted.size()) && sorted[n]->steps.size() > depth) ++n;
            // step features for the n surviving walks
            std::vector<num::Var<T>> zp, zn;
            std::vector<double> lags;
            num::Tensor<T> lswd(n, 4);
            for (int w = 0; w < n; ++w) {
                const NeighborRecord& step = sorted[w]->steps[depth];
                auto [sp, sn] = statics.lookup(tape, step.other, ctx);
                zp.push_back(sp);
                zn.push_back(sn);
                lags.push_back(t - step.time);
                lswd.at(w, 0) = static_cast<T>(std::log1p(std::max(t - step.time, 0.0)));
                lswd.at(w, 1) = static_cast<T>(step.sign);
                lswd.at(w, 2) = static_cast<T>(step.weight);
                lswd.at(w, 3) = static_cast<T>(step.direction);
            }
            num::Var<T> x = tape.concat_cols({tape.stack_rows(zp), tape.stack_rows(zn),
                                              time_encode_rows(tape, lags),
                                              tape.constant(std::move(lswd))});
            num::Var<T> h_prev = depth == 0
                                     ? tape.constant(num::Tensor<T>::zeros(n, cfg_->d_model))
                                     : tape.slice_rows(h, 0, n);
            h = walk_gru_(tape, x, h_prev);
            all_states.push_back(h);
            for (int w = 0; w < n; ++w) out.walk_of_row.push_back(w);
        }
        out.hidden = all_states.size() == 1 ? all_states[0] : tape.stack_rows(all_states);
        out.rows = static_cast<int>(out.walk_of_row.size());
        return out;
    }

    /// p = CrossAttn(q, W_K H, W_V H): q split across heads unprojected,
    /// scaled dot-product, heads concatenated, output projection. Zero
    /// rows pool to the zero vector. The "mean" variant pools per walk
    /// and averages the per-walk vectors.
    num::Var<T> pool_walks(num::Tape<T>& tape, num::Var<T> q, const WalkEncoding& enc) const {
        if (enc.rows == 0)
            return tape.constant(num::Tensor<T>::zeros(1, cfg_->d_model));
        num::Var<T> keys = tape.matmul(enc.hidden, tape.param(*walk_WK_));
        num::Var<T> vals = tape.matmul(enc.hidden, tape.param(*walk_WV_));
        if (cfg_->walk_pool == "mean") {
            std::vector<num::Var<T>> per_walk;
            for (int w = 0; w < enc.walk_count; ++w) {
                std::vector<num::Var<T>> krows, vrows;
                for (int r = 0; r < enc.rows; ++r) {
                    if (enc.walk_of_row[r] != w) continue;
                    krows.push_back(tape.slice_rows(keys, r, 1));
                    vrows.push_back(tape.slice_rows(vals, r, 1));
                }
                per_walk.push_back(cross_attend(tape, q, tape.stack_rows(krows),
                                                tape.stack_rows(vrows)));
            }
            num::Var<T> acc = per_walk[0];
            for (size_t i = 1; i < per_walk.size(); ++i) acc = tape.add(acc, per_walk[i]);
            return tape.scale(acc, 1.0 / per_walk.size());
        }
        return cross_attend(tape, q, keys, vals);  // joint pooling over all rows
    }

    /// g = σ(W_g[q ‖ p]); q' = q + g⊙p.
    num::Var<T> fuse_context(num::Tape<T>& tape, num::Var<T> q, num::Var<T> p) const {
        num::Var<T> g = tape.sigmoid(fusion_gate_(tape, tape.concat_cols({q, p})));
        return tape.add(q, tape.mul(g, p));
    }

private:
    struct AttnLayer {
        num::Param<T>*Wq = nullptr, *Wk = nullptr, *Wv = nullptr, *Wo = nullptr;
        std::vector<num::Param<T>*> psi;  // per-head decay rates
        num::Linear<T> ff1, ff2;
    };

    num::Var<T> cross_attend(num::Tape<T>& tape, num::Var<T> q, num::Var<T> keys,
                             num::Var<T> vals) const {
        const int H = cfg_->heads;
        const int dh = cfg_->head_dim();
        std::vector<num::Var<T>> heads;
        heads.reserve(H);
        for (int h = 0; h < H; ++h) {
            num::Var<T> qh = tape.slice_cols(q, h * dh, dh);
            num::Var<T> kh = tape.slice_cols(keys, h * dh, dh);
            num::Var<T> vh = tape.slice_cols(vals, h * dh, dh);
            num::Var<T> alpha = tape.softmax_rows(
                tape.scale(tape.matmul(qh, kh, false, true), 1.0 / std::sqrt(double(dh))));
            heads.push_back(tape.matmul(alpha, vh));
        }
        return tape.matmul(tape.concat_cols(heads), tape.param(*walk_WO_));
    }

    const ExperimentConfig* cfg_ = nullptr;
    num::Mlp<T> time_mlp_;
    num::Linear<T> in_proj_;
    std::vector<AttnLayer> layers_;
    num::GruCell<T> walk_gru_;
    num::Param<T>*walk_WK_ = nullptr, *walk_WV_ = nullptr, *walk_WO_ = nullptr;
    num::Linear<T> fusion_gate_;
    mutable std::atomic<uint64_t> negative_lag_count_{0};
};

}  // namespace dsn

#endif  // DSN_ENCODER_HPP

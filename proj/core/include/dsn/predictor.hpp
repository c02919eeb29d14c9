// Pairwise feature construction, the 3-class softmax head, square-root
// tempered batch class weighting, and the composite loss.

#ifndef DSN_PREDICTOR_HPP
#define DSN_PREDICTOR_HPP

#include <array>

#include "dsn/config.hpp"
#include "dsn/events.hpp"
#include "dsn/nn.hpp"

namespace dsn {

template <class T>
class Predictor {
public:
    Predictor() = default;
    Predictor(num::ParamStore<T>& ps, const ExperimentConfig& cfg)
        : cfg_(&cfg),
          head_(ps, "head",
                {cfg.pair_feat_dim(), cfg.head_hidden1, cfg.head_hidden2, kNumLabels}) {}

    /// [z_u ‖ z_v ‖ |z_u - z_v| ‖ z_u⊙z_v ‖ TimeEnc(query time)]. The diff
    /// and prod blocks are endpoint-order invariant; the identity blocks
    /// are not (queries are directed).
    num::Var<T> pair_features(num::Tape<T>& tape, num::Var<T> z_u, num::Var<T> z_v,
                              num::Var<T> time_feat) const {
        return tape.concat_cols(
            {z_u, z_v, tape.abs_(tape.sub(z_u, z_v)), tape.mul(z_u, z_v), time_feat});
    }

    /// Softmax probabilities over (Pos, Neg, NonEdge). Dropout is active
    /// only when an rng is supplied (training).
    num::Var<T> predict(num::Tape<T>& tape, num::Var<T> pair_feat,
                        std::mt19937_64* dropout_rng = nullptr) const {
        num::Var<T> logits =
            dropout_rng ? head_.forward_dropout(tape, pair_feat, cfg_->dropout, *dropout_rng)
                        : head_(tape, pair_feat);
        return tape.softmax_rows(logits);
    }

private:
    const ExperimentConfig* cfg_ = nullptr;
    num::Mlp<T> head_;
};

/// Square-root tempered inverse-frequency weights, normalized so the mean
/// over classes present in the batch is exactly 1. Absent classes get
/// weight 0 and are excluded from the normalization mean (the raw formula
/// would inject sqrt(N/eps) and crush the present classes).
inline std::array<double, kNumLabels> class_weights(const std::array<int64_t, kNumLabels>& counts,
                                                    double eps = 1e-8) {
    std::array<double, kNumLabels> w{};
    int64_t total = 0;
    for (int64_t c : counts) total += c;
    if (total == 0) return w;
    double mean = 0;
    int present = 0;
    for (int c = 0; c < kNumLabels; ++c) {
        if (counts[c] == 0) continue;
        w[c] = std::sqrt(static_cast<double>(total) / (static_cast<double>(counts[c]) + eps));
        mean += w[c];
        ++present;
    }
    mean /= present;
    for (int c = 0; c < kNumLabels; ++c) w[c] /= mean;
    return w;
}

/// L = L_task + λ·L_orth; with λ = 0 the task loss is returned untouched
/// so the no-disentanglement objective is recovered bit-for-bit.
template <class T>
num::Var<T> total_loss(num::Tape<T>& tape, num::Var<T> task, num::Var<T> orth, double lambda) {
    if (lambda == 0.0) return task;
    return tape.add(task, tape.scale(orth, lambda));
}

}  // namespace dsn

#endif  // DSN_PREDICTOR_HPP

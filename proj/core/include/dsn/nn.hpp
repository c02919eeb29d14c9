// Parameter store, initializers and the small set of building blocks
// (affine layer, MLP, GRU cell) the model is composed from.

#ifndef DSN_NN_HPP
#define DSN_NN_HPP

#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsn/common.hpp"
#include "dsn/tape.hpp"

namespace dsn::num {

template <class T>
class ParamStore {
public:
    explicit ParamStore(uint64_t init_seed) : rng_(derive_seed(init_seed, seed_tag::kParamInit)) {}

    /// Glorot-uniform weight matrix [fan_in, fan_out].
    Param<T>& add_glorot(const std::string& name, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Tensor<T> w(fan_in, fan_out);
        for (T& x : w.data) x = static_cast<T>((uniform01() * 2.0 - 1.0) * limit);
        return emplace(name, std::move(w));
    }

    Param<T>& add_zeros(const std::string& name, int rows, int cols) {
        return emplace(name, Tensor<T>::zeros(rows, cols));
    }

    Param<T>& add_gaussian(const std::string& name, int rows, int cols, double stddev) {
        Tensor<T> w(rows, cols);
        for (T& x : w.data) x = static_cast<T>(gaussian() * stddev);
        return emplace(name, std::move(w));
    }

    Param<T>& add_const(const std::string& name, int rows, int cols, double v) {
        return emplace(name, Tensor<T>::full(rows, cols, static_cast<T>(v)));
    }

    Param<T>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw invariant_error("unknown parameter: " + name);
        return params_[it->second];
    }
    const Param<T>& at(const std::string& name) const {
        return const_cast<ParamStore*>(this)->at(name);
    }
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    size_t size() const { return params_.size(); }
    Param<T>& operator[](size_t i) { return params_[i]; }
    const Param<T>& operator[](size_t i) const { return params_[i]; }

    void zero_grads() {
        for (auto& p : params_) p.grad.zero();
    }

    int64_t coordinate_count() const {
        int64_t n = 0;
        for (const auto& p : params_) n += p.value.size();
        return n;
    }

private:
    std::deque<Param<T>> params_;
    std::unordered_map<std::string, size_t> index_;
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;

    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    // Marsaglia polar method; avoids distribution-object portability concerns.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform01() * 2.0 - 1.0;
            v = uniform01() * 2.0 - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    Param<T>& emplace(const std::string& name, Tensor<T> value) {
        if (index_.count(name)) throw invariant_error("duplicate parameter name: " + name);
        params_.emplace_back(name, std::move(value));
        params_.back().id = static_cast<int>(params_.size()) - 1;
        index_.emplace(name, params_.size() - 1);
        return params_.back();
    }
};

/// Per-thread gradient accumulator, reduced into the canonical store in a
/// fixed order after a parallel section.
template <class T>
class ThreadGradSink : public GradSink<T> {
public:
    explicit ThreadGradSink(size_t param_count) : bufs_(param_count) {}

    Tensor<T>& grad_for(Param<T>& p) override {
        Tensor<T>& buf = bufs_[p.id];
        if (buf.empty()) buf = Tensor<T>::zeros(p.value.rows, p.value.cols);
        return buf;
    }

    void reduce_into(ParamStore<T>& store) {
        for (size_t i = 0; i < bufs_.size(); ++i)
            if (!bufs_[i].empty()) store[i].grad.add_in_place(bufs_[i]);
    }

    void clear() {
        for (auto& b : bufs_) b = Tensor<T>();
    }

private:
    std::vector<Tensor<T>> bufs_;
};

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

template <class T>
struct Linear {
    Param<T>* W = nullptr;  // [in, out]
    Param<T>* b = nullptr;  // [1, out]

    Linear() = default;
    Linear(ParamStore<T>& ps, const std::string& name, int in, int out)
        : W(&ps.add_glorot(name + ".W", in, out)), b(&ps.add_zeros(name + ".b", 1, out)) {}

    Var<T> operator()(Tape<T>& t, Var<T> x) const {
        return t.add_row(t.matmul(x, t.param(*W)), t.param(*b));
    }
};

/// Affine stack with ReLU between layers and identity output.
template <class T>
struct Mlp {
    std::vector<Linear<T>> layers;

    Mlp() = default;
    Mlp(ParamStore<T>& ps, const std::string& name, const std::vector<int>& dims) {
        if (dims.size() < 2) throw invariant_error("mlp: need at least one layer");
        for (size_t i = 0; i + 1 < dims.size(); ++i)
            layers.emplace_back(ps, name + ".l" + std::to_string(i), dims[i], dims[i + 1]);
    }

    Var<T> operator()(Tape<T>& t, Var<T> x) const {
        for (size_t i = 0; i < layers.size(); ++i) {
            x = layers[i](t, x);
            if (i + 1 < layers.size()) x = t.relu(x);
        }
        return x;
    }

    /// Variant with dropout after each internal activation (prediction head).
    template <class Rng>
    Var<T> forward_dropout(Tape<T>& t, Var<T> x, double p, Rng& rng) const {
        for (size_t i = 0; i < layers.size(); ++i) {
            x = layers[i](t, x);
            if (i + 1 < layers.size()) {
                x = t.relu(x);
                x = t.dropout(x, p, rng);
            }
        }
        return x;
    }
};

/// Standard GRU cell: h' = (1-z) ⊙ h + z ⊙ tanh(Wx + U(r⊙h) + b).
template <class T>
struct GruCell {
    Param<T>*Wz = nullptr, *Uz = nullptr, *bz = nullptr;
    Param<T>*Wr = nullptr, *Ur = nullptr, *br = nullptr;
    Param<T>*Wh = nullptr, *Uh = nullptr, *bh = nullptr;
    int in_dim = 0, hidden_dim = 0;

    GruCell() = default;
    GruCell(ParamStore<T>& ps, const std::string& name, int in, int hidden)
        : in_dim(in), hidden_dim(hidden) {
        Wz = &ps.add_glorot(name + ".Wz", in, hidden);
        Uz = &ps.add_glorot(name + ".Uz", hidden, hidden);
        bz = &ps.add_zeros(name + ".bz", 1, hidden);
        Wr = &ps.add_glorot(name + ".Wr", in, hidden);
        Ur = &ps.add_glorot(name + ".Ur", hidden, hidden);
        br = &ps.add_zeros(name + ".br", 1, hidden);
        Wh = &ps.add_glorot(name + ".Wh", in, hidden);
        Uh = &ps.add_glorot(name + ".Uh", hidden, hidden);
        bh = &ps.add_zeros(name + ".bh", 1, hidden);
    }

    /// x: [n, in], h: [n, hidden] -> [n, hidden]
    Var<T> operator()(Tape<T>& t, Var<T> x, Var<T> h) const {
        Var<T> z = t.sigmoid(t.add_row(
            t.add(t.matmul(x, t.param(*Wz)), t.matmul(h, t.param(*Uz))), t.param(*bz)));
        Var<T> r = t.sigmoid(t.add_row(
            t.add(t.matmul(x, t.param(*Wr)), t.matmul(h, t.param(*Ur))), t.param(*br)));
        Var<T> cand = t.tanh_(t.add_row(
            t.add(t.matmul(x, t.param(*Wh)), t.matmul(t.mul(r, h), t.param(*Uh))),
            t.param(*bh)));
        // (1-z)⊙h + z⊙cand, written as h + z⊙(cand - h)
        return t.add(h, t.mul(z, t.sub(cand, h)));
    }
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checking (always 64-bit)
// ---------------------------------------------------------------------------

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_coord;
    int64_t coords_checked = 0;
    int64_t kink_skipped = 0;
};

/// Central-difference check of analytic gradients left in `p.grad` by
/// `run_backward`. `eval` recomputes the scalar objective at the current
/// parameter values; it must be deterministic so the two perturbed
/// evaluations execute the same op sequence. A coordinate is excluded
/// (and counted) when perturbing it drives any abs/relu input across or
/// within `kink_gap` of its kink, where the subgradient convention and
/// the difference quotient legitimately disagree.
inline GradCheckReport grad_check(const std::vector<Param<double>*>& params,
                                  const std::function<double()>& eval,
                                  const std::function<void()>& run_backward, double h = 1e-5,
                                  double kink_gap = 1e-6) {
    run_backward();
    std::vector<Tensor<double>> analytic;
    analytic.reserve(params.size());
    for (auto* p : params) analytic.push_back(p->grad);

    GradCheckReport rep;
    std::vector<double> log_plus, log_minus;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Param<double>& p = *params[pi];
        for (int64_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value.data[i];
            log_plus.clear();
            tl_kink_log = &log_plus;
            p.value.data[i] = saved + h;
            const double fp = eval();
            log_minus.clear();
            tl_kink_log = &log_minus;
            p.value.data[i] = saved - h;
            const double fm = eval();
            tl_kink_log = nullptr;
            p.value.data[i] = saved;

            bool near_kink = log_plus.size() != log_minus.size();
            for (size_t k = 0; !near_kink && k < log_plus.size(); ++k) {
                const double a = log_plus[k], b = log_minus[k];
                if (a == b) continue;  // input untouched by this coordinate
                near_kink = (a > 0) != (b > 0) || (a < 0) != (b < 0) ||
                            std::min(std::abs(a), std::abs(b)) < kink_gap;
            }
            if (near_kink) {
                ++rep.kink_skipped;
                continue;
            }
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[pi].data[i];
            const double rel =
                std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            ++rep.coords_checked;
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_coord = p.name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return rep;
}

}  // namespace dsn::num

#endif  // DSN_NN_HPP

// AdamW with decoupled weight decay: the decay term is applied to the
// parameter value directly, never folded into the gradient moments.

#ifndef DSN_OPTIM_HPP
#define DSN_OPTIM_HPP

#include <cmath>
#include <vector>

#include "dsn/nn.hpp"

namespace dsn::num {

struct AdamWConfig {
    double lr = 1e-3;
    double weight_decay = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
class AdamW {
public:
    AdamW(ParamStore<T>& store, AdamWConfig cfg = {}) : store_(&store), cfg_(cfg) {
        m_.resize(store.size());
        v_.resize(store.size());
        for (size_t i = 0; i < store.size(); ++i) {
            m_[i] = Tensor<T>::zeros(store[i].value.rows, store[i].value.cols);
            v_[i] = Tensor<T>::zeros(store[i].value.rows, store[i].value.cols);
        }
    }

    const AdamWConfig& config() const { return cfg_; }
    int64_t step_count() const { return step_; }

    /// One update over every trainable parameter; a parameter whose gradient
    /// was never touched this step simply sees a zero gradient. Gradients
    /// are zeroed afterwards.
    void step() {
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (size_t pi = 0; pi < store_->size(); ++pi) {
            Param<T>& p = (*store_)[pi];
            if (!p.trainable) continue;
            T* w = p.value.ptr();
            T* g = p.grad.ptr();
            T* m = m_[pi].ptr();
            T* v = v_[pi].ptr();
            const int64_t n = p.value.size();
            for (int64_t i = 0; i < n; ++i) {
                const double gi = static_cast<double>(g[i]);
                const double mi = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
                const double vi = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
                m[i] = static_cast<T>(mi);
                v[i] = static_cast<T>(vi);
                const double mhat = mi / bc1;
                const double vhat = vi / bc2;
                const double upd = cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps) +
                                   cfg_.lr * cfg_.weight_decay * static_cast<double>(w[i]);
                w[i] = static_cast<T>(w[i] - upd);
                g[i] = T(0);
            }
        }
    }

    // Checkpoint access.
    std::vector<Tensor<T>>& moments1() { return m_; }
    std::vector<Tensor<T>>& moments2() { return v_; }
    const std::vector<Tensor<T>>& moments1() const { return m_; }
    const std::vector<Tensor<T>>& moments2() const { return v_; }
    void set_step_count(int64_t s) { step_ = s; }

private:
    ParamStore<T>* store_;
    AdamWConfig cfg_;
    int64_t step_ = 0;
    std::vector<Tensor<T>> m_, v_;
};

}  // namespace dsn::num

#endif  // DSN_OPTIM_HPP

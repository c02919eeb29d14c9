// Reverse-mode automatic differentiation over 2-D tensors, recorded at
// operation granularity on a per-computation tape. Tapes are cheap,
// single-use and single-threaded; parallelism happens across tapes with
// gradients routed through a GradSink so per-thread accumulators can be
// reduced deterministically afterwards.

#ifndef DSN_TAPE_HPP
#define DSN_TAPE_HPP

#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dsn/common.hpp"
#include "dsn/tensor.hpp"

namespace dsn::num {

// Global diagnostic switches. Finite checking scans every op output and
// throws on NaN/Inf. The kink log, when armed, records every abs/relu
// input in op order; the finite-difference checker compares the logs of
// its two perturbed evaluations to detect coordinates whose perturbation
// drives some input across a non-differentiable point.
inline bool g_finite_checks = true;
inline thread_local std::vector<double>* tl_kink_log = nullptr;

template <class T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool trainable = true;
    int id = -1;  // dense index within the owning ParamStore

    Param() = default;
    Param(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
        grad = Tensor<T>::zeros(value.rows, value.cols);
    }
};

/// Where leaf gradients land. The default sink is the parameter's own
/// accumulator; per-thread sinks override this during parallel batches.
template <class T>
class GradSink {
public:
    virtual ~GradSink() = default;
    virtual Tensor<T>& grad_for(Param<T>& p) { return p.grad; }
};

enum class Op : uint8_t {
    Leaf,
    Matmul,
    Add,
    Sub,
    Mul,
    AddRow,
    Scale,
    ScaleBy,
    ConcatCols,
    SliceCols,
    StackRows,
    SliceRows,
    Sigmoid,
    Tanh,
    Relu,
    Abs,
    Log,
    Exp,
    SoftmaxRows,
    Cosine,
    Sum,
    Mean,
    Dropout,
    CrossEntropy,
    GatherRows,
    MultiHeadAttn,
};

inline const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Matmul: return "matmul";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::AddRow: return "add_row";
        case Op::Scale: return "scale";
        case Op::ScaleBy: return "scale_by";
        case Op::ConcatCols: return "concat_cols";
        case Op::SliceCols: return "slice_cols";
        case Op::StackRows: return "stack_rows";
        case Op::SliceRows: return "slice_rows";
        case Op::Sigmoid: return "sigmoid";
        case Op::Tanh: return "tanh";
        case Op::Relu: return "relu";
        case Op::Abs: return "abs";
        case Op::Log: return "log";
        case Op::Exp: return "exp";
        case Op::SoftmaxRows: return "softmax_rows";
        case Op::Cosine: return "cosine";
        case Op::Sum: return "sum";
        case Op::Mean: return "mean";
        case Op::Dropout: return "dropout";
        case Op::CrossEntropy: return "cross_entropy";
        case Op::GatherRows: return "gather_rows";
        case Op::MultiHeadAttn: return "multihead_attn";
    }
    return "?";
}

template <class T>
class Tape;

template <class T>
struct Var {
    Tape<T>* tape = nullptr;
    int idx = -1;
    bool valid() const { return tape != nullptr && idx >= 0; }
};

template <class T>
class Tape {
public:
    struct Node {
        Tensor<T> value;                  // owned output (empty for ref leaves)
        const Tensor<T>* vref = nullptr;  // parameter leaves reference, never copy
        Tensor<T> grad;                   // empty until backward touches it
        Op op = Op::Leaf;
        int a = -1, b = -1;
        int list_begin = 0, list_len = 0;
        int i0 = 0, i1 = 0;
        double d0 = 0.0;
        uint8_t flags = 0;  // matmul: bit0 transA, bit1 transB
        bool requires_grad = false;
        Tensor<T> aux;
        Param<T>* param = nullptr;
        int param_row = -1;  // >= 0: leaf is a single row of the parameter
        Tensor<T>* ext_grad = nullptr;

        const Tensor<T>& out() const { return vref ? *vref : value; }
    };

    explicit Tape(GradSink<T>* sink = nullptr) : sink_(sink ? sink : &default_sink_) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    size_t num_nodes() const { return nodes_.size(); }

    const Tensor<T>& val(Var<T> v) const { return nodes_[v.idx].out(); }
    const Tensor<T>& grad_of(Var<T> v) const { return nodes_[v.idx].grad; }

    // -- leaves ------------------------------------------------------------

    Var<T> constant(Tensor<T> v) {
        Node n;
        n.value = std::move(v);
        n.requires_grad = false;
        return push(std::move(n));
    }

    Var<T> constant_scalar(T v) { return constant(Tensor<T>::scalar(v)); }

    /// Leaf whose gradient is forwarded to an external accumulator.
    Var<T> input(Tensor<T> v, Tensor<T>* ext) {
        Node n;
        n.value = std::move(v);
        n.requires_grad = true;
        n.ext_grad = ext;
        return push(std::move(n));
    }

    Var<T> param(Param<T>& p) {
        auto it = param_cache_.find(&p);
        if (it != param_cache_.end()) return Var<T>{this, it->second};
        Node n;
        n.vref = &p.value;
        n.requires_grad = p.trainable;
        n.param = &p;
        Var<T> v = push(std::move(n));
        param_cache_.emplace(&p, v.idx);
        return v;
    }

    /// A single row of a table parameter (embedding lookup). The gradient
    /// lands only in that row of the accumulator.
    Var<T> param_row(Param<T>& p, int row) {
        if (row < 0 || row >= p.value.rows) throw invariant_error("param_row: out of range");
        const uint64_t key = (static_cast<uint64_t>(row) << 1) | 1u;
        auto it = param_row_cache_.find({&p, key});
        if (it != param_row_cache_.end()) return Var<T>{this, it->second};
        Node n;
        n.value = Tensor<T>::zeros(1, p.value.cols);
        std::memcpy(n.value.ptr(), p.value.row_ptr(row), sizeof(T) * p.value.cols);
        n.requires_grad = p.trainable;
        n.param = &p;
        n.param_row = row;
        Var<T> v = push(std::move(n));
        param_row_cache_.emplace(std::make_pair(&p, key), v.idx);
        return v;
    }

    // -- ops ----------------------------------------------------------------

    Var<T> matmul(Var<T> a, Var<T> b, bool trans_a = false, bool trans_b = false) {
        const Tensor<T>&A = v(a), &B = v(b);
        const int m = trans_a ? A.cols : A.rows;
        const int ka = trans_a ? A.rows : A.cols;
        const int kb = trans_b ? B.cols : B.rows;
        const int nn = trans_b ? B.rows : B.cols;
        if (ka != kb)
            throw invariant_error("matmul: inner dims mismatch (" + shape_str(A) + " x " +
                                  shape_str(B) + (trans_a ? " tA" : "") + (trans_b ? " tB" : "") + ")");
        Node n;
        n.op = Op::Matmul;
        n.a = a.idx;
        n.b = b.idx;
        n.flags = static_cast<uint8_t>((trans_a ? 1 : 0) | (trans_b ? 2 : 0));
        n.value = Tensor<T>::zeros(m, nn);
        if (!trans_a && !trans_b) mm_nn(A, B, n.value);
        else if (!trans_a && trans_b) mm_nt(A, B, n.value);
        else if (trans_a && !trans_b) mm_tn(A, B, n.value);
        else mm_tt(A, B, n.value);
        return push_op(std::move(n), a, b);
    }

    Var<T> add(Var<T> a, Var<T> b) { return ew(Op::Add, a, b); }
    Var<T> sub(Var<T> a, Var<T> b) { return ew(Op::Sub, a, b); }
    Var<T> mul(Var<T> a, Var<T> b) { return ew(Op::Mul, a, b); }

    /// Broadcast-add a 1xN row vector onto every row of an MxN matrix.
    Var<T> add_row(Var<T> a, Var<T> b) {
        const Tensor<T>&A = v(a), &B = v(b);
        if (B.rows != 1 || A.cols != B.cols)
            throw invariant_error("add_row: want [m,n] + [1,n], got " + shape_str(A) + " + " +
                                  shape_str(B));
        Node n;
        n.op = Op::AddRow;
        n.a = a.idx;
        n.b = b.idx;
        n.value = A;
        for (int r = 0; r < A.rows; ++r) {
            T* dst = n.value.row_ptr(r);
            const T* src = B.ptr();
            for (int c = 0; c < A.cols; ++c) dst[c] += src[c];
        }
        return push_op(std::move(n), a, b);
    }

    Var<T> scale(Var<T> a, double c) {
        Node n;
        n.op = Op::Scale;
        n.a = a.idx;
        n.d0 = c;
        n.value = v(a);
        for (T& x : n.value.data) x = static_cast<T>(x * c);
        return push_op(std::move(n), a);
    }

    /// Elementwise multiply by a 1x1 tape scalar (e.g. a learnable rate).
    Var<T> scale_by(Var<T> a, Var<T> s) {
        if (v(s).size() != 1) throw invariant_error("scale_by: scalar operand must be 1x1");
        Node n;
        n.op = Op::ScaleBy;
        n.a = a.idx;
        n.b = s.idx;
        const T sv = v(s).item();
        n.value = v(a);
        for (T& x : n.value.data) x *= sv;
        return push_op(std::move(n), a, s);
    }

    Var<T> concat_cols(const std::vector<Var<T>>& parts) {
        if (parts.empty()) throw invariant_error("concat_cols: empty part list");
        const int rows = v(parts[0]).rows;
        int cols = 0;
        for (Var<T> p : parts) {
            if (v(p).rows != rows) throw invariant_error("concat_cols: row mismatch");
            cols += v(p).cols;
        }
        Node n;
        n.op = Op::ConcatCols;
        n.value = Tensor<T>::zeros(rows, cols);
        n.list_begin = static_cast<int>(list_pool_.size());
        n.list_len = static_cast<int>(parts.size());
        for (Var<T> p : parts) {
            list_pool_.push_back(p.idx);
            n.requires_grad = n.requires_grad || nodes_[p.idx].requires_grad;
        }
        int off = 0;
        for (Var<T> p : parts) {
            const Tensor<T>& src = v(p);
            for (int r = 0; r < rows; ++r)
                std::memcpy(n.value.row_ptr(r) + off, src.row_ptr(r), sizeof(T) * src.cols);
            off += src.cols;
        }
        return push(std::move(n));
    }

    Var<T> stack_rows(const std::vector<Var<T>>& parts) {
        if (parts.empty()) throw invariant_error("stack_rows: empty part list");
        const int cols = v(parts[0]).cols;
        int rows = 0;
        for (Var<T> p : parts) {
            if (v(p).cols != cols) throw invariant_error("stack_rows: column mismatch");
            rows += v(p).rows;
        }
        Node n;
        n.op = Op::StackRows;
        n.value = Tensor<T>::zeros(rows, cols);
        n.list_begin = static_cast<int>(list_pool_.size());
        n.list_len = static_cast<int>(parts.size());
        int off = 0;
        for (Var<T> p : parts) {
            list_pool_.push_back(p.idx);
            n.requires_grad = n.requires_grad || nodes_[p.idx].requires_grad;
            const Tensor<T>& src = v(p);
            std::memcpy(n.value.row_ptr(off), src.ptr(), sizeof(T) * src.size());
            off += src.rows;
        }
        return push(std::move(n));
    }

    Var<T> slice_cols(Var<T> a, int off, int len) {
        const Tensor<T>& A = v(a);
        if (off < 0 || len < 0 || off + len > A.cols)
            throw invariant_error("slice_cols: range out of bounds");
        Node n;
        n.op = Op::SliceCols;
        n.a = a.idx;
        n.i0 = off;
        n.i1 = len;
        n.value = Tensor<T>::zeros(A.rows, len);
        for (int r = 0; r < A.rows; ++r)
            std::memcpy(n.value.row_ptr(r), A.row_ptr(r) + off, sizeof(T) * len);
        return push_op(std::move(n), a);
    }

    Var<T> slice_rows(Var<T> a, int off, int len) {
        const Tensor<T>& A = v(a);
        if (off < 0 || len < 0 || off + len > A.rows)
            throw invariant_error("slice_rows: range out of bounds");
        Node n;
        n.op = Op::SliceRows;
        n.a = a.idx;
        n.i0 = off;
        n.i1 = len;
        n.value = Tensor<T>::zeros(len, A.cols);
        std::memcpy(n.value.ptr(), A.row_ptr(off), sizeof(T) * n.value.size());
        return push_op(std::move(n), a);
    }

    Var<T> sigmoid(Var<T> a) {
        Node n = unary(Op::Sigmoid, a);
        for (T& x : n.value.data) x = T(1) / (T(1) + std::exp(-x));
        return push_op(std::move(n), a);
    }

    Var<T> tanh_(Var<T> a) {
        Node n = unary(Op::Tanh, a);
        for (T& x : n.value.data) x = std::tanh(x);
        return push_op(std::move(n), a);
    }

    Var<T> relu(Var<T> a) {
        Node n = unary(Op::Relu, a);
        track_kinks(n.value);
        for (T& x : n.value.data) x = x > T(0) ? x : T(0);
        return push_op(std::move(n), a);
    }

    /// |x| with subgradient 0 at 0.
    Var<T> abs_(Var<T> a) {
        Node n = unary(Op::Abs, a);
        track_kinks(n.value);
        for (T& x : n.value.data) x = std::abs(x);
        return push_op(std::move(n), a);
    }

    Var<T> log_(Var<T> a) {
        Node n = unary(Op::Log, a);
        for (T& x : n.value.data) x = std::log(x);
        return push_op(std::move(n), a);
    }

    Var<T> exp_(Var<T> a) {
        Node n = unary(Op::Exp, a);
        for (T& x : n.value.data) x = std::exp(x);
        return push_op(std::move(n), a);
    }

    /// Row-wise softmax. Entries where mask==0 get exactly zero weight and
    /// receive exactly zero gradient; a fully masked row yields all zeros.
    Var<T> softmax_rows(Var<T> a, const Tensor<T>* mask = nullptr) {
        const Tensor<T>& A = v(a);
        if (mask && !mask->same_shape(A)) throw invariant_error("softmax_rows: mask shape mismatch");
        Node n;
        n.op = Op::SoftmaxRows;
        n.a = a.idx;
        n.value = Tensor<T>::zeros(A.rows, A.cols);
        if (mask) n.aux = *mask;
        for (int r = 0; r < A.rows; ++r) {
            const T* in = A.row_ptr(r);
            const T* m = mask ? mask->row_ptr(r) : nullptr;
            T* out = n.value.row_ptr(r);
            T mx = -std::numeric_limits<T>::infinity();
            for (int c = 0; c < A.cols; ++c)
                if (!m || m[c] != T(0)) mx = std::max(mx, in[c]);
            if (!std::isfinite(static_cast<double>(mx))) continue;  // fully masked row
            T denom = T(0);
            for (int c = 0; c < A.cols; ++c) {
                if (m && m[c] == T(0)) continue;
                out[c] = std::exp(in[c] - mx);
                denom += out[c];
            }
            for (int c = 0; c < A.cols; ++c) out[c] /= denom;
        }
        return push_op(std::move(n), a);
    }

    /// Cosine similarity of two equal-length vectors, stabilized as
    /// dot / max(|a||b|, 1e-8) so zero vectors contribute 0.
    Var<T> cosine(Var<T> a, Var<T> b) {
        const Tensor<T>&A = v(a), &B = v(b);
        if (A.size() != B.size()) throw invariant_error("cosine: length mismatch");
        double dot = 0, na2 = 0, nb2 = 0;
        for (int64_t i = 0; i < A.size(); ++i) {
            dot += static_cast<double>(A.data[i]) * B.data[i];
            na2 += static_cast<double>(A.data[i]) * A.data[i];
            nb2 += static_cast<double>(B.data[i]) * B.data[i];
        }
        const double na = std::sqrt(na2), nb = std::sqrt(nb2);
        const double denom = std::max(na * nb, 1e-8);
        Node n;
        n.op = Op::Cosine;
        n.a = a.idx;
        n.b = b.idx;
        n.value = Tensor<T>::scalar(static_cast<T>(dot / denom));
        n.aux = Tensor<T>::zeros(1, 4);
        n.aux.data = {static_cast<T>(dot), static_cast<T>(na), static_cast<T>(nb),
                      static_cast<T>(denom)};
        return push_op(std::move(n), a, b);
    }

    Var<T> sum(Var<T> a) { return reduce(Op::Sum, a); }
    Var<T> mean(Var<T> a) { return reduce(Op::Mean, a); }

    /// Inverted-scale dropout; mask entries are 0 or 1/(1-p).
    template <class Rng>
    Var<T> dropout(Var<T> a, double p, Rng& rng) {
        if (p <= 0.0) return a;
        if (p >= 1.0) throw invariant_error("dropout: p must be < 1");
        Node n;
        n.op = Op::Dropout;
        n.a = a.idx;
        n.d0 = p;
        const Tensor<T>& A = v(a);
        n.aux = Tensor<T>::zeros(A.rows, A.cols);
        const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
        for (int64_t i = 0; i < A.size(); ++i)
            n.aux.data[i] = (uniform01(rng) < p) ? T(0) : keep_scale;
        n.value = A;
        for (int64_t i = 0; i < A.size(); ++i) n.value.data[i] *= n.aux.data[i];
        return push_op(std::move(n), a);
    }

    /// -w * log(max(p[label], 1e-12)) for a probability row vector.
    Var<T> cross_entropy(Var<T> probs, int label, double weight) {
        const Tensor<T>& P = v(probs);
        if (P.rows != 1 || label < 0 || label >= P.cols)
            throw invariant_error("cross_entropy: bad label/shape");
        Node n;
        n.op = Op::CrossEntropy;
        n.a = probs.idx;
        n.i0 = label;
        n.d0 = weight;
        const double p = std::max(static_cast<double>(P.data[label]), 1e-12);
        n.value = Tensor<T>::scalar(static_cast<T>(-weight * std::log(p)));
        return push_op(std::move(n), probs);
    }

    // -- backward ------------------------------------------------------------

    void backward(Var<T> loss) {
        if (v(loss).size() != 1) throw invariant_error("backward: loss must be scalar");
        grad_buf(loss.idx).data[0] = T(1);
        sweep();
    }

    /// Backward pass seeded with externally accumulated output gradients.
    void backward_seeded(const std::vector<std::pair<Var<T>, const Tensor<T>*>>& seeds) {
        for (const auto& [var, g] : seeds) {
            if (!g->same_shape(v(var))) throw invariant_error("backward_seeded: seed shape mismatch");
            grad_buf(var.idx).add_in_place(*g);
        }
        sweep();
    }

private:
    struct RowKeyHash {
        size_t operator()(const std::pair<const Param<T>*, uint64_t>& k) const {
            return std::hash<const void*>()(k.first) ^ static_cast<size_t>(mix64(k.second));
        }
    };

    std::deque<Node> nodes_;
    std::vector<int> list_pool_;
    std::unordered_map<const Param<T>*, int> param_cache_;
    std::unordered_map<std::pair<const Param<T>*, uint64_t>, int, RowKeyHash> param_row_cache_;
    GradSink<T>* sink_;
    static inline GradSink<T> default_sink_;

    const Tensor<T>& v(Var<T> x) const { return nodes_[x.idx].out(); }
    const Tensor<T>& cval(int idx) const { return nodes_[idx].out(); }

    static std::string shape_str(const Tensor<T>& t) {
        return "[" + std::to_string(t.rows) + "," + std::to_string(t.cols) + "]";
    }

    template <class Rng>
    static double uniform01(Rng& rng) {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }

    void track_kinks(const Tensor<T>& t) {
        if (!tl_kink_log) return;
        for (const T& x : t.data) tl_kink_log->push_back(static_cast<double>(x));
    }

    Node unary(Op op, Var<T> a) {
        Node n;
        n.op = op;
        n.a = a.idx;
        n.value = v(a);
        return n;
    }

    Var<T> ew(Op op, Var<T> a, Var<T> b) {
        const Tensor<T>&A = v(a), &B = v(b);
        if (!A.same_shape(B))
            throw invariant_error(std::string(op_name(op)) + ": shape mismatch " + shape_str(A) +
                                  " vs " + shape_str(B));
        Node n;
        n.op = op;
        n.a = a.idx;
        n.b = b.idx;
        n.value = A;
        const T* src = B.ptr();
        T* dst = n.value.ptr();
        const int64_t total = A.size();
        switch (op) {
            case Op::Add:
                for (int64_t i = 0; i < total; ++i) dst[i] += src[i];
                break;
            case Op::Sub:
                for (int64_t i = 0; i < total; ++i) dst[i] -= src[i];
                break;
            case Op::Mul:
                for (int64_t i = 0; i < total; ++i) dst[i] *= src[i];
                break;
            default: break;
        }
        return push_op(std::move(n), a, b);
    }

    Var<T> reduce(Op op, Var<T> a) {
        Node n;
        n.op = op;
        n.a = a.idx;
        double acc = 0;
        for (const T& x : v(a).data) acc += static_cast<double>(x);
        if (op == Op::Mean) acc /= static_cast<double>(v(a).size());
        n.value = Tensor<T>::scalar(static_cast<T>(acc));
        return push_op(std::move(n), a);
    }

    Var<T> push(Node n) {
        nodes_.push_back(std::move(n));
        Node& node = nodes_.back();
        if (g_finite_checks && !node.vref && !node.value.all_finite())
            throw invariant_error(std::string("non-finite value after op ") + op_name(node.op));
        return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
    }

    Var<T> push_op(Node n, Var<T> a) {
        n.requires_grad = nodes_[a.idx].requires_grad;
        return push(std::move(n));
    }

    Var<T> push_op(Node n, Var<T> a, Var<T> b) {
        n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
        return push(std::move(n));
    }

    Tensor<T>& grad_buf(int idx) {
        Node& n = nodes_[idx];
        if (n.grad.empty()) n.grad = Tensor<T>::zeros(n.out().rows, n.out().cols);
        return n.grad;
    }

    bool wants_grad(int idx) const { return idx >= 0 && nodes_[idx].requires_grad; }

    void sweep() {
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            Node& n = nodes_[i];
            if (!n.requires_grad || n.grad.empty()) continue;
            step_backward(n);
        }
    }

    void step_backward(Node& n) {
        const Tensor<T>& gy = n.grad;
        switch (n.op) {
            case Op::Leaf: {
                if (n.param && n.param->trainable) {
                    Tensor<T>& acc = sink_->grad_for(*n.param);
                    if (n.param_row >= 0) {
                        T* dst = acc.row_ptr(n.param_row);
                        for (int c = 0; c < gy.cols; ++c) dst[c] += gy.data[c];
                    } else {
                        acc.add_in_place(gy);
                    }
                }
                if (n.ext_grad) n.ext_grad->add_in_place(gy);
                break;
            }
            case Op::Matmul: {
                const bool ta = n.flags & 1, tb = n.flags & 2;
                const Tensor<T>&A = cval(n.a), &B = cval(n.b);
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    // dA for C = op(A)op(B): four transpose cases
                    if (!ta && !tb) mm_nt(gy, B, ga);
                    else if (!ta && tb) mm_nn(gy, B, ga);
                    else if (ta && !tb) mm_nt(B, gy, ga);
                    else mm_tt(B, gy, ga);
                }
                if (wants_grad(n.b)) {
                    Tensor<T>& gb = grad_buf(n.b);
                    if (!ta && !tb) mm_tn(A, gy, gb);
                    else if (!ta && tb) mm_tn(gy, A, gb);
                    else if (ta && !tb) mm_nn(A, gy, gb);
                    else mm_tt(gy, A, gb);
                }
                break;
            }
            case Op::Add: {
                if (wants_grad(n.a)) grad_buf(n.a).add_in_place(gy);
                if (wants_grad(n.b)) grad_buf(n.b).add_in_place(gy);
                break;
            }
            case Op::Sub: {
                if (wants_grad(n.a)) grad_buf(n.a).add_in_place(gy);
                if (wants_grad(n.b)) {
                    Tensor<T>& gb = grad_buf(n.b);
                    for (int64_t i = 0; i < gy.size(); ++i) gb.data[i] -= gy.data[i];
                }
                break;
            }
            case Op::Mul: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& B = cval(n.b);
                    for (int64_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] * B.data[i];
                }
                if (wants_grad(n.b)) {
                    Tensor<T>& gb = grad_buf(n.b);
                    const Tensor<T>& A = cval(n.a);
                    for (int64_t i = 0; i < gy.size(); ++i) gb.data[i] += gy.data[i] * A.data[i];
                }
                break;
            }
            case Op::AddRow: {
                if (wants_grad(n.a)) grad_buf(n.a).add_in_place(gy);
                if (wants_grad(n.b)) {
                    Tensor<T>& gb = grad_buf(n.b);
                    for (int r = 0; r < gy.rows; ++r) {
                        const T* row = gy.row_ptr(r);
                        for (int c = 0; c < gy.cols; ++c) gb.data[c] += row[c];
                    }
                }
                break;
            }
            case Op::Scale: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const T c = static_cast<T>(n.d0);
                    for (int64_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] * c;
                }
                break;
            }
            case Op::ScaleBy: {
                const T s = cval(n.b).item();
                const Tensor<T>& A = cval(n.a);
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    for (int64_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] * s;
                }
                if (wants_grad(n.b)) {
                    T acc = T(0);
                    for (int64_t i = 0; i < gy.size(); ++i) acc += gy.data[i] * A.data[i];
                    grad_buf(n.b).data[0] += acc;
                }
                break;
            }
            case Op::ConcatCols: {
                int off = 0;
                for (int k = 0; k < n.list_len; ++k) {
                    const int src = list_pool_[n.list_begin + k];
                    const int w = nodes_[src].out().cols;
                    if (wants_grad(src)) {
                        Tensor<T>& gs = grad_buf(src);
                        for (int r = 0; r < gy.rows; ++r) {
                            const T* row = gy.row_ptr(r) + off;
                            T* dst = gs.row_ptr(r);
                            for (int c = 0; c < w; ++c) dst[c] += row[c];
                        }
                    }
                    off += w;
                }
                break;
            }
            case Op::StackRows: {
                int off = 0;
                for (int k = 0; k < n.list_len; ++k) {
                    const int src = list_pool_[n.list_begin + k];
                    const int h = nodes_[src].out().rows;
                    if (wants_grad(src)) {
                        Tensor<T>& gs = grad_buf(src);
                        for (int64_t i = 0; i < gs.size(); ++i)
                            gs.data[i] += gy.data[static_cast<int64_t>(off) * gy.cols + i];
                    }
                    off += h;
                }
                break;
            }
            case Op::SliceCols: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    for (int r = 0; r < gy.rows; ++r) {
                        T* dst = ga.row_ptr(r) + n.i0;
                        const T* src = gy.row_ptr(r);
                        for (int c = 0; c < n.i1; ++c) dst[c] += src[c];
                    }
                }
                break;
            }
            case Op::SliceRows: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    T* dst = ga.row_ptr(n.i0);
                    for (int64_t i = 0; i < gy.size(); ++i) dst[i] += gy.data[i];
                }
                break;
            }
            case Op::Sigmoid: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& y = n.value;
                    for (int64_t i = 0; i < gy.size(); ++i)
                        ga.data[i] += gy.data[i] * y.data[i] * (T(1) - y.data[i]);
                }
                break;
            }
            case Op::Tanh: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& y = n.value;
                    for (int64_t i = 0; i < gy.size(); ++i)
                        ga.data[i] += gy.data[i] * (T(1) - y.data[i] * y.data[i]);
                }
                break;
            }
            case Op::Relu: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& x = cval(n.a);
                    for (int64_t i = 0; i < gy.size(); ++i)
                        ga.data[i] += x.data[i] > T(0) ? gy.data[i] : T(0);
                }
                break;
            }
            case Op::Abs: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& x = cval(n.a);
                    for (int64_t i = 0; i < gy.size(); ++i) {
                        // subgradient 0 at exactly 0
                        if (x.data[i] > T(0)) ga.data[i] += gy.data[i];
                        else if (x.data[i] < T(0)) ga.data[i] -= gy.data[i];
                    }
                }
                break;
            }
            case Op::Log: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& x = cval(n.a);
                    for (int64_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] / x.data[i];
                }
                break;
            }
            case Op::Exp: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& y = n.value;
                    for (int64_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] * y.data[i];
                }
                break;
            }
            case Op::SoftmaxRows: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const Tensor<T>& y = n.value;
                    const bool masked = !n.aux.empty();
                    for (int r = 0; r < y.rows; ++r) {
                        const T* yr = y.row_ptr(r);
                        const T* gr = gy.row_ptr(r);
                        const T* mr = masked ? n.aux.row_ptr(r) : nullptr;
                        T dot = T(0);
                        for (int c = 0; c < y.cols; ++c) dot += gr[c] * yr[c];
                        T* out = ga.row_ptr(r);
                        for (int c = 0; c < y.cols; ++c) {
                            if (mr && mr[c] == T(0)) continue;  // exactly zero grad into masked
                            out[c] += yr[c] * (gr[c] - dot);
                        }
                    }
                }
                break;
            }
            case Op::Cosine: {
                const double dot = n.aux.data[0], na = n.aux.data[1], nb = n.aux.data[2],
                             denom = n.aux.data[3];
                const double g = static_cast<double>(gy.item());
                const Tensor<T>&A = cval(n.a), &B = cval(n.b);
                const bool clamped = na * nb < 1e-8;
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    for (int64_t i = 0; i < A.size(); ++i) {
                        double d = B.data[i] / denom;
                        if (!clamped && na > 0) d -= dot / denom * A.data[i] / (na * na);
                        ga.data[i] += static_cast<T>(g * d);
                    }
                }
                if (wants_grad(n.b)) {
                    Tensor<T>& gb = grad_buf(n.b);
                    for (int64_t i = 0; i < B.size(); ++i) {
                        double d = A.data[i] / denom;
                        if (!clamped && nb > 0) d -= dot / denom * B.data[i] / (nb * nb);
                        gb.data[i] += static_cast<T>(g * d);
                    }
                }
                break;
            }
            case Op::Sum: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const T g = gy.item();
                    for (T& x : ga.data) x += g;
                }
                break;
            }
            case Op::Mean: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const T g = gy.item() / static_cast<T>(ga.size());
                    for (T& x : ga.data) x += g;
                }
                break;
            }
            case Op::Dropout: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    for (int64_t i = 0; i < gy.size(); ++i)
                        ga.data[i] += gy.data[i] * n.aux.data[i];
                }
                break;
            }
            case Op::CrossEntropy: {
                if (wants_grad(n.a)) {
                    Tensor<T>& ga = grad_buf(n.a);
                    const double p = static_cast<double>(cval(n.a).data[n.i0]);
                    if (p >= 1e-12)  // inside the clamp the loss is constant
                        ga.data[n.i0] += static_cast<T>(-n.d0 * gy.item() / p);
                }
                break;
            }
        }
    }
};

}  // namespace dsn::num

#endif  // DSN_TAPE_HPP

// Dense row-major 2-D tensor. Vectors are 1xN. This is deliberately
// minimal: no broadcasting, no views, no strides. The scalar type is a
// template parameter so the same code paths serve 32-bit training and
// 64-bit verification.

#ifndef DSN_TENSOR_HPP
#define DSN_TENSOR_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dsn/common.hpp"

namespace dsn::num {

template <class T>
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, T(0)) {}

    static Tensor zeros(int r, int c) { return Tensor(r, c); }
    static Tensor full(int r, int c, T v) {
        Tensor t(r, c);
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
    static Tensor scalar(T v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }
    static Tensor row(std::vector<T> v) {
        Tensor t;
        t.rows = 1;
        t.cols = static_cast<int>(v.size());
        t.data = std::move(v);
        return t;
    }

    int64_t size() const { return static_cast<int64_t>(rows) * cols; }
    bool empty() const { return size() == 0; }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }
    T* row_ptr(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const T* row_ptr(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    T at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    T item() const {
        assert(size() == 1);
        return data[0];
    }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(T(0)); }

    void add_in_place(const Tensor& o) {
        assert(same_shape(o));
        const T* src = o.ptr();
        T* dst = ptr();
        for (int64_t i = 0, n = size(); i < n; ++i) dst[i] += src[i];
    }

    bool all_finite() const {
        // |x| sums propagate NaN and Inf, so one accumulation checks all
        // elements and the loop vectorizes; the double accumulator cannot
        // overflow on finite inputs
        double acc = 0;
        for (const T& v : data) acc += v < T(0) ? -static_cast<double>(v) : static_cast<double>(v);
        return std::isfinite(acc);
    }

    bool bit_equal(const Tensor& o) const {
        if (!same_shape(o)) return false;
        for (int64_t i = 0, n = size(); i < n; ++i)
            if (data[i] != o.data[i]) return false;
        return true;
    }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> t(rows, cols);
        for (int64_t i = 0, n = size(); i < n; ++i) t.data[i] = static_cast<U>(data[i]);
        return t;
    }
};

// ---------------------------------------------------------------------------
// Raw kernels (no autodiff). C is accumulated into, callers zero it first.
// ---------------------------------------------------------------------------

template <class T>
void mm_nn(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        T* __restrict ci = c.row_ptr(i);
        const T* __restrict ai = a.row_ptr(i);
        for (int p = 0; p < k; ++p) {
            const T av = ai[p];
            if (av == T(0)) continue;
            const T* __restrict bp = b.row_ptr(p);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

// a [m,k] * b^T where b is [n,k]
template <class T>
void mm_nt(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    assert(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows);
    const int m = a.rows, k = a.cols, n = b.rows;
    for (int i = 0; i < m; ++i) {
        const T* __restrict ai = a.row_ptr(i);
        T* __restrict ci = c.row_ptr(i);
        for (int j = 0; j < n; ++j) {
            const T* __restrict bj = b.row_ptr(j);
            T acc = T(0);
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
}

// a^T * b where a is [k,m], b is [k,n]
template <class T>
void mm_tn(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    const int k = a.rows, m = a.cols, n = b.cols;
    for (int p = 0; p < k; ++p) {
        const T* __restrict ap = a.row_ptr(p);
        const T* __restrict bp = b.row_ptr(p);
        for (int i = 0; i < m; ++i) {
            const T av = ap[i];
            if (av == T(0)) continue;
            T* __restrict ci = c.row_ptr(i);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

// a^T * b^T where a is [k,m], b is [n,k]
template <class T>
void mm_tt(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
    assert(a.rows == b.cols && c.rows == a.cols && c.cols == b.rows);
    const int k = a.rows, m = a.cols, n = b.rows;
    for (int i = 0; i < m; ++i) {
        T* __restrict ci = c.row_ptr(i);
        for (int j = 0; j < n; ++j) {
            const T* __restrict bj = b.row_ptr(j);
            T acc = T(0);
            for (int p = 0; p < k; ++p) acc += a.at(p, i) * bj[p];
            ci[j] += acc;
        }
    }
}

}  // namespace dsn::num

#endif  // DSN_TENSOR_HPP

// Independent plain multi-head attention stack (no decay term), written
// with bare loops against the model's parameter tensors. Serves as the
// reduction oracle for the psi = 0 equivalence checks.

#ifndef DSN_TESTS_REFERENCE_ATTENTION_HPP
#define DSN_TESTS_REFERENCE_ATTENTION_HPP

#include "dsn/nn.hpp"

namespace dsn::test {

inline num::Tensor<double> reference_plain_attention(const num::ParamStore<double>& ps,
                                                     int layers, int heads,
                                                     const num::Tensor<double>& q0,
                                                     const num::Tensor<double>& feats) {
    using num::Tensor;
    auto matmul = [](const Tensor<double>& a, const Tensor<double>& b) {
        Tensor<double> c(a.rows, b.cols);
        num::mm_nn(a, b, c);
        return c;
    };
    auto add_bias = [](Tensor<double> a, const Tensor<double>& b) {
        for (int r = 0; r < a.rows; ++r)
            for (int c = 0; c < a.cols; ++c) a.at(r, c) += b.data[c];
        return a;
    };
    const int dm = q0.cols;
    const int dh = dm / heads;
    Tensor<double> tokens =
        add_bias(matmul(feats, ps.at("attn.in_proj.W").value), ps.at("attn.in_proj.b").value);
    Tensor<double> q = q0;
    for (int l = 0; l < layers; ++l) {
        const std::string base = "attn.l" + std::to_string(l);
        Tensor<double> qp = matmul(q, ps.at(base + ".Wq").value);
        Tensor<double> kp = matmul(tokens, ps.at(base + ".Wk").value);
        Tensor<double> vp = matmul(tokens, ps.at(base + ".Wv").value);
        Tensor<double> heads_out(1, dm);
        for (int h = 0; h < heads; ++h) {
            std::vector<double> scores(static_cast<size_t>(tokens.rows));
            double mx = -1e300;
            for (int k = 0; k < tokens.rows; ++k) {
                double dot = 0;
                for (int d = 0; d < dh; ++d) dot += qp.at(0, h * dh + d) * kp.at(k, h * dh + d);
                scores[k] = dot / std::sqrt(static_cast<double>(dh));
                mx = std::max(mx, scores[k]);
            }
            double denom = 0;
            for (double& s : scores) {
                s = std::exp(s - mx);
                denom += s;
            }
            for (int k = 0; k < tokens.rows; ++k)
                for (int d = 0; d < dh; ++d)
                    heads_out.at(0, h * dh + d) += scores[k] / denom * vp.at(k, h * dh + d);
        }
        Tensor<double> attn = matmul(heads_out, ps.at(base + ".Wo").value);
        for (int c = 0; c < dm; ++c) q.at(0, c) += attn.at(0, c);
        Tensor<double> f1 =
            add_bias(matmul(q, ps.at(base + ".ff1.W").value), ps.at(base + ".ff1.b").value);
        for (double& x : f1.data) x = std::max(x, 0.0);
        Tensor<double> f2 =
            add_bias(matmul(f1, ps.at(base + ".ff2.W").value), ps.at(base + ".ff2.b").value);
        for (int c = 0; c < dm; ++c) q.at(0, c) += f2.at(0, c);
    }
    return q;
}

}  // namespace dsn::test

#endif  // DSN_TESTS_REFERENCE_ATTENTION_HPP

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sigmine/error.hpp"
#include "sigmine/rng.hpp"

namespace sigmine {

/// Dense rank-4 tensor, (batch, height, width, channels) row-major.
struct Tensor4 {
    int n = 0, h = 0, w = 0, c = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(int n_, int h_, int w_, int c_)
        : n(n_), h(h_), w(w_), c(c_),
          v(static_cast<std::size_t>(n_) * h_ * w_ * c_, 0.0) {
        if (n_ < 1 || h_ < 1 || w_ < 1 || c_ < 1)
            throw domain_error("tensor: dimensions must be positive");
    }

    std::size_t size() const { return v.size(); }

    std::size_t idx(int i, int y, int x, int ch) const {
        return ((static_cast<std::size_t>(i) * h + y) * w + x) * c + ch;
    }
    const double& at(int i, int y, int x, int ch) const { return v[idx(i, y, x, ch)]; }
    double& at(int i, int y, int x, int ch) { return v[idx(i, y, x, ch)]; }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && h == o.h && w == o.w && c == o.c;
    }
};

// ---------------------------------------------------------------------------
// Convolution (cross-correlation convention), valid padding, stride 1
// ---------------------------------------------------------------------------

/// Kernel layout: (kh, kw, in_channels, out_channels) stored in Tensor4
/// with n = kh, h = kw, w = in_channels, c = out_channels is too cute to
/// read back; kernels get their own named shape instead.
struct ConvKernel {
    int kh = 0, kw = 0, cin = 0, cout = 0;
    std::vector<double> v;

    ConvKernel() = default;
    ConvKernel(int kh_, int kw_, int cin_, int cout_)
        : kh(kh_), kw(kw_), cin(cin_), cout(cout_),
          v(static_cast<std::size_t>(kh_) * kw_ * cin_ * cout_, 0.0) {
        if (kh_ < 1 || kw_ < 1 || cin_ < 1 || cout_ < 1)
            throw domain_error("conv kernel: dimensions must be positive");
    }

    std::size_t idx(int ky, int kx, int ci, int co) const {
        return ((static_cast<std::size_t>(ky) * kw + kx) * cin + ci) * cout + co;
    }
    double at(int ky, int kx, int ci, int co) const { return v[idx(ky, kx, ci, co)]; }
    double& at(int ky, int kx, int ci, int co) { return v[idx(ky, kx, ci, co)]; }
};

inline Tensor4 conv2d_forward(const Tensor4& input, const ConvKernel& kernel,
                              const std::vector<double>& bias) {
    if (kernel.cin != input.c) throw domain_error("conv2d: channel mismatch");
    if (static_cast<int>(bias.size()) != kernel.cout) throw domain_error("conv2d: bias size mismatch");
    if (kernel.kh > input.h || kernel.kw > input.w)
        throw domain_error("conv2d: kernel larger than input");
    const int oh = input.h - kernel.kh + 1;
    const int ow = input.w - kernel.kw + 1;
    Tensor4 out(input.n, oh, ow, kernel.cout);
    for (int i = 0; i < input.n; ++i)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double* o = &out.at(i, y, x, 0);
                for (int co = 0; co < kernel.cout; ++co) o[co] = bias[static_cast<std::size_t>(co)];
                for (int ky = 0; ky < kernel.kh; ++ky)
                    for (int kx = 0; kx < kernel.kw; ++kx) {
                        const double* in = &input.at(i, y + ky, x + kx, 0);
                        const double* kr = &kernel.v[kernel.idx(ky, kx, 0, 0)];
                        for (int ci = 0; ci < kernel.cin; ++ci) {
                            const double iv = in[ci];
                            const double* kc = kr + static_cast<std::size_t>(ci) * kernel.cout;
                            for (int co = 0; co < kernel.cout; ++co) o[co] += iv * kc[co];
                        }
                    }
            }
    return out;
}

struct ConvGradients {
    Tensor4 input;
    ConvKernel kernel;
    std::vector<double> bias;
};

inline ConvGradients conv2d_backward(const Tensor4& input, const ConvKernel& kernel,
                                     const Tensor4& grad_out) {
    ConvGradients g;
    g.input = Tensor4(input.n, input.h, input.w, input.c);
    g.kernel = ConvKernel(kernel.kh, kernel.kw, kernel.cin, kernel.cout);
    g.bias.assign(static_cast<std::size_t>(kernel.cout), 0.0);
    for (int i = 0; i < input.n; ++i)
        for (int y = 0; y < grad_out.h; ++y)
            for (int x = 0; x < grad_out.w; ++x) {
                const double* go = &grad_out.at(i, y, x, 0);
                for (int co = 0; co < kernel.cout; ++co) g.bias[static_cast<std::size_t>(co)] += go[co];
                for (int ky = 0; ky < kernel.kh; ++ky)
                    for (int kx = 0; kx < kernel.kw; ++kx) {
                        const double* in = &input.at(i, y + ky, x + kx, 0);
                        double* gin = &g.input.at(i, y + ky, x + kx, 0);
                        for (int ci = 0; ci < kernel.cin; ++ci) {
                            const double* kc = &kernel.v[kernel.idx(ky, kx, ci, 0)];
                            double* gkc = &g.kernel.v[g.kernel.idx(ky, kx, ci, 0)];
                            double acc = 0.0;
                            for (int co = 0; co < kernel.cout; ++co) {
                                acc += kc[co] * go[co];
                                gkc[co] += in[ci] * go[co];
                            }
                            gin[ci] += acc;
                        }
                    }
            }
    return g;
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

inline Tensor4 relu_forward(const Tensor4& input) {
    Tensor4 out = input;
    for (auto& x : out.v) x = x > 0.0 ? x : 0.0;
    return out;
}

inline Tensor4 relu_backward(const Tensor4& input, const Tensor4& grad_out) {
    if (!input.same_shape(grad_out)) throw domain_error("relu backward: shape mismatch");
    Tensor4 g = grad_out;
    for (std::size_t i = 0; i < g.v.size(); ++i)
        if (input.v[i] <= 0.0) g.v[i] = 0.0;
    return g;
}

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2, trailing odd row/column dropped
// ---------------------------------------------------------------------------

struct PoolResult {
    Tensor4 out;
    std::vector<std::size_t> argmax; // flat input index per output value
};

inline PoolResult maxpool2x2(const Tensor4& input) {
    const int oh = input.h / 2;
    const int ow = input.w / 2;
    if (oh < 1 || ow < 1) throw domain_error("maxpool2x2: input too small");
    PoolResult r{Tensor4(input.n, oh, ow, input.c), {}};
    r.argmax.resize(r.out.size());
    for (int i = 0; i < input.n; ++i)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                for (int ch = 0; ch < input.c; ++ch) {
                    double best = -1e308;
                    std::size_t best_idx = 0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const std::size_t ii = input.idx(i, 2 * y + dy, 2 * x + dx, ch);
                            if (input.v[ii] > best) {
                                best = input.v[ii];
                                best_idx = ii;
                            }
                        }
                    const std::size_t oi = r.out.idx(i, y, x, ch);
                    r.out.v[oi] = best;
                    r.argmax[oi] = best_idx;
                }
    return r;
}

inline Tensor4 maxpool2x2_backward(const Tensor4& input, const PoolResult& pooled,
                                   const Tensor4& grad_out) {
    if (!pooled.out.same_shape(grad_out)) throw domain_error("maxpool backward: shape mismatch");
    Tensor4 g(input.n, input.h, input.w, input.c);
    for (std::size_t oi = 0; oi < grad_out.v.size(); ++oi) g.v[pooled.argmax[oi]] += grad_out.v[oi];
    return g;
}

// ---------------------------------------------------------------------------
// Dense layer over flattened features
// ---------------------------------------------------------------------------

/// logits[i][o] = bias[o] + sum_f input[i][f] * weight[f * out + o]
inline std::vector<double> dense_forward(const std::vector<double>& input, int batch, int in_dim,
                                         const std::vector<double>& weight,
                                         const std::vector<double>& bias, int out_dim) {
    if (weight.size() != static_cast<std::size_t>(in_dim) * out_dim ||
        bias.size() != static_cast<std::size_t>(out_dim) ||
        input.size() != static_cast<std::size_t>(batch) * in_dim)
        throw domain_error("dense: size mismatch");
    std::vector<double> logits(static_cast<std::size_t>(batch) * out_dim);
    for (int i = 0; i < batch; ++i) {
        double* z = logits.data() + static_cast<std::size_t>(i) * out_dim;
        for (int o = 0; o < out_dim; ++o) z[o] = bias[static_cast<std::size_t>(o)];
        const double* in = input.data() + static_cast<std::size_t>(i) * in_dim;
        for (int f = 0; f < in_dim; ++f) {
            const double iv = in[f];
            const double* wr = weight.data() + static_cast<std::size_t>(f) * out_dim;
            for (int o = 0; o < out_dim; ++o) z[o] += iv * wr[o];
        }
    }
    return logits;
}

struct DenseGradients {
    std::vector<double> input;
    std::vector<double> weight;
    std::vector<double> bias;
};

inline DenseGradients dense_backward(const std::vector<double>& input, int batch, int in_dim,
                                     const std::vector<double>& weight, int out_dim,
                                     const std::vector<double>& grad_logits) {
    DenseGradients g;
    g.input.assign(input.size(), 0.0);
    g.weight.assign(weight.size(), 0.0);
    g.bias.assign(static_cast<std::size_t>(out_dim), 0.0);
    for (int i = 0; i < batch; ++i) {
        const double* gz = grad_logits.data() + static_cast<std::size_t>(i) * out_dim;
        const double* in = input.data() + static_cast<std::size_t>(i) * in_dim;
        double* gin = g.input.data() + static_cast<std::size_t>(i) * in_dim;
        for (int o = 0; o < out_dim; ++o) g.bias[static_cast<std::size_t>(o)] += gz[o];
        for (int f = 0; f < in_dim; ++f) {
            const double* wr = weight.data() + static_cast<std::size_t>(f) * out_dim;
            double* gwr = g.weight.data() + static_cast<std::size_t>(f) * out_dim;
            double acc = 0.0;
            for (int o = 0; o < out_dim; ++o) {
                acc += wr[o] * gz[o];
                gwr[o] += in[f] * gz[o];
            }
            gin[f] += acc;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Softmax + mean cross-entropy
// ---------------------------------------------------------------------------

inline std::vector<double> softmax_rows(const std::vector<double>& logits, int batch, int classes) {
    std::vector<double> p(logits.size());
    for (int i = 0; i < batch; ++i) {
        const double* z = logits.data() + static_cast<std::size_t>(i) * classes;
        double* pi = p.data() + static_cast<std::size_t>(i) * classes;
        double m = z[0];
        for (int cl = 1; cl < classes; ++cl) m = std::max(m, z[cl]);
        double sum = 0.0;
        for (int cl = 0; cl < classes; ++cl) {
            pi[cl] = std::exp(z[cl] - m);
            sum += pi[cl];
        }
        for (int cl = 0; cl < classes; ++cl) pi[cl] /= sum;
    }
    return p;
}

/// Mean cross-entropy of softmax probabilities against integer labels,
/// probabilities floored at 1e-12 before the log.
inline double cross_entropy(const std::vector<double>& probs, int batch, int classes,
                            const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != batch) throw domain_error("cross_entropy: label count");
    double loss = 0.0;
    for (int i = 0; i < batch; ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        if (l < 0 || l >= classes) throw domain_error("cross_entropy: label out of range");
        loss -= std::log(std::max(probs[static_cast<std::size_t>(i) * classes + l], 1e-12));
    }
    return loss / batch;
}

/// d(mean CE)/d(logits) = (p - y) / batch, per row.
inline std::vector<double> cross_entropy_logit_grad(const std::vector<double>& probs, int batch,
                                                    int classes, const std::vector<int>& labels) {
    std::vector<double> g = probs;
    for (int i = 0; i < batch; ++i) g[static_cast<std::size_t>(i) * classes + labels[static_cast<std::size_t>(i)]] -= 1.0;
    for (auto& x : g) x /= batch;
    return g;
}

// ---------------------------------------------------------------------------
// Inverted dropout
// ---------------------------------------------------------------------------

/// Keeps each value with probability 1 - rate, scaling kept values by
/// 1 / (1 - rate) so expected activation is unchanged. The mask is drawn
/// from the supplied rng; inference code simply skips the call.
inline std::vector<double> dropout_mask(std::size_t size, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw domain_error("dropout rate outside [0, 1)");
    std::vector<double> mask(size, 1.0);
    if (rate == 0.0) return mask;
    const double scale = 1.0 / (1.0 - rate);
    for (auto& m : mask) m = rng.uniform() < rate ? 0.0 : scale;
    return mask;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

/// One bias-corrected Adam update; t is the 1-based step index.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, std::int64_t t, const AdamConfig& cfg) {
    if (params.size() != grads.size()) throw domain_error("adam_step: size mismatch");
    if (t < 1) throw domain_error("adam_step: step index must be >= 1");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) throw domain_error("adam_step: state size mismatch");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

/// He-uniform fill: limit sqrt(6 / fan_in).
inline void he_uniform_fill(std::vector<double>& params, int fan_in, Rng& rng) {
    if (fan_in < 1) throw domain_error("he_uniform_fill: fan_in < 1");
    const double limit = std::sqrt(6.0 / fan_in);
    for (auto& p : params) p = (rng.uniform() * 2.0 - 1.0) * limit;
}

} // namespace sigmine

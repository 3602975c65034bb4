#ifndef BEATNOTE_NN_HPP
#define BEATNOTE_NN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "beatnote/rng.hpp"

// Minimal layer kernels for the denoise+regress network. Activations are
// stored channel-major ([channel][position], contiguous per channel) so the
// inner loops stay vectorizable. Everything is templated on the scalar so
// tests can run the exact same code in double precision.

namespace beatnote::nn {

class ShapeError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel(shape)), T(0));
    }

    static long long numel(const std::vector<int>& s) {
        long long n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeError("tensor: non-positive dimension");
            n *= d;
        }
        return n;
    }

    std::size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), T(0)); }
};

// 1-D convolution with odd kernel and zero padding; output length equals
// input length.
template <typename T>
struct Conv1d {
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 0;
    Tensor<T> weight;  // [out_ch, in_ch, kernel]
    Tensor<T> bias;    // [out_ch]

    Conv1d() = default;
    Conv1d(int in_channels, int out_channels, int kernel_size)
        : in_ch(in_channels),
          out_ch(out_channels),
          kernel(kernel_size),
          weight({out_channels, in_channels, kernel_size}),
          bias({out_channels}) {
        if (kernel_size % 2 == 0) throw ShapeError("conv1d: kernel must be odd");
    }

    void forward(const T* in, int len, T* out) const {
        const int half = kernel / 2;
        for (int co = 0; co < out_ch; ++co) {
            T* o = out + static_cast<std::ptrdiff_t>(co) * len;
            std::fill(o, o + len, bias.data[static_cast<std::size_t>(co)]);
            for (int ci = 0; ci < in_ch; ++ci) {
                const T* x = in + static_cast<std::ptrdiff_t>(ci) * len;
                const T* w = weight.data.data() +
                             (static_cast<std::ptrdiff_t>(co) * in_ch + ci) * kernel;
                if (kernel == 5 && len >= 5) {
                    const T w0 = w[0], w1 = w[1], w2 = w[2], w3 = w[3], w4 = w[4];
                    o[0] += w2 * x[0] + w3 * x[1] + w4 * x[2];
                    o[1] += w1 * x[0] + w2 * x[1] + w3 * x[2] + w4 * x[3];
                    for (int i = 2; i < len - 2; ++i) {
                        o[i] += w0 * x[i - 2] + w1 * x[i - 1] + w2 * x[i] +
                                w3 * x[i + 1] + w4 * x[i + 2];
                    }
                    o[len - 2] += w0 * x[len - 4] + w1 * x[len - 3] + w2 * x[len - 2] +
                                  w3 * x[len - 1];
                    o[len - 1] += w0 * x[len - 3] + w1 * x[len - 2] + w2 * x[len - 1];
                    continue;
                }
                for (int j = 0; j < kernel; ++j) {
                    const int shift = j - half;
                    const int lo = std::max(0, -shift);
                    const int hi = std::min(len, len - shift);
                    const T wj = w[j];
                    for (int i = lo; i < hi; ++i) o[i] += wj * x[i + shift];
                }
            }
        }
    }

    // Accumulates parameter gradients into `grads` and, when grad_in is
    // non-null, writes the input gradient (grad_in is overwritten).
    void backward(const T* in, int len, const T* grad_out, T* grad_in,
                  Conv1d& grads) const {
        const int half = kernel / 2;
        for (int co = 0; co < out_ch; ++co) {
            const T* go = grad_out + static_cast<std::ptrdiff_t>(co) * len;
            T gb = T(0);
            for (int i = 0; i < len; ++i) gb += go[i];
            grads.bias.data[static_cast<std::size_t>(co)] += gb;
            for (int ci = 0; ci < in_ch; ++ci) {
                const T* x = in + static_cast<std::ptrdiff_t>(ci) * len;
                T* gw = grads.weight.data.data() +
                        (static_cast<std::ptrdiff_t>(co) * in_ch + ci) * kernel;
                if (kernel == 5 && len >= 5) {
                    T a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0;
                    for (int i = 2; i < len - 2; ++i) {
                        const T g = go[i];
                        a0 += g * x[i - 2];
                        a1 += g * x[i - 1];
                        a2 += g * x[i];
                        a3 += g * x[i + 1];
                        a4 += g * x[i + 2];
                    }
                    a2 += go[0] * x[0] + go[1] * x[1] + go[len - 2] * x[len - 2] +
                          go[len - 1] * x[len - 1];
                    a3 += go[0] * x[1] + go[1] * x[2] + go[len - 2] * x[len - 1];
                    a4 += go[0] * x[2] + go[1] * x[3];
                    a1 += go[1] * x[0] + go[len - 2] * x[len - 3] + go[len - 1] * x[len - 2];
                    a0 += go[len - 2] * x[len - 4] + go[len - 1] * x[len - 3];
                    gw[0] += a0;
                    gw[1] += a1;
                    gw[2] += a2;
                    gw[3] += a3;
                    gw[4] += a4;
                    continue;
                }
                for (int j = 0; j < kernel; ++j) {
                    const int shift = j - half;
                    const int lo = std::max(0, -shift);
                    const int hi = std::min(len, len - shift);
                    T acc = T(0);
                    for (int i = lo; i < hi; ++i) acc += go[i] * x[i + shift];
                    gw[j] += acc;
                }
            }
        }
        if (grad_in == nullptr) return;
        std::fill(grad_in, grad_in + static_cast<std::ptrdiff_t>(in_ch) * len, T(0));
        for (int co = 0; co < out_ch; ++co) {
            const T* go = grad_out + static_cast<std::ptrdiff_t>(co) * len;
            for (int ci = 0; ci < in_ch; ++ci) {
                T* gi = grad_in + static_cast<std::ptrdiff_t>(ci) * len;
                const T* w = weight.data.data() +
                             (static_cast<std::ptrdiff_t>(co) * in_ch + ci) * kernel;
                if (kernel == 5 && len >= 5) {
                    // gi[p] += sum_j w[j] * go[p - j + 2]: correlation with
                    // the reversed kernel
                    const T w0 = w[0], w1 = w[1], w2 = w[2], w3 = w[3], w4 = w[4];
                    gi[0] += w2 * go[0] + w1 * go[1] + w0 * go[2];
                    gi[1] += w3 * go[0] + w2 * go[1] + w1 * go[2] + w0 * go[3];
                    for (int p = 2; p < len - 2; ++p) {
                        gi[p] += w4 * go[p - 2] + w3 * go[p - 1] + w2 * go[p] +
                                 w1 * go[p + 1] + w0 * go[p + 2];
                    }
                    gi[len - 2] += w4 * go[len - 4] + w3 * go[len - 3] +
                                   w2 * go[len - 2] + w1 * go[len - 1];
                    gi[len - 1] += w4 * go[len - 3] + w3 * go[len - 2] + w2 * go[len - 1];
                    continue;
                }
                for (int j = 0; j < kernel; ++j) {
                    const int shift = j - half;
                    const int lo = std::max(0, -shift);
                    const int hi = std::min(len, len - shift);
                    const T wj = w[j];
                    for (int i = lo; i < hi; ++i) gi[i + shift] += wj * go[i];
                }
            }
        }
    }
};

template <typename T>
struct Dense {
    int in_dim = 0;
    int out_dim = 0;
    Tensor<T> weight;  // [out_dim, in_dim]
    Tensor<T> bias;    // [out_dim]

    Dense() = default;
    Dense(int in, int out)
        : in_dim(in), out_dim(out), weight({out, in}), bias({out}) {}

    void forward(const T* in, T* out) const {
        for (int o = 0; o < out_dim; ++o) {
            const T* w = weight.data.data() + static_cast<std::ptrdiff_t>(o) * in_dim;
            T acc = bias.data[static_cast<std::size_t>(o)];
            for (int i = 0; i < in_dim; ++i) acc += w[i] * in[i];
            out[o] = acc;
        }
    }

    void backward(const T* in, const T* grad_out, T* grad_in, Dense& grads) const {
        for (int o = 0; o < out_dim; ++o) {
            const T go = grad_out[o];
            grads.bias.data[static_cast<std::size_t>(o)] += go;
            T* gw = grads.weight.data.data() + static_cast<std::ptrdiff_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gw[i] += go * in[i];
        }
        if (grad_in == nullptr) return;
        std::fill(grad_in, grad_in + in_dim, T(0));
        for (int o = 0; o < out_dim; ++o) {
            const T go = grad_out[o];
            const T* w = weight.data.data() + static_cast<std::ptrdiff_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) grad_in[i] += w[i] * go;
        }
    }
};

template <typename T>
inline void relu_forward(const T* pre, int n, T* out) {
    for (int i = 0; i < n; ++i) out[i] = pre[i] > T(0) ? pre[i] : T(0);
}

// grad_in may alias grad_out.
template <typename T>
inline void relu_backward(const T* pre, const T* grad_out, int n, T* grad_in) {
    for (int i = 0; i < n; ++i) grad_in[i] = pre[i] > T(0) ? grad_out[i] : T(0);
}

// Fan-in scaled uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)).
template <typename T>
inline void init_uniform(Tensor<T>& t, int fan_in, Xoshiro256ss& rng) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (T& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

// Adaptive-moment update rule with bias correction. `t` is the 1-based step
// count; m and v are the running first/second moment buffers.
struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
inline void adam_update(T* param, const T* grad, T* m, T* v, std::size_t n,
                        long long t, const AdamParams& cfg) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        param[i] = static_cast<T>(param[i] -
                                  cfg.lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps));
    }
}

}  // namespace beatnote::nn

#endif  // BEATNOTE_NN_HPP

#ifndef BEATNOTE_MODEL_HPP
#define BEATNOTE_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "beatnote/nn.hpp"
#include "beatnote/signal.hpp"
#include "beatnote/single_tone.hpp"

namespace beatnote {

// Denoise+regress network. The denoise stage is a seq2seq-style
// encoder-decoder: conv blocks extract local oscillation features, a dense
// bottleneck mixes them globally (reconstructing the canonical zero-phase
// sinusoid requires the whole window, not a local receptive field), and a
// conv decoder emits the cleaned frame. The regression stage reads the
// cleaned frame and produces the normalized frequency.
//
//   input [1 x L] -> conv(c1,k)+relu -> conv(c2,k)+relu
//                 -> flatten -> dense(bottleneck)+relu
//                 -> dense(c3*L)+relu -> [c3 x L]
//                 -> conv(1,k)                      = clean_hat [1 x L]
//   clean_hat     -> conv(head_ch,k)+relu -> flatten
//                 -> dense(fc_dim)+relu -> dense(1) = freq_norm

struct ModelConfig {
    int input_len = 50;
    int kernel = 5;
    int c1 = 16;
    int c2 = 32;
    int bottleneck = 96;
    int c3 = 16;
    int head_ch = 16;
    int fc_dim = 64;
    // freq_norm = (f - freq_min_hz) / freq_span_hz
    double freq_min_hz = 100.0;
    double freq_span_hz = 400.0;
};

struct LossWeights {
    double w_clean = 1.0;
    double w_freq = 1.0;
};

class TrainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint16_t kModelFormatVersion = 1;

template <typename T>
struct FreqNetT {
    ModelConfig cfg;
    nn::Conv1d<T> enc1, enc2;
    nn::Dense<T> bott, expand;
    nn::Conv1d<T> dec_out;
    nn::Conv1d<T> head_conv;
    nn::Dense<T> fc1, fc2;

    explicit FreqNetT(const ModelConfig& config = ModelConfig{})
        : cfg(config),
          enc1(1, config.c1, config.kernel),
          enc2(config.c1, config.c2, config.kernel),
          bott(config.c2 * config.input_len, config.bottleneck),
          expand(config.bottleneck, config.c3 * config.input_len),
          dec_out(config.c3, 1, config.kernel),
          head_conv(1, config.head_ch, config.kernel),
          fc1(config.head_ch * config.input_len, config.fc_dim),
          fc2(config.fc_dim, 1) {}

    void init_weights(std::uint64_t seed) {
        Xoshiro256ss rng(seed);
        auto init_conv = [&rng](nn::Conv1d<T>& c) {
            nn::init_uniform(c.weight, c.in_ch * c.kernel, rng);
            c.bias.zero();
        };
        auto init_dense = [&rng](nn::Dense<T>& d) {
            nn::init_uniform(d.weight, d.in_dim, rng);
            d.bias.zero();
        };
        init_conv(enc1);
        init_conv(enc2);
        init_dense(bott);
        init_dense(expand);
        init_conv(dec_out);
        init_conv(head_conv);
        init_dense(fc1);
        init_dense(fc2);
    }

    void zero() {
        visit_params([](nn::Tensor<T>& t) { t.zero(); });
    }

    // Fixed traversal order; serialization, gradients and the optimizer all
    // rely on it.
    template <typename Fn>
    void visit_params(Fn&& fn) {
        fn(enc1.weight);
        fn(enc1.bias);
        fn(enc2.weight);
        fn(enc2.bias);
        fn(bott.weight);
        fn(bott.bias);
        fn(expand.weight);
        fn(expand.bias);
        fn(dec_out.weight);
        fn(dec_out.bias);
        fn(head_conv.weight);
        fn(head_conv.bias);
        fn(fc1.weight);
        fn(fc1.bias);
        fn(fc2.weight);
        fn(fc2.bias);
    }

    template <typename Fn>
    void visit_params(Fn&& fn) const {
        fn(enc1.weight);
        fn(enc1.bias);
        fn(enc2.weight);
        fn(enc2.bias);
        fn(bott.weight);
        fn(bott.bias);
        fn(expand.weight);
        fn(expand.bias);
        fn(dec_out.weight);
        fn(dec_out.bias);
        fn(head_conv.weight);
        fn(head_conv.bias);
        fn(fc1.weight);
        fn(fc1.bias);
        fn(fc2.weight);
        fn(fc2.bias);
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        visit_params([&n](const nn::Tensor<T>& t) { n += t.size(); });
        return n;
    }

    struct Workspace {
        std::vector<T> x;                    // standardized input [1 x L]
        std::vector<T> e1_pre, e1;           // [c1 x L]
        std::vector<T> e2_pre, e2;           // [c2 x L]
        std::vector<T> b_pre, b;             // [bottleneck]
        std::vector<T> x3_pre, x3;           // [c3 x L]
        std::vector<T> clean_hat;            // [1 x L]
        std::vector<T> h_pre, h;             // [head_ch x L]
        std::vector<T> f1_pre, f1;           // [fc_dim]
        T freq_norm = T(0);
        // backward scratch
        std::vector<T> d_e1, d_e2, d_b, d_x3, d_clean, d_h, d_f1;

        explicit Workspace(const ModelConfig& c) {
            const auto L = static_cast<std::size_t>(c.input_len);
            x.resize(L);
            e1_pre.resize(static_cast<std::size_t>(c.c1) * L);
            e1.resize(e1_pre.size());
            e2_pre.resize(static_cast<std::size_t>(c.c2) * L);
            e2.resize(e2_pre.size());
            b_pre.resize(static_cast<std::size_t>(c.bottleneck));
            b.resize(b_pre.size());
            x3_pre.resize(static_cast<std::size_t>(c.c3) * L);
            x3.resize(x3_pre.size());
            clean_hat.resize(L);
            h_pre.resize(static_cast<std::size_t>(c.head_ch) * L);
            h.resize(h_pre.size());
            f1_pre.resize(static_cast<std::size_t>(c.fc_dim));
            f1.resize(f1_pre.size());
            d_e1.resize(e1.size());
            d_e2.resize(e2.size());
            d_b.resize(b.size());
            d_x3.resize(x3.size());
            d_clean.resize(L);
            d_h.resize(h.size());
            d_f1.resize(f1.size());
        }
    };

    // `x` must hold cfg.input_len standardized samples.
    void forward(const T* x, Workspace& ws) const {
        const int L = cfg.input_len;
        std::copy(x, x + L, ws.x.begin());
        enc1.forward(ws.x.data(), L, ws.e1_pre.data());
        nn::relu_forward(ws.e1_pre.data(), cfg.c1 * L, ws.e1.data());
        enc2.forward(ws.e1.data(), L, ws.e2_pre.data());
        nn::relu_forward(ws.e2_pre.data(), cfg.c2 * L, ws.e2.data());
        bott.forward(ws.e2.data(), ws.b_pre.data());
        nn::relu_forward(ws.b_pre.data(), cfg.bottleneck, ws.b.data());
        expand.forward(ws.b.data(), ws.x3_pre.data());
        nn::relu_forward(ws.x3_pre.data(), cfg.c3 * L, ws.x3.data());
        dec_out.forward(ws.x3.data(), L, ws.clean_hat.data());
        head_conv.forward(ws.clean_hat.data(), L, ws.h_pre.data());
        nn::relu_forward(ws.h_pre.data(), cfg.head_ch * L, ws.h.data());
        fc1.forward(ws.h.data(), ws.f1_pre.data());
        nn::relu_forward(ws.f1_pre.data(), cfg.fc_dim, ws.f1.data());
        T out;
        fc2.forward(ws.f1.data(), &out);
        ws.freq_norm = out;
    }

    // d_clean_hat: gradient of the loss w.r.t. clean_hat (length L, may be
    // null for a frequency-only objective); d_freq_norm: gradient w.r.t.
    // the scalar output. Parameter gradients accumulate into `grads`; the
    // workspace provides the backward scratch, so one workspace per thread
    // keeps a shared const net race-free.
    void backward(Workspace& ws, const T* d_clean_hat, T d_freq_norm,
                  FreqNetT& grads) const {
        const int L = cfg.input_len;
        Workspace& s = ws;

        fc2.backward(ws.f1.data(), &d_freq_norm, s.d_f1.data(), grads.fc2);
        nn::relu_backward(ws.f1_pre.data(), s.d_f1.data(), cfg.fc_dim, s.d_f1.data());
        fc1.backward(ws.h.data(), s.d_f1.data(), s.d_h.data(), grads.fc1);
        nn::relu_backward(ws.h_pre.data(), s.d_h.data(), cfg.head_ch * L, s.d_h.data());
        head_conv.backward(ws.clean_hat.data(), L, s.d_h.data(), s.d_clean.data(),
                           grads.head_conv);
        if (d_clean_hat != nullptr) {
            for (int i = 0; i < L; ++i) s.d_clean[static_cast<std::size_t>(i)] += d_clean_hat[i];
        }
        dec_out.backward(ws.x3.data(), L, s.d_clean.data(), s.d_x3.data(), grads.dec_out);
        nn::relu_backward(ws.x3_pre.data(), s.d_x3.data(), cfg.c3 * L, s.d_x3.data());
        expand.backward(ws.b.data(), s.d_x3.data(), s.d_b.data(), grads.expand);
        nn::relu_backward(ws.b_pre.data(), s.d_b.data(), cfg.bottleneck, s.d_b.data());
        bott.backward(ws.e2.data(), s.d_b.data(), s.d_e2.data(), grads.bott);
        nn::relu_backward(ws.e2_pre.data(), s.d_e2.data(), cfg.c2 * L, s.d_e2.data());
        enc2.backward(ws.e1.data(), L, s.d_e2.data(), s.d_e1.data(), grads.enc2);
        nn::relu_backward(ws.e1_pre.data(), s.d_e1.data(), cfg.c1 * L, s.d_e1.data());
        enc1.backward(ws.x.data(), L, s.d_e1.data(), nullptr, grads.enc1);
    }

    double denormalize(double freq_norm) const {
        return cfg.freq_min_hz + cfg.freq_span_hz * freq_norm;
    }

    double normalize(double freq_hz) const {
        return (freq_hz - cfg.freq_min_hz) / cfg.freq_span_hz;
    }

};

using FreqNet = FreqNetT<float>;

// Per-window standardization applied before the network: remove the mean,
// divide by the standard deviation (guarded for constant windows).
void standardize_window(const SignalWindow& window, std::vector<float>& out);

// forward + denormalization conveniences on the float net -------------------

struct ForwardResult {
    SignalWindow clean_hat;
    double freq_norm = 0.0;
    double frequency_hz = 0.0;
};

/// Runs the full denoise+regress forward pass. Throws nn::ShapeError when
/// the window length does not match the model input length.
ForwardResult model_forward(const FreqNet& net, const SignalWindow& window);

/// Frequency-only inference wrapper used by sweeps, the mask and the CLI.
FreqEstimate nn_estimate(const FreqNet& net, const SignalWindow& window);

// Loss -----------------------------------------------------------------------

/// w_clean * MSE(clean_hat, clean) + w_freq * (freq_norm_hat - freq_norm)^2.
/// Throws nn::ShapeError on mismatched lengths.
double loss_value(const std::vector<float>& clean_hat, const std::vector<float>& clean,
                  double freq_norm_hat, double freq_norm, const LossWeights& w);

// Adam ------------------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamOptimizer {
public:
    AdamOptimizer(FreqNet& net, AdamConfig cfg);

    /// One update from accumulated gradients (same traversal order as the
    /// model). Throws TrainError when any gradient is non-finite.
    void step(FreqNet& net, const FreqNet& grads);

    void set_lr(double lr) { cfg_.lr = lr; }
    long long steps_taken() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<float> m_, v_;
    long long t_ = 0;
};

// Serialization ("BNMD") ------------------------------------------------------

void save_model(std::ostream& out, const FreqNet& net);
void save_model_file(const std::string& path, const FreqNet& net);
FreqNet load_model(std::istream& in);
FreqNet load_model_file(const std::string& path);

}  // namespace beatnote

#endif  // BEATNOTE_MODEL_HPP

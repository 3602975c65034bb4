#include "beatnote/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "binary_io.hpp"

namespace beatnote {

using detail::get_le;
using detail::put_le;

void standardize_window(const SignalWindow& window, std::vector<float>& out) {
    const std::size_t n = window.size();
    out.resize(n);
    double mean = 0.0;
    for (float v : window.samples) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (float v : window.samples) {
        const double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::max(std::sqrt(var), 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>((window.samples[i] - mean) * inv_std);
    }
}

ForwardResult model_forward(const FreqNet& net, const SignalWindow& window) {
    if (static_cast<int>(window.size()) != net.cfg.input_len) {
        throw nn::ShapeError("model_forward: window length does not match model input");
    }
    thread_local std::vector<float> x;
    standardize_window(window, x);
    FreqNet::Workspace ws(net.cfg);
    net.forward(x.data(), ws);
    ForwardResult res;
    res.clean_hat.sample_rate_hz = window.sample_rate_hz;
    res.clean_hat.samples = ws.clean_hat;
    res.freq_norm = ws.freq_norm;
    res.frequency_hz = net.denormalize(ws.freq_norm);
    return res;
}

FreqEstimate nn_estimate(const FreqNet& net, const SignalWindow& window) {
    if (static_cast<int>(window.size()) != net.cfg.input_len) {
        throw nn::ShapeError("nn_estimate: window length does not match model input");
    }
    thread_local std::vector<float> x;
    thread_local std::unique_ptr<FreqNet::Workspace> ws;
    const auto L = static_cast<std::size_t>(net.cfg.input_len);
    if (ws == nullptr || ws->x.size() != L ||
        ws->e1.size() != static_cast<std::size_t>(net.cfg.c1) * L ||
        ws->e2.size() != static_cast<std::size_t>(net.cfg.c2) * L ||
        ws->b.size() != static_cast<std::size_t>(net.cfg.bottleneck) ||
        ws->x3.size() != static_cast<std::size_t>(net.cfg.c3) * L ||
        ws->h.size() != static_cast<std::size_t>(net.cfg.head_ch) * L ||
        ws->f1.size() != static_cast<std::size_t>(net.cfg.fc_dim)) {
        ws = std::make_unique<FreqNet::Workspace>(net.cfg);
    }
    standardize_window(window, x);
    net.forward(x.data(), *ws);

    // RMS-derived sine amplitude of the raw window; the network itself only
    // regresses frequency.
    double mean = 0.0;
    for (float v : window.samples) mean += v;
    mean /= static_cast<double>(window.size());
    double var = 0.0;
    for (float v : window.samples) {
        const double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(window.size());

    FreqEstimate est;
    est.method = Method::NeuralNet;
    // linear output head; clamp to the physical band
    est.frequency_hz =
        std::clamp(net.denormalize(ws->freq_norm), 0.0, window.sample_rate_hz / 2.0);
    est.amplitude = std::sqrt(2.0 * var);
    return est;
}

double loss_value(const std::vector<float>& clean_hat, const std::vector<float>& clean,
                  double freq_norm_hat, double freq_norm, const LossWeights& w) {
    if (clean_hat.size() != clean.size()) {
        throw nn::ShapeError("loss: clean/clean_hat length mismatch");
    }
    if (w.w_clean < 0.0 || w.w_freq < 0.0 || (w.w_clean == 0.0 && w.w_freq == 0.0)) {
        throw std::invalid_argument("loss: weights must be non-negative, not both zero");
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double d = static_cast<double>(clean_hat[i]) - clean[i];
        mse += d * d;
    }
    mse /= static_cast<double>(clean.size());
    const double df = freq_norm_hat - freq_norm;
    return w.w_clean * mse + w.w_freq * df * df;
}

AdamOptimizer::AdamOptimizer(FreqNet& net, AdamConfig cfg) : cfg_(cfg) {
    m_.assign(net.param_count(), 0.0f);
    v_.assign(net.param_count(), 0.0f);
}

void AdamOptimizer::step(FreqNet& net, const FreqNet& grads) {
    std::vector<const nn::Tensor<float>*> gs;
    grads.visit_params([&gs](const nn::Tensor<float>& t) { gs.push_back(&t); });
    for (const nn::Tensor<float>* g : gs) {
        for (float v : g->data) {
            if (!std::isfinite(v)) {
                throw TrainError("optimizer: non-finite gradient (training diverged)");
            }
        }
    }

    ++t_;
    const nn::AdamParams params{cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps};
    std::size_t offset = 0;
    std::size_t gi = 0;
    net.visit_params([&](nn::Tensor<float>& p) {
        nn::adam_update(p.data.data(), gs[gi++]->data.data(), m_.data() + offset,
                        v_.data() + offset, p.size(), t_, params);
        offset += p.size();
    });
}

// BNMD layout, all little-endian:
//   magic "BNMD" | version u16 | input_len u16 | freq_min f32 | freq_span f32 |
//   layer count u16 | per layer: kind u8 (0 conv, 1 dense), in u16, out u16,
//   kernel u16 (0 for dense) |
//   tensor count u16 | per tensor: name (u16 len + bytes), ndim u8,
//   dims u32 each, f32 data

namespace {

struct LayerDesc {
    std::uint8_t kind;
    int in, out, kernel;
};

void write_tensor(std::ostream& out, const std::string& name,
                  const nn::Tensor<float>& t) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (int d : t.shape) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : t.data) put_le<float>(out, v);
}

void read_tensor_into(std::istream& in, const std::string& expect_name,
                      nn::Tensor<float>& t) {
    const auto name_len = get_le<std::uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != expect_name) {
        throw IoError("model: unexpected tensor name '" + name + "', expected '" +
                      expect_name + "'");
    }
    const auto ndim = get_le<std::uint8_t>(in);
    if (ndim != t.shape.size()) throw IoError("model: tensor rank mismatch for " + name);
    std::size_t n = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
        const auto dim = get_le<std::uint32_t>(in);
        if (static_cast<int>(dim) != t.shape[d]) {
            throw IoError("model: tensor shape mismatch for " + name);
        }
        n *= dim;
    }
    for (std::size_t i = 0; i < n; ++i) t.data[i] = get_le<float>(in);
}

const char* const kTensorNames[] = {
    "enc1.weight",      "enc1.bias",      "enc2.weight",   "enc2.bias",
    "bottleneck.weight", "bottleneck.bias", "expand.weight", "expand.bias",
    "dec_out.weight",   "dec_out.bias",   "head_conv.weight", "head_conv.bias",
    "fc1.weight",       "fc1.bias",       "fc2.weight",    "fc2.bias"};

constexpr int kLayerCount = 8;
constexpr int kTensorCount = 16;

}  // namespace

void save_model(std::ostream& out, const FreqNet& net) {
    out.write("BNMD", 4);
    put_le<std::uint16_t>(out, kModelFormatVersion);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(net.cfg.input_len));
    put_le<float>(out, static_cast<float>(net.cfg.freq_min_hz));
    put_le<float>(out, static_cast<float>(net.cfg.freq_span_hz));

    const int len = net.cfg.input_len;
    const LayerDesc layers[kLayerCount] = {
        {0, 1, net.cfg.c1, net.cfg.kernel},
        {0, net.cfg.c1, net.cfg.c2, net.cfg.kernel},
        {1, net.cfg.c2 * len, net.cfg.bottleneck, 0},
        {1, net.cfg.bottleneck, net.cfg.c3 * len, 0},
        {0, net.cfg.c3, 1, net.cfg.kernel},
        {0, 1, net.cfg.head_ch, net.cfg.kernel},
        {1, net.cfg.head_ch * len, net.cfg.fc_dim, 0},
        {1, net.cfg.fc_dim, 1, 0},
    };
    put_le<std::uint16_t>(out, kLayerCount);
    for (const LayerDesc& l : layers) {
        put_le<std::uint8_t>(out, l.kind);
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(l.in));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(l.out));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(l.kernel));
    }

    put_le<std::uint16_t>(out, kTensorCount);
    std::size_t idx = 0;
    net.visit_params([&](const nn::Tensor<float>& t) {
        write_tensor(out, kTensorNames[idx++], t);
    });
    if (!out) throw IoError("model: write failed");
}

void save_model_file(const std::string& path, const FreqNet& net) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("model: cannot open for writing: " + path);
    save_model(out, net);
}

FreqNet load_model(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "BNMD", 4) != 0) throw IoError("model: bad magic");
    const auto version = get_le<std::uint16_t>(in);
    if (version != kModelFormatVersion) {
        throw IoError("model: unsupported format version " + std::to_string(version));
    }

    ModelConfig cfg;
    cfg.input_len = get_le<std::uint16_t>(in);
    cfg.freq_min_hz = get_le<float>(in);
    cfg.freq_span_hz = get_le<float>(in);

    const auto n_layers = get_le<std::uint16_t>(in);
    if (n_layers != kLayerCount) throw IoError("model: unexpected layer count");
    LayerDesc layers[kLayerCount];
    for (LayerDesc& l : layers) {
        l.kind = get_le<std::uint8_t>(in);
        l.in = get_le<std::uint16_t>(in);
        l.out = get_le<std::uint16_t>(in);
        l.kernel = get_le<std::uint16_t>(in);
    }
    const std::uint8_t expect_kinds[kLayerCount] = {0, 0, 1, 1, 0, 0, 1, 1};
    for (int i = 0; i < kLayerCount; ++i) {
        if (layers[i].kind != expect_kinds[i]) throw IoError("model: unexpected layer kind");
    }
    const int len = cfg.input_len;
    cfg.kernel = layers[0].kernel;
    cfg.c1 = layers[0].out;
    cfg.c2 = layers[1].out;
    cfg.bottleneck = layers[2].out;
    if (len <= 0 || layers[3].out % len != 0) throw IoError("model: incompatible layer chain");
    cfg.c3 = layers[3].out / len;
    cfg.head_ch = layers[5].out;
    cfg.fc_dim = layers[6].out;
    // chain compatibility
    if (layers[0].in != 1 || layers[1].in != cfg.c1 || layers[2].in != cfg.c2 * len ||
        layers[3].in != cfg.bottleneck || layers[4].in != cfg.c3 ||
        layers[4].out != 1 || layers[5].in != 1 ||
        layers[6].in != cfg.head_ch * len || layers[7].in != cfg.fc_dim ||
        layers[7].out != 1) {
        throw IoError("model: incompatible layer chain");
    }

    FreqNet net(cfg);
    const auto n_tensors = get_le<std::uint16_t>(in);
    if (n_tensors != kTensorCount) throw IoError("model: unexpected tensor count");
    std::size_t idx = 0;
    net.visit_params([&](nn::Tensor<float>& t) {
        read_tensor_into(in, kTensorNames[idx++], t);
    });
    net.visit_params([](const nn::Tensor<float>& t) {
        for (float v : t.data) {
            if (!std::isfinite(v)) throw IoError("model: non-finite weights");
        }
    });
    return net;
}

FreqNet load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("model: cannot open: " + path);
    return load_model(in);
}

}  // namespace beatnote

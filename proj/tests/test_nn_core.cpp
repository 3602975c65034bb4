#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "beatnote/dataset_io.hpp"
#include "beatnote/model.hpp"
#include "beatnote/nn.hpp"
#include "beatnote/rng.hpp"
#include "beatnote/signal.hpp"

using namespace beatnote;

namespace {

void fill_random(std::vector<double>& v, Xoshiro256ss& rng, double scale = 1.0) {
    for (double& x : v) x = scale * rng.uniform(-1.0, 1.0);
}

// Relative error between an analytic derivative and a central difference.
double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-10});
    return std::abs(analytic - numeric) / denom;
}

}  // namespace

TEST_CASE("tensor: shape bookkeeping") {
    nn::Tensor<float> t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK_THROWS_AS(nn::Tensor<float>({2, 0}), nn::ShapeError);
}

TEST_CASE("conv1d gradients match central finite differences") {
    const int in_ch = 3, out_ch = 4, k = 5, len = 12;
    nn::Conv1d<double> conv(in_ch, out_ch, k);
    Xoshiro256ss rng(11);
    fill_random(conv.weight.data, rng);
    fill_random(conv.bias.data, rng, 0.1);

    std::vector<double> x(static_cast<std::size_t>(in_ch) * len);
    fill_random(x, rng);
    std::vector<double> proj(static_cast<std::size_t>(out_ch) * len);
    fill_random(proj, rng);  // random linear objective sum(out * proj)

    auto objective = [&](const nn::Conv1d<double>& c, const std::vector<double>& in) {
        std::vector<double> out(static_cast<std::size_t>(out_ch) * len);
        c.forward(in.data(), len, out.data());
        double obj = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) obj += out[i] * proj[i];
        return obj;
    };

    nn::Conv1d<double> grads(in_ch, out_ch, k);
    std::vector<double> grad_in(x.size());
    conv.backward(x.data(), len, proj.data(), grad_in.data(), grads);

    const double h = 1e-6;
    for (std::size_t i = 0; i < conv.weight.size(); i += 7) {
        nn::Conv1d<double> p = conv;
        p.weight.data[i] += h;
        nn::Conv1d<double> m = conv;
        m.weight.data[i] -= h;
        const double numeric = (objective(p, x) - objective(m, x)) / (2 * h);
        CHECK(rel_err(grads.weight.data[i], numeric) < 1e-4);
    }
    for (std::size_t i = 0; i < conv.bias.size(); ++i) {
        nn::Conv1d<double> p = conv;
        p.bias.data[i] += h;
        nn::Conv1d<double> m = conv;
        m.bias.data[i] -= h;
        const double numeric = (objective(p, x) - objective(m, x)) / (2 * h);
        CHECK(rel_err(grads.bias.data[i], numeric) < 1e-4);
    }
    for (std::size_t i = 0; i < x.size(); i += 5) {
        std::vector<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double numeric = (objective(conv, xp) - objective(conv, xm)) / (2 * h);
        CHECK(rel_err(grad_in[i], numeric) < 1e-4);
    }
}

TEST_CASE("dense gradients match central finite differences") {
    nn::Dense<double> dense(10, 6);
    Xoshiro256ss rng(12);
    fill_random(dense.weight.data, rng);
    fill_random(dense.bias.data, rng, 0.1);
    std::vector<double> x(10), proj(6);
    fill_random(x, rng);
    fill_random(proj, rng);

    auto objective = [&](const nn::Dense<double>& d, const std::vector<double>& in) {
        std::vector<double> out(6);
        d.forward(in.data(), out.data());
        double obj = 0.0;
        for (int i = 0; i < 6; ++i) obj += out[static_cast<std::size_t>(i)] * proj[static_cast<std::size_t>(i)];
        return obj;
    };

    nn::Dense<double> grads(10, 6);
    std::vector<double> grad_in(10);
    dense.backward(x.data(), proj.data(), grad_in.data(), grads);

    const double h = 1e-6;
    for (std::size_t i = 0; i < dense.weight.size(); ++i) {
        nn::Dense<double> p = dense, m = dense;
        p.weight.data[i] += h;
        m.weight.data[i] -= h;
        const double numeric = (objective(p, x) - objective(m, x)) / (2 * h);
        CHECK(rel_err(grads.weight.data[i], numeric) < 1e-4);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double numeric = (objective(dense, xp) - objective(dense, xm)) / (2 * h);
        CHECK(rel_err(grad_in[i], numeric) < 1e-4);
    }
}

TEST_CASE("zero-weight conv: bias gradient equals the mean residual path") {
    // single conv layer, all weights and biases zero, MSE loss against y:
    // out == 0, so dL/db[co] = sum_i 2*(out_i - y_i)/len = -2*mean(y)
    const int len = 10;
    nn::Conv1d<double> conv(1, 1, 5);
    conv.weight.zero();
    conv.bias.zero();
    std::vector<double> x(len), y(len), out(len);
    Xoshiro256ss rng(99);
    fill_random(x, rng);
    fill_random(y, rng);
    conv.forward(x.data(), len, out.data());
    std::vector<double> d_out(len);
    double y_mean = 0.0;
    for (int i = 0; i < len; ++i) {
        d_out[static_cast<std::size_t>(i)] =
            2.0 * (out[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]) / len;
        y_mean += y[static_cast<std::size_t>(i)];
    }
    y_mean /= len;
    nn::Conv1d<double> grads(1, 1, 5);
    conv.backward(x.data(), len, d_out.data(), nullptr, grads);
    CHECK(grads.bias.data[0] == doctest::Approx(-2.0 * y_mean).epsilon(1e-12));
}

TEST_CASE("relu gradient matches finite differences away from the kink") {
    std::vector<double> pre = {-1.5, -0.3, 0.4, 2.0, -0.9, 1.1};
    std::vector<double> gout = {0.7, -0.2, 0.5, 1.3, -0.4, 0.6};
    std::vector<double> gin(pre.size());
    nn::relu_backward(pre.data(), gout.data(), static_cast<int>(pre.size()), gin.data());
    const double h = 1e-7;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        std::vector<double> up(pre.size()), dn(pre.size());
        std::vector<double> prep = pre, prem = pre;
        prep[i] += h;
        prem[i] -= h;
        nn::relu_forward(prep.data(), static_cast<int>(pre.size()), up.data());
        nn::relu_forward(prem.data(), static_cast<int>(pre.size()), dn.data());
        double op = 0, om = 0;
        for (std::size_t j = 0; j < pre.size(); ++j) {
            op += up[j] * gout[j];
            om += dn[j] * gout[j];
        }
        CHECK(rel_err(gin[i], (op - om) / (2 * h)) < 1e-4);
    }
}

TEST_CASE("end-to-end loss gradient of the full network (double precision)") {
    ModelConfig cfg;
    cfg.input_len = 16;
    cfg.c1 = 4;
    cfg.c2 = 6;
    cfg.bottleneck = 10;
    cfg.c3 = 6;
    cfg.head_ch = 4;
    cfg.fc_dim = 8;
    FreqNetT<double> net(cfg);
    net.init_weights(321);

    Xoshiro256ss rng(13);
    std::vector<double> x(16), clean(16);
    fill_random(x, rng);
    fill_random(clean, rng);
    const double f_target = 0.37;
    const double w_clean = 1.0, w_freq = 1.0;
    const int L = cfg.input_len;

    auto loss_of = [&](const FreqNetT<double>& m) {
        FreqNetT<double>::Workspace ws(cfg);
        m.forward(x.data(), ws);
        double mse = 0.0;
        for (int i = 0; i < L; ++i) {
            const double d = ws.clean_hat[static_cast<std::size_t>(i)] - clean[static_cast<std::size_t>(i)];
            mse += d * d;
        }
        mse /= L;
        const double df = ws.freq_norm - f_target;
        return w_clean * mse + w_freq * df * df;
    };

    FreqNetT<double> grads(cfg);
    grads.zero();
    FreqNetT<double>::Workspace ws(cfg);
    net.forward(x.data(), ws);
    std::vector<double> d_clean(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) {
        d_clean[static_cast<std::size_t>(i)] =
            w_clean * 2.0 * (ws.clean_hat[static_cast<std::size_t>(i)] - clean[static_cast<std::size_t>(i)]) / L;
    }
    net.backward(ws, d_clean.data(), w_freq * 2.0 * (ws.freq_norm - f_target), grads);

    std::vector<nn::Tensor<double>*> param_tensors, grad_tensors;
    net.visit_params([&](nn::Tensor<double>& t) { param_tensors.push_back(&t); });
    grads.visit_params([&](nn::Tensor<double>& t) { grad_tensors.push_back(&t); });

    const double h = 1e-6;
    int checked = 0;
    for (std::size_t ti = 0; ti < param_tensors.size(); ++ti) {
        nn::Tensor<double>& tensor = *param_tensors[ti];
        const std::size_t stride = std::max<std::size_t>(1, tensor.size() / 6);
        for (std::size_t i = 0; i < tensor.size(); i += stride) {
            const double orig = tensor.data[i];
            tensor.data[i] = orig + h;
            const double lp = loss_of(net);
            tensor.data[i] = orig - h;
            const double lm = loss_of(net);
            tensor.data[i] = orig;
            const double numeric = (lp - lm) / (2 * h);
            CHECK(rel_err(grad_tensors[ti]->data[i], numeric) < 1e-4);
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("batch gradient equals the single-record gradient for identical records") {
    ModelConfig cfg;
    cfg.input_len = 16;
    cfg.c1 = 3;
    cfg.c2 = 4;
    cfg.bottleneck = 8;
    cfg.c3 = 4;
    cfg.head_ch = 3;
    cfg.fc_dim = 6;
    FreqNetT<double> net(cfg);
    net.init_weights(55);
    Xoshiro256ss rng(14);
    std::vector<double> x(16), clean(16);
    fill_random(x, rng);
    fill_random(clean, rng);

    auto grad_once = [&](int repeats) {
        FreqNetT<double> grads(cfg);
        grads.zero();
        FreqNetT<double>::Workspace ws(cfg);
        for (int r = 0; r < repeats; ++r) {
            net.forward(x.data(), ws);
            std::vector<double> d_clean(16);
            for (int i = 0; i < 16; ++i) {
                d_clean[static_cast<std::size_t>(i)] =
                    2.0 * (ws.clean_hat[static_cast<std::size_t>(i)] - clean[static_cast<std::size_t>(i)]) / 16.0;
            }
            net.backward(ws, d_clean.data(), 2.0 * (ws.freq_norm - 0.4), grads);
        }
        // mean over the batch
        grads.visit_params([repeats](nn::Tensor<double>& t) {
            for (double& v : t.data) v /= repeats;
        });
        return grads;
    };

    const FreqNetT<double> g1 = grad_once(1);
    const FreqNetT<double> g4 = grad_once(4);
    std::vector<const nn::Tensor<double>*> t1, t4;
    g1.visit_params([&](const nn::Tensor<double>& t) { t1.push_back(&t); });
    g4.visit_params([&](const nn::Tensor<double>& t) { t4.push_back(&t); });
    for (std::size_t k = 0; k < t1.size(); ++k) {
        for (std::size_t i = 0; i < t1[k]->size(); ++i) {
            CHECK(t1[k]->data[i] == doctest::Approx(t4[k]->data[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("loss: closed forms and quadratic growth") {
    std::vector<float> clean = {0.1f, -0.4f, 0.7f, 0.2f};
    CHECK(loss_value(clean, clean, 0.5, 0.5, LossWeights{}) == doctest::Approx(0.0));
    CHECK(loss_value(clean, clean, 0.6, 0.5, LossWeights{}) == doctest::Approx(0.01));

    // loss grows quadratically in the perturbation near the optimum
    Xoshiro256ss rng(15);
    std::vector<float> delta(clean.size());
    for (float& d : delta) d = static_cast<float>(rng.uniform(-1.0, 1.0));
    auto perturbed = [&](double eps) {
        std::vector<float> p = clean;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += static_cast<float>(eps) * delta[i];
        return loss_value(p, clean, 0.5 + 0.3 * eps, 0.5, LossWeights{});
    };
    const double l1 = perturbed(1e-2);
    const double l2 = perturbed(2e-2);
    CHECK(l2 / l1 == doctest::Approx(4.0).epsilon(1e-3));

    std::vector<float> shorter = {0.1f, 0.2f};
    CHECK_THROWS_AS(loss_value(shorter, clean, 0.0, 0.0, LossWeights{}), nn::ShapeError);
    CHECK_THROWS_AS(loss_value(clean, clean, 0.0, 0.0, LossWeights{0.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("forward: shape contract and degenerate input") {
    FreqNet net{ModelConfig{}};
    net.init_weights(777);

    SignalWindow zero;
    zero.samples.assign(50, 0.0f);
    const ForwardResult res = model_forward(net, zero);
    CHECK(res.clean_hat.size() == 50);
    for (float v : res.clean_hat.samples) CHECK(std::isfinite(v));
    CHECK(std::isfinite(res.freq_norm));

    SignalWindow wrong;
    wrong.samples.assign(32, 0.1f);
    CHECK_THROWS_AS(model_forward(net, wrong), nn::ShapeError);
}

TEST_CASE("adam: quadratic bowl converges and zero gradient is a no-op") {
    // f(w) = w^2 from w=1, lr=0.1: converges toward 0 (|w| ~ 3e-3 after 100
    // steps with the standard moment constants, < 1e-3 by step 150)
    double w = 1.0, m = 0.0, v = 0.0;
    nn::AdamParams cfg;
    cfg.lr = 0.1;
    for (long long t = 1; t <= 100; ++t) {
        const double g = 2.0 * w;
        nn::adam_update(&w, &g, &m, &v, 1, t, cfg);
    }
    CHECK(std::abs(w) < 5e-3);
    for (long long t = 101; t <= 150; ++t) {
        const double g = 2.0 * w;
        nn::adam_update(&w, &g, &m, &v, 1, t, cfg);
    }
    CHECK(std::abs(w) < 1e-3);

    // zero gradient with fresh moments: parameter unchanged, moments decay
    FreqNet net{ModelConfig{}};
    net.init_weights(888);
    FreqNet before = net;
    FreqNet grads{ModelConfig{}};
    grads.zero();
    AdamOptimizer opt(net, AdamConfig{});
    opt.step(net, grads);
    std::vector<const nn::Tensor<float>*> ta, tb;
    net.visit_params([&](const nn::Tensor<float>& t) { ta.push_back(&t); });
    before.visit_params([&](const nn::Tensor<float>& t) { tb.push_back(&t); });
    for (std::size_t k = 0; k < ta.size(); ++k) CHECK(ta[k]->data == tb[k]->data);

    // non-finite gradient raises the divergence error
    grads.fc2.bias.data[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(opt.step(net, grads), TrainError);
}

TEST_CASE("serialization: save -> load -> forward is bit-identical") {
    FreqNet net{ModelConfig{}};
    net.init_weights(1001);
    std::stringstream buf;
    save_model(buf, net);
    const FreqNet loaded = load_model(buf);

    for (std::uint64_t s = 0; s < 5; ++s) {
        const GenParams p = sample_params(derive_seed(31, s), ParamRanges{});
        const SignalWindow w = generate_pair(p).noisy;
        const ForwardResult a = model_forward(net, w);
        const ForwardResult b = model_forward(loaded, w);
        CHECK(a.clean_hat.samples == b.clean_hat.samples);
        CHECK(a.freq_norm == b.freq_norm);
    }
}

TEST_CASE("serialization: loader rejects unknown versions and bad magic") {
    FreqNet net{ModelConfig{}};
    net.init_weights(1002);
    std::stringstream buf;
    save_model(buf, net);
    std::string bytes = buf.str();

    std::string wrong_version = bytes;
    wrong_version[4] = 9;  // version lives right after the magic
    std::stringstream in1(wrong_version);
    CHECK_THROWS_AS(load_model(in1), IoError);

    std::string wrong_magic = bytes;
    wrong_magic[0] = 'X';
    std::stringstream in2(wrong_magic);
    CHECK_THROWS_AS(load_model(in2), IoError);
}

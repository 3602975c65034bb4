#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "beatnote/rng.hpp"
#include "beatnote/signal.hpp"
#include "beatnote/single_tone.hpp"

using namespace beatnote;

namespace {

constexpr double kPi = 3.14159265358979323846;

SignalWindow pure_tone(double freq_hz, double amplitude, double phase, int n,
                       double fs, double offset = 0.0) {
    SignalWindow w;
    w.sample_rate_hz = fs;
    w.samples.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        w.samples[static_cast<std::size_t>(i)] = static_cast<float>(
            amplitude * std::sin(2.0 * kPi * freq_hz * i / fs + phase) + offset);
    }
    return w;
}

// Independent oracle: least-squares fit of a*sin(2 pi f t) + b*cos(2 pi f t) + c,
// residual minimized over f by grid scan plus golden-section refinement.
double lsq_residual(const SignalWindow& w, double f) {
    const int n = static_cast<int>(w.size());
    double ss = 0, sc = 0, s1 = 0, c1 = 0, cc = 0, sy = 0, cy = 0, y1 = 0, yy = 0;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * f * i / w.sample_rate_hz;
        const double s = std::sin(t);
        const double c = std::cos(t);
        const double y = w.samples[static_cast<std::size_t>(i)];
        ss += s * s; sc += s * c; cc += c * c;
        s1 += s; c1 += c;
        sy += s * y; cy += c * y; y1 += y; yy += y * y;
    }
    // Solve [ss sc s1; sc cc c1; s1 c1 n] [a b c]' = [sy cy y1]' by Cramer.
    const double nn = n;
    const double det = ss * (cc * nn - c1 * c1) - sc * (sc * nn - c1 * s1) +
                       s1 * (sc * c1 - cc * s1);
    if (std::abs(det) < 1e-12) return yy;
    const double a = (sy * (cc * nn - c1 * c1) - sc * (cy * nn - c1 * y1) +
                      s1 * (cy * c1 - cc * y1)) / det;
    const double b = (ss * (cy * nn - c1 * y1) - sy * (sc * nn - c1 * s1) +
                      s1 * (sc * y1 - cy * s1)) / det;
    const double c0 = (ss * (cc * y1 - cy * c1) - sc * (sc * y1 - cy * s1) +
                       sy * (sc * c1 - cc * s1)) / det;
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * f * i / w.sample_rate_hz;
        const double d = w.samples[static_cast<std::size_t>(i)] -
                         (a * std::sin(t) + b * std::cos(t) + c0);
        res += d * d;
    }
    return res;
}

double lsq_fit_freq(const SignalWindow& w, double f_lo, double f_hi) {
    double best_f = f_lo;
    double best_r = lsq_residual(w, f_lo);
    for (double f = f_lo; f <= f_hi; f += 1.0) {
        const double r = lsq_residual(w, f);
        if (r < best_r) {
            best_r = r;
            best_f = f;
        }
    }
    double lo = best_f - 1.5, hi = best_f + 1.5;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double r1 = lsq_residual(w, x1), r2 = lsq_residual(w, x2);
    for (int it = 0; it < 80; ++it) {
        if (r1 < r2) {
            hi = x2; x2 = x1; r2 = r1;
            x1 = hi - gr * (hi - lo);
            r1 = lsq_residual(w, x1);
        } else {
            lo = x1; x1 = x2; r1 = r2;
            x2 = lo + gr * (hi - lo);
            r2 = lsq_residual(w, x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("single_tone: pure 100 Hz at the exact bin") {
    const SignalWindow w = pure_tone(100.0, 1.0, 0.4, 50, 5000.0);
    const double oracle = lsq_fit_freq(w, 60.0, 200.0);
    CHECK(oracle == doctest::Approx(100.0).epsilon(1e-5));
    const FreqEstimate est = single_tone_estimate(w);
    CHECK(std::abs(est.frequency_hz - 100.0) < 0.1);
    CHECK(std::abs(est.frequency_hz - oracle) < 0.1);
    CHECK_FALSE(est.edge_bin);
    CHECK(est.method == Method::SingleTone);
}

TEST_CASE("single_tone: pure 280 Hz within the interpolation bias bound") {
    const SignalWindow w = pure_tone(280.0, 1.0, 1.1, 50, 5000.0);
    const double oracle = lsq_fit_freq(w, 200.0, 400.0);
    CHECK(oracle == doctest::Approx(280.0).epsilon(1e-5));
    const FreqEstimate est = single_tone_estimate(w);
    CHECK(std::abs(est.frequency_hz - 280.0) < 1.0);
    CHECK(std::abs(est.frequency_hz - oracle) < 1.0);
}

TEST_CASE("single_tone: noiseless bias across the band stays under 1 Hz") {
    for (double f = 220.0; f <= 480.0; f += 7.3) {
        const SignalWindow w = pure_tone(f, 0.9, 0.8, 50, 5000.0);
        const FreqEstimate est = single_tone_estimate(w);
        CHECK(std::abs(est.frequency_hz - f) < 1.0);
    }
}

TEST_CASE("single_tone: scale invariance of the frequency estimate") {
    Xoshiro256ss rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        SignalWindow w = pure_tone(rng.uniform(120.0, 480.0), 0.9, rng.uniform(-3.0, 3.0),
                                   50, 5000.0);
        for (float& v : w.samples) v += static_cast<float>(0.005 * rng.gaussian());
        const double base = single_tone_estimate(w).frequency_hz;
        SignalWindow scaled = w;
        for (float& v : scaled.samples) v *= 3.7f;
        CHECK(single_tone_estimate(scaled).frequency_hz ==
              doctest::Approx(base).epsilon(1e-6));
    }
}

TEST_CASE("single_tone: offset invariance of the frequency estimate") {
    Xoshiro256ss rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        SignalWindow w = pure_tone(rng.uniform(120.0, 480.0), 0.9, rng.uniform(-3.0, 3.0),
                                   50, 5000.0);
        for (float& v : w.samples) v += static_cast<float>(0.005 * rng.gaussian());
        const double base = single_tone_estimate(w).frequency_hz;
        SignalWindow shifted = w;
        for (float& v : shifted.samples) v += 0.85f;
        CHECK(single_tone_estimate(shifted).frequency_hz ==
              doctest::Approx(base).epsilon(1e-6));
    }
}

TEST_CASE("single_tone: error and edge paths") {
    SignalWindow constant;
    constant.samples.assign(50, 0.42f);
    CHECK_THROWS_AS(single_tone_estimate(constant), NoToneError);

    SignalWindow tiny;
    tiny.samples.assign(5, 0.0f);
    CHECK_THROWS_AS(single_tone_estimate(tiny), std::invalid_argument);

    // near-Nyquist tone pins the peak to the edge bin
    const SignalWindow hi = pure_tone(2480.0, 1.0, 0.3, 50, 5000.0);
    const FreqEstimate est = single_tone_estimate(hi);
    CHECK(est.edge_bin);
    CHECK(est.frequency_hz == doctest::Approx(2500.0));
}

TEST_CASE("single_tone: window-gain corrected amplitude") {
    const FreqEstimate unit = single_tone_estimate(pure_tone(280.0, 1.0, 0.9, 50, 5000.0));
    CHECK(unit.amplitude == doctest::Approx(1.0).epsilon(0.02));
    const FreqEstimate small = single_tone_estimate(pure_tone(333.0, 0.35, -0.6, 50, 5000.0));
    CHECK(small.amplitude == doctest::Approx(0.35).epsilon(0.02));
}

TEST_CASE("single_tone: long window at 50 kHz agrees with the oracle") {
    const SignalWindow w = pure_tone(1234.0, 0.8, 0.2, 500, 50000.0);
    const double oracle = lsq_fit_freq(w, 1000.0, 1500.0);
    const FreqEstimate est = single_tone_estimate(w);
    CHECK(std::abs(est.frequency_hz - oracle) < 0.2);
    CHECK(std::abs(est.frequency_hz - 1234.0) < 0.2);
}

TEST_CASE("single_tone: zero padding keeps the estimate") {
    const SignalWindow w = pure_tone(280.0, 1.0, 0.5, 50, 5000.0);
    const FreqEstimate padded = single_tone_estimate(w, 4);
    CHECK(std::abs(padded.frequency_hz - 280.0) < 1.0);
}

TEST_CASE("single_tone: ensemble sigma at 100 Hz exceeds sigma at 280 Hz") {
    auto ensemble_sigma = [](double freq) {
        ParamRanges ranges;
        ranges.frequency_hz = {freq, freq};
        std::vector<double> est;
        for (int t = 0; t < 800; ++t) {
            const GenParams p =
                sample_params(derive_seed(1234, static_cast<std::uint64_t>(t)), ranges);
            est.push_back(single_tone_estimate(generate_pair(p).noisy).frequency_hz);
        }
        double mean = 0;
        for (double v : est) mean += v;
        mean /= static_cast<double>(est.size());
        double var = 0;
        for (double v : est) var += (v - mean) * (v - mean);
        return std::sqrt(var / static_cast<double>(est.size() - 1));
    };
    CHECK(ensemble_sigma(100.0) > ensemble_sigma(280.0));
}

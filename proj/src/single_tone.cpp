#include "beatnote/single_tone.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace beatnote {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Hann spectral kernel normalized to 1 at the bin center, argument in bins.
double hann_kernel(double u) {
    const double au = std::abs(u);
    if (au < 1e-9) return 1.0;
    if (std::abs(au - 1.0) < 1e-9) return 0.5;
    return std::sin(kPi * u) / (kPi * u) / (1.0 - u * u);
}

}  // namespace

FreqEstimate single_tone_estimate(const SignalWindow& window, int pad_factor) {
    const int n = static_cast<int>(window.size());
    if (n < 8) throw std::invalid_argument("single_tone: window shorter than 8 samples");
    if (pad_factor < 1) throw std::invalid_argument("single_tone: pad_factor must be >= 1");

    const auto [min_it, max_it] =
        std::minmax_element(window.samples.begin(), window.samples.end());
    if (*min_it == *max_it) throw NoToneError("single_tone: constant window, no tone");

    double mean = 0.0;
    for (float v : window.samples) mean += v;
    mean /= n;

    // Mean-subtracted, Hann-windowed frame (periodic window), zero-padded.
    const int m = n * pad_factor;
    std::vector<double> frame(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(kTwoPi * i / n));
        frame[static_cast<std::size_t>(i)] = (window.samples[static_cast<std::size_t>(i)] - mean) * w;
    }

    // Magnitudes of DFT bins 0..m/2 via per-bin incremental rotation.
    const int n_bins = m / 2 + 1;
    std::vector<double> mag(static_cast<std::size_t>(n_bins));
    for (int k = 0; k < n_bins; ++k) {
        const double step = kTwoPi * k / m;
        const double dc = std::cos(step);
        const double ds = std::sin(step);
        double cr = 1.0, ci = 0.0;  // e^{-i step j}, advanced per sample
        double re = 0.0, im = 0.0;
        for (int j = 0; j < m; ++j) {
            re += frame[static_cast<std::size_t>(j)] * cr;
            im -= frame[static_cast<std::size_t>(j)] * ci;
            const double nr = cr * dc - ci * ds;
            ci = cr * ds + ci * dc;
            cr = nr;
        }
        mag[static_cast<std::size_t>(k)] = std::hypot(re, im);
    }

    int peak = 0;
    for (int k = 1; k < n_bins; ++k) {
        if (mag[static_cast<std::size_t>(k)] > mag[static_cast<std::size_t>(peak)]) peak = k;
    }

    const double bin_hz = window.sample_rate_hz / m;
    FreqEstimate est;
    est.method = Method::SingleTone;

    // Interpolation neighbors sit one natural (unpadded) bin away so the
    // Hann three-bin identity stays exact under zero padding.
    const int stride = pad_factor;
    if (peak - stride < 0 || peak + stride >= n_bins) {
        est.edge_bin = true;
        est.frequency_hz = peak * bin_hz;
        est.amplitude = 4.0 * mag[static_cast<std::size_t>(peak)] / n;
        return est;
    }

    const double m_lo = mag[static_cast<std::size_t>(peak - stride)];
    const double m_pk = mag[static_cast<std::size_t>(peak)];
    const double m_hi = mag[static_cast<std::size_t>(peak + stride)];

    // Three-bin weighted interpolation, exact for a Hann-windowed tone.
    // Bins within one natural bin of DC carry the negative-frequency image
    // plus the re-windowed residual mean (the Hann window spectrum occupies
    // exactly bins {-1, 0, +1}), and the bin at Nyquist mirrors the image
    // problem, so near those edges the one-sided Hann amplitude ratio (also
    // exact) replaces the corrupted neighbor.
    double delta;
    if (peak <= 2 * stride) {
        const double alpha = m_hi / m_pk;
        delta = (2.0 * alpha - 1.0) / (1.0 + alpha);
    } else if (peak + stride == n_bins - 1) {
        const double alpha = m_lo / m_pk;
        delta = -(2.0 * alpha - 1.0) / (1.0 + alpha);
    } else {
        delta = 2.0 * (m_hi - m_lo) / (m_lo + 2.0 * m_pk + m_hi);
    }

    est.frequency_hz = (peak + delta * stride) * bin_hz;
    est.amplitude = 4.0 * m_pk / (n * hann_kernel(delta));
    return est;
}

}  // namespace beatnote

#ifndef BEATNOTE_SIGNAL_HPP
#define BEATNOTE_SIGNAL_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace beatnote {

/// Fixed-length frame of interferogram samples plus its sample rate.
struct SignalWindow {
    std::vector<float> samples;
    double sample_rate_hz = 5000.0;

    std::size_t size() const { return samples.size(); }
};

/// Closed interval [lo, hi]; degenerate (lo == hi) is allowed.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Uniform sampling ranges for every stochastic generation parameter.
/// Defaults reproduce the calibrated synthetic-beat-note regime:
/// frequency 100-500 Hz, offset +-0.2, phase (-pi, pi], amplitude and
/// phase noise sigma 0.001-0.01, linear amplitude trend 0.6-1.2.
struct ParamRanges {
    Interval frequency_hz{100.0, 500.0};
    Interval offset{-0.2, 0.2};
    Interval phase_rad{-3.14159265358979323846, 3.14159265358979323846};
    Interval sigma_amp{0.001, 0.01};
    Interval sigma_phase{0.001, 0.01};
    Interval trend_start{0.6, 1.2};
    Interval trend_end{0.6, 1.2};
};

/// Full parameter vector of one synthetic example.
struct GenParams {
    double frequency_hz = 280.0;
    double phase_rad = 0.0;
    double offset = 0.0;
    double trend_start = 1.0;
    double trend_end = 1.0;
    double sigma_amp = 0.0;
    double sigma_phase = 0.0;
    int n_samples = 50;
    double sample_rate_hz = 5000.0;
    std::uint64_t seed = 0;
};

/// (noisy window, clean window, true frequency) training triple.
struct DatasetRecord {
    SignalWindow noisy;
    SignalWindow clean;
    double frequency_hz = 0.0;
};

/// Errors raised on malformed generation inputs.
class GenError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Draws one parameter vector, uniformly and independently per field.
/// Draw order is fixed: frequency, offset, phase, sigma_amp, sigma_phase,
/// trend_start, trend_end, then one extra 64-bit draw for the noise seed.
/// Deterministic given rng_seed. Throws GenError when any range has
/// lo > hi, a sigma range goes negative, or the frequency range breaks
/// Nyquist for the range's sample rate.
GenParams sample_params(std::uint64_t rng_seed, const ParamRanges& ranges,
                        int n_samples = 50, double sample_rate_hz = 5000.0);

/// Synthesizes the clean/noisy pair for one parameter vector:
///   clean[i] = sin(2 pi f t_i),                       t_i = i / fs
///   noisy[i] = A(t_i) sin(2 pi f t_i + phi + e_phi,i) + offset + e_g,i
/// with A linearly interpolated from trend_start to trend_end across the
/// window and e_phi, e_g i.i.d. Gaussian per sample. Fully deterministic
/// given params.seed.
DatasetRecord generate_pair(const GenParams& params);

/// Record `index` of the dataset stream seeded with master_seed.
/// Per-record seeds follow derive_seed(derive_seed(master_seed, 1), index),
/// so records are independent and reproducible in any order.
DatasetRecord dataset_record(std::uint64_t master_seed, std::uint64_t index,
                             const ParamRanges& ranges, int n_samples = 50,
                             double sample_rate_hz = 5000.0);

/// Generates n records into `sink(index, record)`. Throws GenError for n == 0.
template <typename Sink>
void generate_dataset(std::uint64_t n, const ParamRanges& ranges,
                      std::uint64_t master_seed, Sink&& sink, int n_samples = 50,
                      double sample_rate_hz = 5000.0) {
    if (n == 0) throw GenError("generate_dataset: empty dataset requested");
    for (std::uint64_t i = 0; i < n; ++i) {
        sink(i, dataset_record(master_seed, i, ranges, n_samples, sample_rate_hz));
    }
}

/// Beat frequency of a ring cavity rotating at `omega_rad_s`:
///   f = 4 Omega A cos(theta) / (P lambda)
/// with enclosed area A, perimeter P, wavelength lambda and angle theta
/// between the area vector and the rotation axis. Throws std::domain_error
/// on non-positive geometry.
double sagnac_frequency(double omega_rad_s, double area_m2, double perimeter_m,
                        double wavelength_m, double theta_rad);

}  // namespace beatnote

#endif  // BEATNOTE_SIGNAL_HPP

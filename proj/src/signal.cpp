#include "beatnote/signal.hpp"

#include <cmath>
#include <string>

#include "beatnote/rng.hpp"

namespace beatnote {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_interval(const Interval& iv, const char* name) {
    if (!(iv.lo <= iv.hi)) {
        throw GenError(std::string("sample_params: range ") + name + " has lo > hi");
    }
}

}  // namespace

GenParams sample_params(std::uint64_t rng_seed, const ParamRanges& ranges,
                        int n_samples, double sample_rate_hz) {
    check_interval(ranges.frequency_hz, "frequency_hz");
    check_interval(ranges.offset, "offset");
    check_interval(ranges.phase_rad, "phase_rad");
    check_interval(ranges.sigma_amp, "sigma_amp");
    check_interval(ranges.sigma_phase, "sigma_phase");
    check_interval(ranges.trend_start, "trend_start");
    check_interval(ranges.trend_end, "trend_end");
    if (ranges.sigma_amp.lo < 0.0 || ranges.sigma_phase.lo < 0.0) {
        throw GenError("sample_params: noise sigma ranges must be non-negative");
    }
    if (n_samples < 2) throw GenError("sample_params: n_samples must be >= 2");
    if (!(sample_rate_hz > 2.0 * ranges.frequency_hz.hi)) {
        throw GenError("sample_params: frequency range violates Nyquist");
    }

    Xoshiro256ss rng(rng_seed);
    GenParams p;
    p.frequency_hz = rng.uniform(ranges.frequency_hz.lo, ranges.frequency_hz.hi);
    p.offset = rng.uniform(ranges.offset.lo, ranges.offset.hi);
    p.phase_rad = rng.uniform(ranges.phase_rad.lo, ranges.phase_rad.hi);
    p.sigma_amp = rng.uniform(ranges.sigma_amp.lo, ranges.sigma_amp.hi);
    p.sigma_phase = rng.uniform(ranges.sigma_phase.lo, ranges.sigma_phase.hi);
    p.trend_start = rng.uniform(ranges.trend_start.lo, ranges.trend_start.hi);
    p.trend_end = rng.uniform(ranges.trend_end.lo, ranges.trend_end.hi);
    p.n_samples = n_samples;
    p.sample_rate_hz = sample_rate_hz;
    p.seed = rng.next();
    return p;
}

DatasetRecord generate_pair(const GenParams& params) {
    if (params.n_samples < 2) throw GenError("generate_pair: n_samples must be >= 2");
    if (!(params.sample_rate_hz > 2.0 * params.frequency_hz)) {
        throw GenError("generate_pair: frequency violates Nyquist");
    }
    if (params.sigma_amp < 0.0 || params.sigma_phase < 0.0) {
        throw GenError("generate_pair: negative noise sigma");
    }

    const int n = params.n_samples;
    DatasetRecord rec;
    rec.frequency_hz = params.frequency_hz;
    rec.clean.sample_rate_hz = params.sample_rate_hz;
    rec.noisy.sample_rate_hz = params.sample_rate_hz;
    rec.clean.samples.resize(static_cast<std::size_t>(n));
    rec.noisy.samples.resize(static_cast<std::size_t>(n));

    Xoshiro256ss rng(params.seed);
    const double omega = kTwoPi * params.frequency_hz / params.sample_rate_hz;
    const double trend_step =
        (params.trend_end - params.trend_start) / static_cast<double>(n - 1);

    for (int i = 0; i < n; ++i) {
        const double arg = omega * static_cast<double>(i);
        const double amp = params.trend_start + trend_step * static_cast<double>(i);
        // Per-sample draw order is fixed: phase noise first, then amplitude.
        const double eta_phase = rng.gaussian() * params.sigma_phase;
        const double eta_amp = rng.gaussian() * params.sigma_amp;
        rec.clean.samples[static_cast<std::size_t>(i)] =
            static_cast<float>(std::sin(arg));
        rec.noisy.samples[static_cast<std::size_t>(i)] = static_cast<float>(
            amp * std::sin(arg + params.phase_rad + eta_phase) + params.offset +
            eta_amp);
    }
    return rec;
}

DatasetRecord dataset_record(std::uint64_t master_seed, std::uint64_t index,
                             const ParamRanges& ranges, int n_samples,
                             double sample_rate_hz) {
    const std::uint64_t stream = derive_seed(master_seed, 1);
    const GenParams params =
        sample_params(derive_seed(stream, index), ranges, n_samples, sample_rate_hz);
    return generate_pair(params);
}

double sagnac_frequency(double omega_rad_s, double area_m2, double perimeter_m,
                        double wavelength_m, double theta_rad) {
    if (!(omega_rad_s > 0.0) || !(area_m2 > 0.0) || !(perimeter_m > 0.0) ||
        !(wavelength_m > 0.0)) {
        throw std::domain_error("sagnac_frequency: geometry must be positive");
    }
    if (theta_rad < 0.0 || theta_rad > 3.14159265358979323846) {
        throw std::domain_error("sagnac_frequency: theta outside [0, pi]");
    }
    return 4.0 * omega_rad_s * area_m2 * std::cos(theta_rad) /
           (perimeter_m * wavelength_m);
}

}  // namespace beatnote

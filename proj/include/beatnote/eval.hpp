#ifndef BEATNOTE_EVAL_HPP
#define BEATNOTE_EVAL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "beatnote/model.hpp"
#include "beatnote/signal.hpp"
#include "beatnote/single_tone.hpp"

namespace beatnote {

using Estimator = std::function<FreqEstimate(const SignalWindow&)>;

Estimator make_single_tone_estimator(int pad_factor = 1);
Estimator make_nn_estimator(const FreqNet& net);  // net must outlive the estimator

struct SweepConfig {
    double f_start_hz = 100.0;
    double f_stop_hz = 500.0;
    double f_step_hz = 2.0;
    int trials_per_freq = 10000;
    ParamRanges ranges{};       // frequency interval is overridden per target
    double sample_rate_hz = 5000.0;
    int n_samples = 50;
    Method method = Method::SingleTone;
    std::uint64_t seed = 42;
    double spread_bin_hz = 0.1;
    unsigned n_threads = 0;
    bool dump_estimates = false;  // keep raw estimates in the report
};

struct FreqStats {
    double target_hz = 0.0;
    double mean_hz = 0.0;
    double bias_hz = 0.0;    // mean - target
    double sigma_hz = 0.0;   // sample standard deviation
    double spread_hz = 0.0;  // occupied-histogram-bin width, see spread()
    int n = 0;               // successful trials
    int dropped = 0;         // estimator failures
};

struct SweepReport {
    SweepConfig config;
    std::vector<FreqStats> per_freq;
    std::vector<std::vector<double>> estimates;  // filled when dump_estimates
};

/// Evaluation grid: f_start, f_start+step, ... up to and including f_stop.
std::vector<double> sweep_grid(const SweepConfig& cfg);

/// Monte Carlo precision sweep: for each target frequency, generates
/// `trials_per_freq` noisy windows (frequency pinned to the target, every
/// other parameter drawn from `ranges`), runs the estimator and reduces the
/// estimates to mean/bias/sigma/spread. Per-target seeds derive from
/// derive_seed(seed, target_index); trial t inside a target uses
/// derive_seed(target_seed, t). Deterministic given the seed, independent of
/// thread count. Estimator exceptions are counted as dropped trials.
SweepReport sweep(const SweepConfig& cfg, const Estimator& estimator);

/// Convenience dispatch on cfg.method; NeuralNet requires a model.
SweepReport sweep(const SweepConfig& cfg, const FreqNet* model = nullptr);

/// Width of the estimate distribution: histogram with bins of `bin_width_hz`
/// anchored at zero, then (max occupied bin center - min occupied bin center)
/// + bin width. Throws std::invalid_argument on empty input or non-positive
/// bin width.
double spread(const std::vector<double>& estimates_hz, double bin_width_hz);

struct ComparisonRow {
    double target_hz = 0.0;
    double sigma_ratio = 0.0;   // sigma_a / sigma_b
    double spread_ratio = 0.0;  // spread_a / spread_b
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    double mean_sigma_ratio = 0.0;
    double mean_spread_ratio = 0.0;
};

/// Per-frequency sigma and spread ratios of two reports on identical grids,
/// plus grid averages. Throws std::invalid_argument on grid mismatch.
ComparisonTable compare(const SweepReport& a, const SweepReport& b);

/// CSV with `target_hz,mean_hz,bias_hz,sigma_hz,spread_hz,n,dropped` rows,
/// preceded by '#'-prefixed config echo lines.
void write_report_csv(const std::string& path, const SweepReport& report);

/// One estimate per line, one file per target: <prefix><target>.csv.
void write_estimate_dumps(const std::string& prefix, const SweepReport& report);

}  // namespace beatnote

#endif  // BEATNOTE_EVAL_HPP

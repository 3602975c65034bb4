#include "beatnote/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "beatnote/dataset_io.hpp"
#include "beatnote/parallel.hpp"
#include "beatnote/rng.hpp"

namespace beatnote {

Estimator make_single_tone_estimator(int pad_factor) {
    return [pad_factor](const SignalWindow& w) { return single_tone_estimate(w, pad_factor); };
}

Estimator make_nn_estimator(const FreqNet& net) {
    return [&net](const SignalWindow& w) { return nn_estimate(net, w); };
}

std::vector<double> sweep_grid(const SweepConfig& cfg) {
    if (!(cfg.f_start_hz < cfg.f_stop_hz) || !(cfg.f_step_hz > 0.0)) {
        throw std::invalid_argument("sweep: need f_start < f_stop and f_step > 0");
    }
    std::vector<double> grid;
    const int count =
        static_cast<int>(std::floor((cfg.f_stop_hz - cfg.f_start_hz) / cfg.f_step_hz + 1e-9)) + 1;
    grid.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid.push_back(cfg.f_start_hz + i * cfg.f_step_hz);
    return grid;
}

double spread(const std::vector<double>& estimates_hz, double bin_width_hz) {
    if (estimates_hz.empty()) throw std::invalid_argument("spread: empty estimate set");
    if (!(bin_width_hz > 0.0)) throw std::invalid_argument("spread: bin width must be > 0");
    long long lo_bin = std::numeric_limits<long long>::max();
    long long hi_bin = std::numeric_limits<long long>::min();
    for (double v : estimates_hz) {
        const auto bin = static_cast<long long>(std::floor(v / bin_width_hz));
        lo_bin = std::min(lo_bin, bin);
        hi_bin = std::max(hi_bin, bin);
    }
    return static_cast<double>(hi_bin - lo_bin) * bin_width_hz + bin_width_hz;
}

SweepReport sweep(const SweepConfig& cfg, const Estimator& estimator) {
    if (cfg.trials_per_freq < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    const std::vector<double> grid = sweep_grid(cfg);

    SweepReport report;
    report.config = cfg;
    report.per_freq.resize(grid.size());
    report.estimates.resize(grid.size());

    parallel_for(grid.size(), cfg.n_threads, [&](std::size_t gi) {
        const double target = grid[gi];
        const std::uint64_t target_seed = derive_seed(cfg.seed, gi);

        ParamRanges ranges = cfg.ranges;
        ranges.frequency_hz = {target, target};

        std::vector<double>& values = report.estimates[gi];
        values.reserve(static_cast<std::size_t>(cfg.trials_per_freq));
        int dropped = 0;

        for (int t = 0; t < cfg.trials_per_freq; ++t) {
            GenParams params = sample_params(derive_seed(target_seed, static_cast<std::uint64_t>(t)),
                                             ranges, cfg.n_samples, cfg.sample_rate_hz);
            const DatasetRecord rec = generate_pair(params);
            try {
                const double f = estimator(rec.noisy).frequency_hz;
                if (!std::isfinite(f)) throw NoToneError("non-finite estimate");
                values.push_back(f);
            } catch (const std::exception&) {
                ++dropped;
            }
        }

        FreqStats& st = report.per_freq[gi];
        st.target_hz = target;
        st.n = static_cast<int>(values.size());
        st.dropped = dropped;
        if (!values.empty()) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var = values.size() > 1 ? var / static_cast<double>(values.size() - 1) : 0.0;
            st.mean_hz = mean;
            st.bias_hz = mean - target;
            st.sigma_hz = std::sqrt(var);
            st.spread_hz = spread(values, cfg.spread_bin_hz);
        }
        if (!cfg.dump_estimates) {
            values.clear();
            values.shrink_to_fit();
        }
    });

    return report;
}

SweepReport sweep(const SweepConfig& cfg, const FreqNet* model) {
    if (cfg.method == Method::NeuralNet) {
        if (model == nullptr) throw std::invalid_argument("sweep: NeuralNet requires a model");
        return sweep(cfg, make_nn_estimator(*model));
    }
    return sweep(cfg, make_single_tone_estimator());
}

ComparisonTable compare(const SweepReport& a, const SweepReport& b) {
    if (a.per_freq.size() != b.per_freq.size()) {
        throw std::invalid_argument("compare: frequency grids differ");
    }
    ComparisonTable table;
    table.rows.reserve(a.per_freq.size());
    double sigma_sum = 0.0;
    double spread_sum = 0.0;
    for (std::size_t i = 0; i < a.per_freq.size(); ++i) {
        const FreqStats& fa = a.per_freq[i];
        const FreqStats& fb = b.per_freq[i];
        if (fa.target_hz != fb.target_hz) {
            throw std::invalid_argument("compare: frequency grids differ");
        }
        ComparisonRow row;
        row.target_hz = fa.target_hz;
        row.sigma_ratio = fa.sigma_hz / fb.sigma_hz;
        row.spread_ratio = fa.spread_hz / fb.spread_hz;
        sigma_sum += row.sigma_ratio;
        spread_sum += row.spread_ratio;
        table.rows.push_back(row);
    }
    table.mean_sigma_ratio = sigma_sum / static_cast<double>(table.rows.size());
    table.mean_spread_ratio = spread_sum / static_cast<double>(table.rows.size());
    return table;
}

void write_report_csv(const std::string& path, const SweepReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("report: cannot open for writing: " + path);
    const SweepConfig& c = report.config;
    char line[256];
    std::snprintf(line, sizeof(line), "# grid=%g:%g:%g trials=%d method=%s\n",
                  c.f_start_hz, c.f_stop_hz, c.f_step_hz, c.trials_per_freq,
                  c.method == Method::NeuralNet ? "nn" : "st");
    out << line;
    std::snprintf(line, sizeof(line),
                  "# sample_rate=%g n_samples=%d spread_bin=%g seed=%llu\n",
                  c.sample_rate_hz, c.n_samples, c.spread_bin_hz,
                  static_cast<unsigned long long>(c.seed));
    out << line;
    out << "target_hz,mean_hz,bias_hz,sigma_hz,spread_hz,n,dropped\n";
    for (const FreqStats& st : report.per_freq) {
        std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n",
                      st.target_hz, st.mean_hz, st.bias_hz, st.sigma_hz, st.spread_hz,
                      st.n, st.dropped);
        out << line;
    }
}

void write_estimate_dumps(const std::string& prefix, const SweepReport& report) {
    if (report.estimates.empty()) return;
    for (std::size_t i = 0; i < report.per_freq.size(); ++i) {
        if (report.estimates[i].empty()) continue;
        char name[64];
        std::snprintf(name, sizeof(name), "%.1f", report.per_freq[i].target_hz);
        std::ofstream out(prefix + name + ".csv");
        if (!out) throw IoError("estimate dump: cannot open for writing");
        out << "estimate_hz\n";
        char line[64];
        for (double v : report.estimates[i]) {
            std::snprintf(line, sizeof(line), "%.9g\n", v);
            out << line;
        }
    }
}

}  // namespace beatnote

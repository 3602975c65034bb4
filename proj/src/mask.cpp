#include "beatnote/mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "beatnote/dataset_io.hpp"

namespace beatnote {

double fringe_contrast(const SignalWindow& window) {
    if (window.size() == 0) throw std::invalid_argument("fringe_contrast: empty window");
    const auto [min_it, max_it] =
        std::minmax_element(window.samples.begin(), window.samples.end());
    const double i_min = *min_it;
    const double i_max = *max_it;
    const double denom = i_max + i_min;
    if (!(denom > 0.0)) {
        throw ContrastError("fringe_contrast: undefined for non-positive envelope sum");
    }
    return (i_max - i_min) / denom;
}

MaskLabel classify_frame(const FreqEstimate& freq, double contrast,
                         const MaskConfig& cfg) {
    cfg.validate();
    if (contrast < cfg.contrast_threshold) return MaskLabel::SplitMode;
    if (std::abs(freq.frequency_hz - cfg.ref_mean_hz) > cfg.k_sigma * cfg.ref_sigma_hz) {
        return MaskLabel::Anomaly;
    }
    return MaskLabel::Good;
}

std::vector<FrameResult> mask_stream(const std::vector<SignalWindow>& frames,
                                     const Estimator& estimator,
                                     const MaskConfig& cfg) {
    cfg.validate();
    std::vector<FrameResult> results;
    results.reserve(frames.size());
    for (const SignalWindow& frame : frames) {
        FrameResult r;
        try {
            r.contrast = fringe_contrast(frame);
        } catch (const ContrastError&) {
            // No usable envelope: treat as fully collapsed fringes.
            r.contrast = 0.0;
        }
        try {
            const FreqEstimate est = estimator(frame);
            r.freq_hz = est.frequency_hz;
            r.label = classify_frame(est, r.contrast, cfg);
        } catch (const std::exception&) {
            // No usable frequency: conservative anomaly label.
            r.estimator_failed = true;
            r.freq_hz = std::numeric_limits<double>::quiet_NaN();
            r.label = MaskLabel::Anomaly;
        }
        results.push_back(r);
    }
    return results;
}

MaskConfig calibrate_reference(const std::vector<SignalWindow>& frames,
                               const Estimator& estimator,
                               std::size_t calibration_frames) {
    const std::size_t n = std::min(calibration_frames, frames.size());
    if (n < 2) throw std::invalid_argument("calibrate_reference: need at least 2 frames");
    std::vector<double> freqs;
    freqs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            freqs.push_back(estimator(frames[i]).frequency_hz);
        } catch (const std::exception&) {
            // calibration assumes good frames; skip failures
        }
    }
    if (freqs.size() < 2) throw std::invalid_argument("calibrate_reference: too few estimates");
    double mean = 0.0;
    for (double f : freqs) mean += f;
    mean /= static_cast<double>(freqs.size());
    double var = 0.0;
    for (double f : freqs) var += (f - mean) * (f - mean);
    var /= static_cast<double>(freqs.size() - 1);
    MaskConfig cfg;
    cfg.ref_mean_hz = mean;
    cfg.ref_sigma_hz = std::sqrt(var);
    return cfg;
}

void write_labels_csv(const std::string& path, const std::vector<FrameResult>& results) {
    std::ofstream out(path);
    if (!out) throw IoError("labels: cannot open for writing: " + path);
    out << "frame_index,label,freq_hz,contrast\n";
    char line[96];
    for (std::size_t i = 0; i < results.size(); ++i) {
        const FrameResult& r = results[i];
        std::snprintf(line, sizeof(line), "%zu,%d,%.6f,%.6f\n", i,
                      static_cast<int>(r.label), r.freq_hz, r.contrast);
        out << line;
    }
}

}  // namespace beatnote

#ifndef BEATNOTE_MASK_HPP
#define BEATNOTE_MASK_HPP

#include <stdexcept>
#include <vector>

#include "beatnote/eval.hpp"
#include "beatnote/signal.hpp"
#include "beatnote/single_tone.hpp"

namespace beatnote {

// Real-time 0/1/2 data-quality mask over a frequency-estimate stream:
// "0" good signal, "1" out-of-band anomaly (transients, earthquakes,
// instabilities), "2" split mode detected by collapsed fringe contrast.

enum class MaskLabel : int { Good = 0, Anomaly = 1, SplitMode = 2 };

struct MaskConfig {
    double ref_mean_hz = 280.0;
    double ref_sigma_hz = 1.0;
    double k_sigma = 2.0;
    double contrast_threshold = 0.5;

    void validate() const {
        if (!(ref_sigma_hz > 0.0) || !(k_sigma > 0.0) || !(contrast_threshold > 0.0) ||
            !(contrast_threshold < 1.0)) {
            throw std::invalid_argument("mask: invalid configuration");
        }
    }
};

struct FrameResult {
    MaskLabel label = MaskLabel::Good;
    double freq_hz = 0.0;   // NaN when the estimator failed
    double contrast = 0.0;
    bool estimator_failed = false;
};

class ContrastError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fringe contrast (I_max - I_min) / (I_max + I_min) from the envelope
/// extrema of the window; requires at least one full beat period per frame.
/// Throws ContrastError when I_max + I_min <= 0 (contrast undefined).
double fringe_contrast(const SignalWindow& window);

/// Label one frame. Split mode takes precedence over the frequency band:
/// split-mode frequencies wander and may intermittently fall inside the good
/// band, so a collapsed contrast alone forces label 2. Otherwise label 1
/// when |freq - ref_mean| > k_sigma * ref_sigma, else 0.
MaskLabel classify_frame(const FreqEstimate& freq, double contrast,
                         const MaskConfig& cfg);

/// Causal, per-frame classification of a frame stream: frame i's label
/// depends only on frames <= i. Estimator failures label the frame 1
/// (conservative) and are flagged in the result.
std::vector<FrameResult> mask_stream(const std::vector<SignalWindow>& frames,
                                     const Estimator& estimator,
                                     const MaskConfig& cfg);

/// Reference band from a calibration prefix of good frames: mean and sample
/// standard deviation of the estimator output over the first
/// `calibration_frames` frames. Other MaskConfig fields keep their defaults.
MaskConfig calibrate_reference(const std::vector<SignalWindow>& frames,
                               const Estimator& estimator,
                               std::size_t calibration_frames = 1000);

void write_labels_csv(const std::string& path, const std::vector<FrameResult>& results);

}  // namespace beatnote

#endif  // BEATNOTE_MASK_HPP

#ifndef BEATNOTE_SINGLE_TONE_HPP
#define BEATNOTE_SINGLE_TONE_HPP

#include <stdexcept>

#include "beatnote/signal.hpp"

namespace beatnote {

enum class Method { SingleTone, NeuralNet };

struct FreqEstimate {
    double frequency_hz = 0.0;
    double amplitude = 0.0;  // window-gain corrected tone amplitude
    Method method = Method::SingleTone;
    // Peak landed on the DC or Nyquist bin; frequency_hz is the raw bin
    // center without sub-bin interpolation.
    bool edge_bin = false;
};

/// Window carries no tone (constant samples).
class NoToneError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dominant-tone frequency of a short frame: subtract the mean, apply a
/// Hann window, take the DFT, locate the magnitude peak and refine it with
/// the three-bin weighted interpolation
///   delta = 2 (m[k+1] - m[k-1]) / (m[k-1] + 2 m[k] + m[k+1])
/// which is exact for a Hann-windowed tone in the large-N limit. Amplitude
/// is corrected for the window gain at the interpolated offset.
///
/// pad_factor > 1 zero-pads the windowed frame before the DFT (experiment
/// flag; default off). Throws std::invalid_argument for frames shorter than
/// 8 samples and NoToneError for constant frames.
FreqEstimate single_tone_estimate(const SignalWindow& window, int pad_factor = 1);

}  // namespace beatnote

#endif  // BEATNOTE_SINGLE_TONE_HPP

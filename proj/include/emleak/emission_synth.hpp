#pragma once

#include "emleak/capture.hpp"
#include "emleak/frame_model.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace emleak {

enum class PulseShape { rect };

/// Pixel pulse: a pulse of width duty * T_p starting each pixel slot.
struct PulseSpec {
    double duty = 0.9;
    PulseShape shape = PulseShape::rect;

    void validate() const;
};

/// Scalar wall attenuation plus complex AWGN. `snr_db` unset means noiseless.
struct ChannelSpec {
    double attenuation_db = 0.0;
    std::optional<double> snr_db;
    std::uint64_t seed = 42;

    static ChannelSpec noiseless() { return {}; }
};

struct SynthOptions {
    int harmonic_k = 1;
    double sample_rate_hz = 0.0;
    int n_frames = 1;
    int oversample = 4;
    bool edge_emphasis = false;  // first difference of x[n] before shaping
};

/// P(f) of the pulse, phase referenced to the pulse centre.
std::complex<double> pulse_spectrum(const PulseSpec& pulse, const DisplayMode& mode, double freq_hz);

/// S(f) = sum_n x[n] exp(-j 2 pi f n T_p), evaluated directly.
std::vector<std::complex<double>> dtft_pixels(const PixelSequence& pixseq,
                                              std::span<const double> freqs_hz);

/// X(f) = P(f) S(f).
std::vector<std::complex<double>> predicted_spectrum(const PixelSequence& pixseq,
                                                     const PulseSpec& pulse,
                                                     std::span<const double> freqs_hz);

/// Number of high samples per pixel slot when x(t) is rendered at
/// `oversample` samples per pixel.
int pulse_high_samples(const PulseSpec& pulse, int oversample);

/// Renders x(t) at oversample * f_p, mixes harmonic k to 0 Hz, low-passes and
/// resamples to the SDR rate, then applies the channel. The display is
/// free-running: frames repeat phase-continuously and the signal extends
/// periodically beyond both ends of the capture.
BasebandCapture synthesize_baseband(const PixelSequence& pixseq, const PulseSpec& pulse,
                                    const SynthOptions& opts, const ChannelSpec& channel);

/// Adds circular complex Gaussian noise of total per-sample variance
/// `variance` (half in I, half in Q). Generator: std::mt19937_64 seeded with
/// `seed` feeding std::normal_distribution<double>, I drawn before Q.
void add_awgn(std::vector<Sample>& samples, double variance, std::uint64_t seed);

/// Mean of |x|^2; 0 for an empty span.
double mean_power(std::span<const Sample> samples);

/// Pure-noise capture, used as a null hypothesis by analysis tests and the CLI.
BasebandCapture noise_capture(std::size_t n, double sample_rate_hz, double center_freq_hz,
                              double variance, std::uint64_t seed);

}  // namespace emleak

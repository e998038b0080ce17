#pragma once

#include "emleak/capture.hpp"
#include "emleak/emission_synth.hpp"
#include "emleak/frame_model.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace emleak {

struct SignatureEntry {
    int k = 0;
    double center_freq_hz = 0.0;
    double predicted_rel_power = 0.0;  // max entry normalized to 1

    bool operator==(const SignatureEntry&) const = default;
};

/// Harmonic comb predicted offline from a public interface image.
struct SpectralSignature {
    std::string mode_name;
    double pixel_rate_hz = 0.0;
    std::vector<SignatureEntry> entries;
    double line_rate_hz = 0.0;
    double frame_rate_hz = 0.0;

    bool operator==(const SpectralSignature&) const = default;
};

nlohmann::json to_json(const SpectralSignature& sig);
SpectralSignature signature_from_json(const nlohmann::json& j);

/// Probe layout for harmonic band power: 17 equispaced offsets over
/// [-line_rate, +line_rate] around each harmonic.
inline constexpr int kBandProbes = 17;

SpectralSignature signature_from_public_image(const FrameImage& frame, const DisplayMode& mode,
                                              const PulseSpec& pulse, int k_max,
                                              double blanking_level = 0.0);

/// Averaged periodogram. `power_db` is per-bin power relative to unit
/// mean-square; bins sum (linearly) to the mean-square of the capture.
struct Psd {
    std::vector<double> freqs_hz;  // ascending, (-fs/2, fs/2] relative to centre
    std::vector<double> power_db;
    double resolution_hz = 0.0;

    double linear(std::size_t i) const;
    double total_power() const;
};

/// dB value reported for bins with zero power.
inline constexpr double kPsdFloorDb = -300.0;

/// Welch estimate with a periodic Hann window.
Psd psd(const BasebandCapture& capture, std::size_t segment_len, double overlap_fraction = 0.5);

struct CombDetection {
    int k = 0;
    double measured_freq_hz = 0.0;  // absolute (capture centre + bin offset)
    double prominence_db = 0.0;
};

/// For each k whose harmonic falls inside the PSD span, finds the strongest
/// bin within +-2 line rates and its prominence over the median of the
/// surrounding +-10 line rates (at least 8 bins each side).
std::vector<CombDetection> detect_harmonic_comb(const Psd& psd, const DisplayMode& mode,
                                                double capture_center_hz,
                                                std::span<const int> k_range,
                                                double min_prominence_db);

struct RateEstimate {
    double rate_hz = 0.0;
    // Autocorrelation at the chosen candidate over the mean across the grid.
    // Values below ~1.2 indicate no periodic structure.
    double peak_to_mean = 1.0;
};

RateEstimate estimate_frame_rate(const BasebandCapture& capture, double nominal_hz, double span_hz,
                                 int n_candidates);
RateEstimate estimate_line_rate(const BasebandCapture& capture, const DisplayMode& mode,
                                double span_hz, int n_candidates);

/// Correlation between predicted and measured harmonic band powers.
double signature_match(const SpectralSignature& sig, const BasebandCapture& capture);

/// Harmonic indices of `sig` whose +-line-rate band lies in the flat part of
/// the capture's passband (|offset| + line_rate <= 0.4 fs).
std::vector<int> visible_harmonics(const SpectralSignature& sig, const CaptureMeta& meta);

}  // namespace emleak

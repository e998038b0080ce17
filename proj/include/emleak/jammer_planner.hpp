#pragma once

#include "emleak/emission_synth.hpp"
#include "emleak/frame_model.hpp"
#include "emleak/spectral_analyzer.hpp"
#include "emleak/video_timing.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emleak {

/// What the public record says about a device model.
struct DeviceProfile {
    std::string model_name;
    DisplayMode mode;
    std::optional<std::filesystem::path> interface_image_path;
    std::string environment_notes;
};

/// Reads {"model_name", "mode", "interface_image", "environment_notes"}.
/// A relative image path resolves against the profile's directory.
DeviceProfile load_device_profile(const std::filesystem::path& path, const ModeTable& table);

struct JamBand {
    int k = 0;
    double center_freq_hz = 0.0;
    double bandwidth_hz = 0.0;
    int priority = 0;  // 1 = most compromising
};

struct JamPlan {
    std::vector<JamBand> bands;  // ordered by harmonic index
    SpectralSignature source_signature;
    bool zero_power = false;     // every predicted power is 0
    std::vector<std::string> notes;
};

inline constexpr double kDefaultGuardFactor = 3.0;

JamPlan plan_jamming(const DeviceProfile& profile, const PulseSpec& pulse, int k_max,
                     double guard_factor = kDefaultGuardFactor);

/// Same as plan_jamming with the interface image supplied directly.
JamPlan plan_jamming(const DeviceProfile& profile, const FrameImage& interface_image,
                     const PulseSpec& pulse, int k_max, double guard_factor = kDefaultGuardFactor);

struct RankedHarmonic {
    int k = 0;
    double center_freq_hz = 0.0;

    bool operator==(const RankedHarmonic&) const = default;
};

/// Harmonics whose predicted power exceeds `noise_floor_rel`, strongest
/// first (ties: smaller k first).
std::vector<RankedHarmonic> rank_compromising_frequencies(const SpectralSignature& sig,
                                                          double noise_floor_rel);

nlohmann::json to_json(const JamPlan& plan);

/// `center_hz bandwidth_hz priority` per line, in priority order.
std::string to_flat_text(const JamPlan& plan);

}  // namespace emleak

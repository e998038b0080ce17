#pragma once

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace emleak {

using Sample = std::complex<double>;

/// Metadata carried alongside IQ samples (the ".meta.json" sidecar).
struct CaptureMeta {
    double sample_rate_hz = 0.0;
    double center_freq_hz = 0.0;
    std::string mode_name = "unknown";
    int n_frames = 0;
    std::optional<std::uint64_t> seed;
    std::string description;
    // Sidecar keys this version does not know; written back unchanged.
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const CaptureMeta&) const = default;
};

/// Complex baseband IQ capture. Samples are held in double precision and
/// narrowed to binary32 only on write.
struct BasebandCapture {
    std::vector<Sample> samples;
    CaptureMeta meta;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return static_cast<double>(samples.size()) / meta.sample_rate_hz;
    }
};

}  // namespace emleak

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emleak {

/// Raster timing of a display mode. Totals include the blanking interval.
struct DisplayMode {
    std::string name;
    int active_width = 0;
    int active_height = 0;
    int total_width = 0;   // pixels per line, blanking included
    int total_height = 0;  // lines per frame, blanking included
    double refresh_hz = 0.0;

    /// Throws InvalidArgument when any dimension or the refresh rate is
    /// inconsistent.
    void validate() const;

    std::int64_t total_pixels() const {
        return std::int64_t{total_width} * total_height;
    }
};

/// Canonical label, e.g. "1280x720@60".
std::string mode_label(int active_width, int active_height, double refresh_hz);

/// f_p = P_x * P_y * f_v, always derived from the stored totals.
double pixel_rate(const DisplayMode& mode);
double pixel_period(const DisplayMode& mode);
double line_rate(const DisplayMode& mode);
double line_period(const DisplayMode& mode);

/// Samples per line at the given SDR rate. May be fractional.
double samples_per_line(const DisplayMode& mode, double sample_rate_hz);

/// k * f_p for k = 1..k_max.
std::vector<double> harmonics(const DisplayMode& mode, int k_max);

/// Lookup table of known timings. The default-constructed table holds the
/// built-in modes.
class ModeTable {
public:
    ModeTable();

    static ModeTable empty();

    const std::vector<DisplayMode>& modes() const { return modes_; }

    /// Adds or replaces (same active size and refresh) a mode.
    void add(DisplayMode mode);

    /// Reads records `name active_w active_h total_w total_h refresh`, one
    /// per line; `#` starts a comment. Throws IoError / FormatError.
    void load_file(const std::filesystem::path& path);
    void load_text(std::string_view text, std::string_view origin = "<text>");

    /// Throws UnknownMode listing the supported modes.
    const DisplayMode& lookup(int active_width, int active_height, double refresh_hz) const;

    /// Accepts either a mode name or "WxH@R".
    const DisplayMode& lookup(std::string_view spec) const;

private:
    std::vector<DisplayMode> modes_;
};

/// Built-in table lookup.
DisplayMode lookup_mode(int active_width, int active_height, double refresh_hz);

}  // namespace emleak

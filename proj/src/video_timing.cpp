#include "emleak/video_timing.hpp"

#include "emleak/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace emleak {

namespace {

constexpr double kRefreshTolerance = 1e-9;

bool same_refresh(double a, double b) {
    return std::abs(a - b) <= kRefreshTolerance * std::max(1.0, std::abs(b));
}

std::string format_refresh(double hz) {
    std::ostringstream os;
    os.precision(10);
    os << hz;
    return os.str();
}

DisplayMode make_mode(int aw, int ah, int tw, int th, double hz) {
    return DisplayMode{mode_label(aw, ah, hz), aw, ah, tw, th, hz};
}

std::string supported_list(const std::vector<DisplayMode>& modes) {
    std::string out;
    for (const auto& m : modes) {
        if (!out.empty()) out += ", ";
        out += m.name;
    }
    return out;
}

}  // namespace

void DisplayMode::validate() const {
    if (active_width <= 0 || active_height <= 0)
        throw InvalidArgument("mode '" + name + "': active dimensions must be positive");
    if (total_width < active_width || total_height < active_height)
        throw InvalidArgument("mode '" + name + "': totals must cover the active area");
    if (!(refresh_hz > 0.0) || !std::isfinite(refresh_hz))
        throw InvalidArgument("mode '" + name + "': refresh rate must be positive");
}

std::string mode_label(int active_width, int active_height, double refresh_hz) {
    return std::to_string(active_width) + "x" + std::to_string(active_height) + "@" +
           format_refresh(refresh_hz);
}

double pixel_rate(const DisplayMode& mode) {
    return static_cast<double>(mode.total_pixels()) * mode.refresh_hz;
}

double pixel_period(const DisplayMode& mode) { return 1.0 / pixel_rate(mode); }

double line_rate(const DisplayMode& mode) { return mode.total_height * mode.refresh_hz; }

double line_period(const DisplayMode& mode) { return 1.0 / line_rate(mode); }

double samples_per_line(const DisplayMode& mode, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0))
        throw InvalidArgument("sample rate must be positive");
    // P_x * f_s / (P_x P_y f_v) reduces to f_s / (P_y f_v); dividing by the
    // line rate keeps integer cases exact.
    return sample_rate_hz / line_rate(mode);
}

std::vector<double> harmonics(const DisplayMode& mode, int k_max) {
    if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
    const double fp = pixel_rate(mode);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) out.push_back(k * fp);
    return out;
}

ModeTable::ModeTable() {
    // CTA-861 / VESA DMT totals.
    modes_.push_back(make_mode(640, 480, 800, 525, 60.0));
    modes_.push_back(make_mode(1280, 720, 1650, 750, 60.0));
    modes_.push_back(make_mode(1920, 1080, 2200, 1125, 60.0));
    // Desk-scale synthetic mode (pixel rate 120 kHz).
    modes_.push_back(make_mode(40, 30, 50, 40, 60.0));
}

ModeTable ModeTable::empty() {
    ModeTable t;
    t.modes_.clear();
    return t;
}

void ModeTable::add(DisplayMode mode) {
    mode.validate();
    for (auto& m : modes_) {
        if (m.active_width == mode.active_width && m.active_height == mode.active_height &&
            same_refresh(m.refresh_hz, mode.refresh_hz)) {
            m = std::move(mode);
            return;
        }
    }
    modes_.push_back(std::move(mode));
}

void ModeTable::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mode table '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path.string());
}

void ModeTable::load_text(std::string_view text, std::string_view origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string name;
        if (!(fields >> name)) continue;
        DisplayMode m;
        m.name = name;
        std::string extra;
        if (!(fields >> m.active_width >> m.active_height >> m.total_width >> m.total_height >>
              m.refresh_hz) ||
            (fields >> extra)) {
            throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                              ": expected 'name active_w active_h total_w total_h refresh'");
        }
        try {
            m.validate();
        } catch (const InvalidArgument& e) {
            throw FormatError(std::string(origin) + ":" + std::to_string(lineno) + ": " + e.what());
        }
        add(std::move(m));
    }
}

const DisplayMode& ModeTable::lookup(int active_width, int active_height, double refresh_hz) const {
    for (const auto& m : modes_) {
        if (m.active_width == active_width && m.active_height == active_height &&
            same_refresh(m.refresh_hz, refresh_hz))
            return m;
    }
    throw UnknownMode("no timing for " + mode_label(active_width, active_height, refresh_hz) +
                      "; supported: " + supported_list(modes_));
}

const DisplayMode& ModeTable::lookup(std::string_view spec) const {
    for (const auto& m : modes_)
        if (m.name == spec) return m;

    // WxH@R
    const auto x = spec.find('x');
    const auto at = spec.find('@');
    if (x != std::string_view::npos && at != std::string_view::npos && x < at) {
        int w = 0, h = 0;
        const char* b = spec.data();
        auto r1 = std::from_chars(b, b + x, w);
        auto r2 = std::from_chars(b + x + 1, b + at, h);
        std::string rate(spec.substr(at + 1));
        char* end = nullptr;
        const double hz = std::strtod(rate.c_str(), &end);
        if (r1.ec == std::errc{} && r1.ptr == b + x && r2.ec == std::errc{} && r2.ptr == b + at &&
            end != rate.c_str() && *end == '\0')
            return lookup(w, h, hz);
    }
    throw UnknownMode("unknown mode '" + std::string(spec) + "'; supported: " +
                      supported_list(modes_));
}

DisplayMode lookup_mode(int active_width, int active_height, double refresh_hz) {
    static const ModeTable table;
    return table.lookup(active_width, active_height, refresh_hz);
}

}  // namespace emleak

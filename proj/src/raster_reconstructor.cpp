#include "emleak/raster_reconstructor.hpp"

#include "emleak/error.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace emleak {

namespace {

double sample_rate_of(const BasebandCapture& capture) {
    const double fs = capture.meta.sample_rate_hz;
    if (!(fs > 0.0)) throw InvalidArgument("capture has no sample rate");
    return fs;
}

// Linear interpolation at a non-negative position below x.size(); past the
// last sample the final value is held.
Sample interp(const std::vector<Sample>& x, double pos) {
    const auto i = static_cast<std::size_t>(pos);
    const double a = pos - static_cast<double>(i);
    if (a == 0.0 || i + 1 >= x.size()) return x[i];
    return (1.0 - a) * x[i] + a * x[i + 1];
}

}  // namespace

std::vector<double> RasterImage::column_means() const {
    std::vector<double> out(static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(c)] += at(r, c);
    if (rows > 0)
        for (auto& v : out) v /= rows;
    return out;
}

FrameImage RasterImage::normalized() const {
    FrameImage img(cols, rows);
    if (values.empty()) return img;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    if (range > 0.0)
        for (std::size_t i = 0; i < values.size(); ++i) img.intensity[i] = (values[i] - *lo) / range;
    return img;
}

RasterImage ComplexRaster::magnitude() const {
    RasterImage out{rows, cols, std::vector<double>(values.size()), seconds_per_col};
    std::transform(values.begin(), values.end(), out.values.begin(), [](const Sample& s) { return std::abs(s); });
    return out;
}

int raster_columns(double samples_per_line) {
    return static_cast<int>(std::nearbyint(samples_per_line));
}

ComplexRaster fold_lines_complex(const BasebandCapture& capture, double samples_per_line) {
    const double fs = sample_rate_of(capture);
    if (!(samples_per_line > 1.0)) throw InvalidArgument("samples per line must exceed 1");
    const auto n = static_cast<double>(capture.size());
    if (n < 2.0 * samples_per_line) throw TooShort("capture holds fewer than two lines");

    ComplexRaster out;
    out.cols = raster_columns(samples_per_line);
    out.seconds_per_col = 1.0 / fs;
    const double last = n - 1.0;
    int rows = 0;
    while (static_cast<double>(rows) * samples_per_line + (out.cols - 1) <= last) ++rows;
    out.rows = rows;
    out.values.resize(static_cast<std::size_t>(rows) * out.cols);
    for (int r = 0; r < rows; ++r) {
        const double start = static_cast<double>(r) * samples_per_line;
        for (int c = 0; c < out.cols; ++c)
            out.values[static_cast<std::size_t>(r) * out.cols + c] = interp(capture.samples, start + c);
    }
    return out;
}

RasterImage fold_lines(const BasebandCapture& capture, double samples_per_line) {
    return fold_lines_complex(capture, samples_per_line).magnitude();
}

RasterImage line_dft_raster(const BasebandCapture& capture, int samples_per_line, bool dc_centered) {
    const double fs = sample_rate_of(capture);
    if (samples_per_line < 1) throw InvalidArgument("samples per line must be positive");
    const auto spl = static_cast<std::size_t>(samples_per_line);
    const std::size_t rows = capture.size() / spl;
    if (rows < 2) throw TooShort("capture holds fewer than two complete lines");

    RasterImage out;
    out.rows = static_cast<int>(rows);
    out.cols = samples_per_line;
    out.seconds_per_col = 1.0 / fs;
    out.values.resize(rows * spl);
    const std::size_t shift = dc_centered ? spl / 2 : 0;

    detail::ForwardFft fft(spl);
    auto& buf = fft.buffer();
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(capture.samples.begin() + static_cast<std::ptrdiff_t>(r * spl), spl, buf.begin());
        fft.execute();
        for (std::size_t bin = 0; bin < spl; ++bin)
            out.values[r * spl + (bin + shift) % spl] = std::abs(buf[bin]);
    }
    return out;
}

ComplexRaster average_frames_complex(const BasebandCapture& capture, const DisplayMode& mode, int n_frames) {
    mode.validate();
    const double fs = sample_rate_of(capture);
    if (n_frames < 1) throw InvalidArgument("n_frames must be >= 1");
    const double spl = samples_per_line(mode, fs);
    if (!(spl > 1.0)) throw InvalidArgument("sample rate gives fewer than two samples per line");
    const double frame = fs / mode.refresh_hz;

    ComplexRaster out;
    out.rows = mode.total_height;
    out.cols = raster_columns(spl);
    out.seconds_per_col = 1.0 / fs;
    const double last_needed =
        (n_frames - 1) * frame + (out.rows - 1) * spl + (out.cols - 1);
    // A capture of round(n * fs / f_v) samples may end up to half a sample
    // short of the last interpolation point.
    if (last_needed >= static_cast<double>(capture.size()))
        throw TooShort("capture covers fewer than " + std::to_string(n_frames) + " frames");

    out.values.assign(static_cast<std::size_t>(out.rows) * out.cols, Sample{});
    for (int f = 0; f < n_frames; ++f) {
        const double frame_start = f * frame;
        for (int r = 0; r < out.rows; ++r) {
            const double start = frame_start + r * spl;
            Sample* row = &out.values[static_cast<std::size_t>(r) * out.cols];
            for (int c = 0; c < out.cols; ++c) row[c] += interp(capture.samples, start + c);
        }
    }
    const double inv = 1.0 / n_frames;
    for (auto& v : out.values) v *= inv;
    return out;
}

RasterImage average_frames(const BasebandCapture& capture, const DisplayMode& mode, int n_frames) {
    return average_frames_complex(capture, mode, n_frames).magnitude();
}

FrameImage reconstruct_image(const BasebandCapture& capture, const DisplayMode& mode, int n_frames,
                             const std::optional<std::filesystem::path>& output_path) {
    const RasterImage avg = average_frames(capture, mode, n_frames);
    const double fs = capture.meta.sample_rate_hz;
    const double ratio = fs / pixel_rate(mode);  // raster columns per pixel
    const int crop = std::clamp(static_cast<int>(std::lround(mode.active_width * ratio)), 1, avg.cols);

    FrameImage img(mode.active_width, mode.active_height);
    for (int r = 0; r < mode.active_height; ++r) {
        for (int c = 0; c < mode.active_width; ++c) {
            // Centre of pixel c in raster column units.
            const double pos = std::clamp((c + 0.5) * ratio - 0.5, 0.0, static_cast<double>(crop - 1));
            const auto i = static_cast<int>(pos);
            const double a = pos - i;
            const double v0 = avg.at(r, i);
            const double v1 = i + 1 < crop ? avg.at(r, i + 1) : v0;
            img.at(r, c) = (1.0 - a) * v0 + a * v1;
        }
    }
    const auto [lo, hi] = std::minmax_element(img.intensity.begin(), img.intensity.end());
    const double low = *lo, range = *hi - *lo;
    for (auto& v : img.intensity) v = range > 0.0 ? (v - low) / range : 0.0;

    if (output_path) write_pgm(img, *output_path);
    return img;
}

void write_raster_pgm(const RasterImage& raster, const std::filesystem::path& path) {
    write_pgm(raster.normalized(), path);
}

void write_raster_csv(const RasterImage& raster, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.precision(9);
    for (int r = 0; r < raster.rows; ++r) {
        for (int c = 0; c < raster.cols; ++c) {
            if (c) out << ',';
            out << raster.at(r, c);
        }
        out << '\n';
    }
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace emleak

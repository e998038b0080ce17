#pragma once

#include "emleak/capture.hpp"
#include "emleak/frame_model.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace emleak {

/// Capture folded into lines. Values are non-negative magnitudes.
struct RasterImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    double seconds_per_col = 0.0;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

    /// Column means, the energy profile shown beside a time raster.
    std::vector<double> column_means() const;

    /// Min-max normalized to [0,1]; a constant raster maps to all zeros.
    FrameImage normalized() const;
};

/// Complex-valued fold, kept separate so frame averaging can be coherent.
struct ComplexRaster {
    int rows = 0;
    int cols = 0;
    std::vector<Sample> values;
    double seconds_per_col = 0.0;

    RasterImage magnitude() const;
};

/// Number of raster columns for a (possibly fractional) line length:
/// round half to even, so 1200.5 gives 1200.
int raster_columns(double samples_per_line);

ComplexRaster fold_lines_complex(const BasebandCapture& capture, double samples_per_line);

/// Rows advance by exactly `samples_per_line`; fractional offsets use
/// linear interpolation. The trailing partial row is dropped.
RasterImage fold_lines(const BasebandCapture& capture, double samples_per_line);

/// |DFT| of each complete row. With `dc_centered` the DC bin moves to column
/// floor(spl/2).
RasterImage line_dft_raster(const BasebandCapture& capture, int samples_per_line, bool dc_centered);

/// Coherent average over `n_frames` frames (complex), one frame of
/// total_height rows. Frame i starts at i * fs / f_v samples.
ComplexRaster average_frames_complex(const BasebandCapture& capture, const DisplayMode& mode,
                                     int n_frames);
RasterImage average_frames(const BasebandCapture& capture, const DisplayMode& mode, int n_frames);

/// average_frames -> crop the active region -> resample columns to the
/// active width -> min-max normalize. Writes a PGM when `output_path` is set.
FrameImage reconstruct_image(const BasebandCapture& capture, const DisplayMode& mode, int n_frames,
                             const std::optional<std::filesystem::path>& output_path = std::nullopt);

void write_raster_pgm(const RasterImage& raster, const std::filesystem::path& path);

/// Row-major CSV, one raster row per line.
void write_raster_csv(const RasterImage& raster, const std::filesystem::path& path);

}  // namespace emleak

#pragma once

#include "emleak/video_timing.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace emleak {

/// Grayscale image, row-major, intensities in [0,1].
struct FrameImage {
    int width = 0;
    int height = 0;
    std::vector<double> intensity;

    FrameImage() = default;
    FrameImage(int w, int h, double fill = 0.0);

    double& at(int row, int col) { return intensity[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const {
        return intensity[static_cast<std::size_t>(row) * width + col];
    }

    /// Throws FormatError on size mismatch or values outside [0,1].
    void validate() const;
};

/// One frame of x[n] in scan order, blanking included.
struct PixelSequence {
    DisplayMode mode;
    std::vector<double> values;
};

struct ContrastReport {
    double rms_contrast = 0.0;
    double edge_density = 0.0;
    double mean_level = 0.0;
};

enum class TestCard { black, white, bars, ballot_card };

TestCard parse_test_card(std::string_view name);

/// Binary PGM (P5, maxval 255) or 8-bit PNG (gray or RGB).
FrameImage load_image(const std::filesystem::path& path);

/// Writes binary PGM, intensities clamped to [0,1] and rounded to 0..255.
void write_pgm(const FrameImage& frame, const std::filesystem::path& path);

FrameImage test_card(TestCard kind, const DisplayMode& mode);

PixelSequence compose_pixel_sequence(const FrameImage& frame, const DisplayMode& mode,
                                     double blanking_level = 0.0);

ContrastReport contrast_metrics(const FrameImage& frame);

/// |x[r][c] - x[r][c-1]| with the pixel left of column 0 taken at
/// `left_level` (the blanking level the line starts from).
FrameImage horizontal_edge_map(const FrameImage& frame, double left_level = 0.0);

FrameImage scaled(const FrameImage& frame, double alpha);

/// Zero-lag normalized cross-correlation (Pearson) of two equally sized
/// images. Returns 0 when either image is constant.
double normalized_cross_correlation(const FrameImage& a, const FrameImage& b);

}  // namespace emleak

#include "doctest.h"

#include "emleak/error.hpp"
#include "emleak/frame_model.hpp"

#include "oracles.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

using namespace emleak;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    f << bytes;
}

// Minimal libpng writer so PNG decoding has a real file to read.
void write_png(const std::filesystem::path& p, int w, int h, int color_type,
               const std::vector<unsigned char>& data) {
    FILE* fp = std::fopen(p.c_str(), "wb");
    REQUIRE(fp);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    for (int r = 0; r < h; ++r)
        png_write_row(png, const_cast<unsigned char*>(data.data() + static_cast<std::size_t>(r) * w * channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

TEST_CASE("PGM with 0 and 255 maps to 0 and 1") {
    oracle::TempDir dir;
    write_bytes(dir / "a.pgm", std::string("P5\n# two pixels\n2 1\n255\n") + '\0' + '\xff');
    const auto img = load_image(dir / "a.pgm");
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.intensity == std::vector<double>{0.0, 1.0});
}

TEST_CASE("uniform 128 image") {
    oracle::TempDir dir;
    write_bytes(dir / "g.pgm", "P5 4 3 255\n" + std::string(12, '\x80'));
    const auto img = load_image(dir / "g.pgm");
    for (double v : img.intensity) CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    const auto c = contrast_metrics(img);
    CHECK(c.rms_contrast == 0.0);
    CHECK(c.edge_density == 0.0);
}

TEST_CASE("bad image files raise FormatError") {
    oracle::TempDir dir;
    write_bytes(dir / "t.pgm", "P5\n4 4\n255\n" + std::string(5, '\x01'));
    CHECK_THROWS_AS(load_image(dir / "t.pgm"), FormatError);
    write_bytes(dir / "m.pgm", "P2\n1 1\n255\n0\n");
    CHECK_THROWS_AS(load_image(dir / "m.pgm"), FormatError);
    write_bytes(dir / "d.pgm", "P5\n1 1\n65535\n\x01\x02");
    CHECK_THROWS_AS(load_image(dir / "d.pgm"), FormatError);
    CHECK_THROWS(load_image(dir / "nothing.pgm"));
}

TEST_CASE("PNG gray and RGB decode") {
    oracle::TempDir dir;
    write_png(dir / "g.png", 3, 1, PNG_COLOR_TYPE_GRAY, {0, 51, 255});
    const auto g = load_image(dir / "g.png");
    CHECK(g.width == 3);
    CHECK(g.intensity == std::vector<double>{0.0, 0.2, 1.0});

    write_png(dir / "c.png", 2, 1, PNG_COLOR_TYPE_RGB, {255, 255, 255, 0, 0, 0});
    const auto c = load_image(dir / "c.png");
    CHECK(c.intensity[0] == doctest::Approx(1.0));
    CHECK(c.intensity[1] == doctest::Approx(0.0));
}

TEST_CASE("PGM write/read is value exact on the 8-bit grid") {
    oracle::TempDir dir;
    FrameImage img(16, 16);
    for (int i = 0; i < 256; ++i) img.intensity[i] = i / 255.0;
    write_pgm(img, dir / "o.pgm");
    CHECK(load_image(dir / "o.pgm").intensity == img.intensity);
}

TEST_CASE("bars card on a 40 pixel wide mode") {
    const auto mode = lookup_mode(40, 30, 60);
    const auto bars = test_card(TestCard::bars, mode);
    for (int c = 0; c < 5; ++c) CHECK(bars.at(0, c) == 0.0);
    CHECK(bars.at(0, 39) == 1.0);
    for (int r = 1; r < 30; ++r) CHECK(bars.at(r, 17) == bars.at(0, 17));
    const auto c = contrast_metrics(test_card(TestCard::black, mode));
    CHECK(c.mean_level == 0.0);
    CHECK(parse_test_card("ballot_card") == TestCard::ballot_card);
    CHECK_THROWS_AS(parse_test_card("zebra"), InvalidArgument);
}

TEST_CASE("compose pixel sequence counts and blanking") {
    const auto mode = lookup_mode(40, 30, 60);
    const auto seq = compose_pixel_sequence(FrameImage(40, 30, 1.0), mode);
    CHECK(seq.values.size() == 2000);
    CHECK(std::count(seq.values.begin(), seq.values.end(), 1.0) == 1200);
    CHECK(std::count(seq.values.begin(), seq.values.end(), 0.0) == 800);
    CHECK(seq.values[40] == 0.0);
    CHECK(seq.values[50] == 1.0);

    const auto lifted = compose_pixel_sequence(FrameImage(40, 30, 1.0), mode, 0.25);
    CHECK(std::accumulate(lifted.values.begin(), lifted.values.end(), 0.0) == doctest::Approx(1200 + 0.25 * 800));

    CHECK_THROWS_AS(compose_pixel_sequence(FrameImage(41, 30), mode), DimensionMismatch);
    CHECK_THROWS_AS(compose_pixel_sequence(FrameImage(40, 30), mode, 1.5), InvalidArgument);
}

TEST_CASE("compose preserves the image sum for random images") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto mode = lookup_mode(40, 30, 60);
    for (int t = 0; t < 50; ++t) {
        FrameImage img(40, 30);
        for (auto& v : img.intensity) v = u(rng);
        const auto seq = compose_pixel_sequence(img, mode);
        const double a = std::accumulate(seq.values.begin(), seq.values.end(), 0.0);
        const double b = std::accumulate(img.intensity.begin(), img.intensity.end(), 0.0);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("contrast of half black, half white") {
    FrameImage img(10, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 5; c < 10; ++c) img.at(r, c) = 1.0;
    const auto rep = contrast_metrics(img);
    CHECK(rep.rms_contrast == doctest::Approx(0.5));
    CHECK(rep.mean_level == doctest::Approx(0.5));
    CHECK(rep.edge_density > 0.0);
    CHECK_THROWS_AS(contrast_metrics(FrameImage()), EmptyFrame);
}

TEST_CASE("edge map and correlation helpers") {
    FrameImage img(4, 1);
    img.intensity = {1.0, 1.0, 0.0, 0.5};
    const auto e = horizontal_edge_map(img, 0.0);
    CHECK(e.intensity == std::vector<double>{1.0, 0.0, 1.0, 0.5});
    CHECK(horizontal_edge_map(img, 1.0).at(0, 0) == 0.0);

    CHECK(normalized_cross_correlation(img, img) == doctest::Approx(1.0));
    CHECK(normalized_cross_correlation(img, scaled(img, 0.3)) == doctest::Approx(1.0));
    CHECK(normalized_cross_correlation(img, FrameImage(4, 1, 0.2)) == 0.0);
    CHECK_THROWS_AS(normalized_cross_correlation(img, FrameImage(3, 1)), DimensionMismatch);
}

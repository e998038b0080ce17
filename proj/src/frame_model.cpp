#include "emleak/frame_model.hpp"

#include "emleak/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>

namespace emleak {

namespace {

bool is_pgm_whitespace(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Reads one header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (is_pgm_whitespace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !is_pgm_whitespace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    // The single whitespace after maxval is consumed here, as required.
    return tok;
}

int parse_positive(const std::string& tok, const char* what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used == tok.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    throw FormatError(std::string("PGM: bad ") + what + " '" + tok + "'");
}

FrameImage load_pgm(std::istream& in) {
    const std::string magic = pgm_token(in);
    if (magic != "P5") throw FormatError("PGM: bad magic '" + magic + "'");
    const int w = parse_positive(pgm_token(in), "width");
    const int h = parse_positive(pgm_token(in), "height");
    const int maxval = parse_positive(pgm_token(in), "maxval");
    if (maxval != 255) throw FormatError("PGM: only maxval 255 is supported");

    std::vector<unsigned char> payload(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size())
        throw FormatError("PGM: truncated payload");

    FrameImage img(w, h);
    std::transform(payload.begin(), payload.end(), img.intensity.begin(),
                   [](unsigned char v) { return v / 255.0; });
    return img;
}

struct PngReadDeleter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadDeleter() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

FrameImage load_png(const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp) throw IoError("cannot open '" + path.string() + "'");

    PngReadDeleter guard;
    guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!guard.png) throw FormatError("PNG: cannot allocate reader");
    guard.info = png_create_info_struct(guard.png);
    if (!guard.info) throw FormatError("PNG: cannot allocate info");

    // libpng reports errors by longjmp; nothing with a destructor may live
    // between here and the end of the decode.
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buffer;
    if (setjmp(png_jmpbuf(guard.png))) throw FormatError("PNG: corrupt or truncated file");

    png_init_io(guard.png, fp.get());
    png_read_info(guard.png, guard.info);
    const auto w = png_get_image_width(guard.png, guard.info);
    const auto h = png_get_image_height(guard.png, guard.info);
    const int depth = png_get_bit_depth(guard.png, guard.info);
    const int color = png_get_color_type(guard.png, guard.info);
    if (depth != 8) throw FormatError("PNG: only 8-bit images are supported");
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB)
        throw FormatError("PNG: only grayscale or RGB images are supported");
    const int channels = color == PNG_COLOR_TYPE_RGB ? 3 : 1;

    buffer.resize(static_cast<std::size_t>(w) * h * channels);
    rows.resize(h);
    for (png_uint_32 r = 0; r < h; ++r) rows[r] = buffer.data() + std::size_t{r} * w * channels;
    png_read_image(guard.png, rows.data());

    FrameImage img(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < img.intensity.size(); ++i) {
        if (channels == 1) {
            img.intensity[i] = buffer[i] / 255.0;
        } else {
            const auto* p = &buffer[i * 3];
            img.intensity[i] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
        }
    }
    return img;
}

// Half-open [round(lo*n), round(hi*n)).
std::pair<int, int> span_of(double lo, double hi, int n) {
    return {static_cast<int>(std::lround(lo * n)), static_cast<int>(std::lround(hi * n))};
}

void fill_rect(FrameImage& img, std::pair<int, int> rows, std::pair<int, int> cols, double v) {
    for (int r = rows.first; r < std::min(rows.second, img.height); ++r)
        for (int c = cols.first; c < std::min(cols.second, img.width); ++c) img.at(r, c) = v;
}

}  // namespace

FrameImage::FrameImage(int w, int h, double fill)
    : width(w), height(h), intensity(static_cast<std::size_t>(w) * h, fill) {}

void FrameImage::validate() const {
    if (width < 0 || height < 0 ||
        intensity.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw FormatError("image payload does not match its dimensions");
    for (double v : intensity)
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw FormatError("image intensity outside [0,1]");
}

TestCard parse_test_card(std::string_view name) {
    if (name == "black") return TestCard::black;
    if (name == "white") return TestCard::white;
    if (name == "bars") return TestCard::bars;
    if (name == "ballot_card" || name == "ballot") return TestCard::ballot_card;
    throw InvalidArgument("unknown test card '" + std::string(name) +
                          "' (black, white, bars, ballot_card)");
}

FrameImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), sizeof sig);
    const auto got = in.gcount();
    if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) {
        in.close();
        return load_png(path);
    }
    in.clear();
    in.seekg(0);
    return load_pgm(in);
}

void write_pgm(const FrameImage& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
    std::vector<unsigned char> bytes(frame.intensity.size());
    std::transform(frame.intensity.begin(), frame.intensity.end(), bytes.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

FrameImage test_card(TestCard kind, const DisplayMode& mode) {
    mode.validate();
    const int w = mode.active_width;
    const int h = mode.active_height;
    switch (kind) {
        case TestCard::black:
            return FrameImage(w, h, 0.0);
        case TestCard::white:
            return FrameImage(w, h, 1.0);
        case TestCard::bars: {
            // Eight equal vertical bars, alternating black/white, black first.
            FrameImage img(w, h);
            for (int c = 0; c < w; ++c) {
                const int bar = static_cast<int>((std::int64_t{c} * 8) / w);
                const double v = bar % 2 == 0 ? 0.0 : 1.0;
                for (int r = 0; r < h; ++r) img.at(r, c) = v;
            }
            return img;
        }
        case TestCard::ballot_card: {
            FrameImage img(w, h, 1.0);
            fill_rect(img, span_of(0.05, 0.12, h), {0, w}, 0.0);
            const auto cols = span_of(0.10, 0.45, w);
            for (double top : {0.25, 0.40, 0.55}) fill_rect(img, span_of(top, top + 0.05, h), cols, 0.0);
            return img;
        }
    }
    throw InvalidArgument("unknown test card");
}

PixelSequence compose_pixel_sequence(const FrameImage& frame, const DisplayMode& mode,
                                     double blanking_level) {
    mode.validate();
    if (frame.width != mode.active_width || frame.height != mode.active_height)
        throw DimensionMismatch("image is " + std::to_string(frame.width) + "x" +
                                std::to_string(frame.height) + " but mode " + mode.name +
                                " is " + std::to_string(mode.active_width) + "x" +
                                std::to_string(mode.active_height));
    if (!(blanking_level >= 0.0 && blanking_level <= 1.0))
        throw InvalidArgument("blanking level must lie in [0,1]");

    PixelSequence seq{mode, std::vector<double>(static_cast<std::size_t>(mode.total_pixels()),
                                                blanking_level)};
    for (int r = 0; r < frame.height; ++r) {
        const auto src = frame.intensity.begin() + static_cast<std::ptrdiff_t>(r) * frame.width;
        std::copy(src, src + frame.width,
                  seq.values.begin() + static_cast<std::ptrdiff_t>(r) * mode.total_width);
    }
    return seq;
}

ContrastReport contrast_metrics(const FrameImage& frame) {
    if (frame.intensity.empty()) throw EmptyFrame("contrast metrics of an empty frame");
    const auto n = static_cast<double>(frame.intensity.size());
    const double mean = std::accumulate(frame.intensity.begin(), frame.intensity.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : frame.intensity) ss += (v - mean) * (v - mean);

    std::size_t pairs = 0, transitions = 0;
    for (int r = 0; r < frame.height; ++r) {
        for (int c = 1; c < frame.width; ++c) {
            ++pairs;
            if (std::abs(frame.at(r, c) - frame.at(r, c - 1)) > 0.5) ++transitions;
        }
    }
    ContrastReport rep;
    rep.rms_contrast = std::sqrt(ss / n);
    rep.edge_density = pairs ? static_cast<double>(transitions) / static_cast<double>(pairs) : 0.0;
    rep.mean_level = mean;
    return rep;
}

FrameImage horizontal_edge_map(const FrameImage& frame, double left_level) {
    FrameImage out(frame.width, frame.height);
    for (int r = 0; r < frame.height; ++r) {
        double prev = left_level;
        for (int c = 0; c < frame.width; ++c) {
            out.at(r, c) = std::abs(frame.at(r, c) - prev);
            prev = frame.at(r, c);
        }
    }
    return out;
}

FrameImage scaled(const FrameImage& frame, double alpha) {
    FrameImage out = frame;
    for (double& v : out.intensity) v *= alpha;
    return out;
}

double normalized_cross_correlation(const FrameImage& a, const FrameImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch("cross-correlation of differently sized images");
    const auto n = a.intensity.size();
    if (n == 0) return 0.0;
    const double ma = std::accumulate(a.intensity.begin(), a.intensity.end(), 0.0) / n;
    const double mb = std::accumulate(b.intensity.begin(), b.intensity.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.intensity[i] - ma;
        const double db = b.intensity[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace emleak

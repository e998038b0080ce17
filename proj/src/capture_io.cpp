#include "emleak/capture_io.hpp"

#include "emleak/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace emleak {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_f32le(unsigned char* dst, float v) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) dst[b] = static_cast<unsigned char>(bits >> (8 * b));
}

float get_f32le(const unsigned char* src) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{src[b]} << (8 * b);
    return std::bit_cast<float>(bits);
}

const char* const kKnownKeys[] = {"sample_rate_hz", "center_freq_hz", "mode_name",
                                  "n_frames",       "seed",           "description"};

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& data_path) {
    return data_path.string() + ".meta.json";
}

nlohmann::json meta_to_json(const CaptureMeta& meta) {
    nlohmann::json j = meta.extra.is_object() ? meta.extra : nlohmann::json::object();
    j["sample_rate_hz"] = meta.sample_rate_hz;
    j["center_freq_hz"] = meta.center_freq_hz;
    j["mode_name"] = meta.mode_name;
    j["n_frames"] = meta.n_frames;
    j["seed"] = meta.seed ? nlohmann::json(*meta.seed) : nlohmann::json(nullptr);
    j["description"] = meta.description;
    return j;
}

CaptureMeta meta_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("capture sidecar must be a JSON object");
    CaptureMeta m;
    try {
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        m.center_freq_hz = j.value("center_freq_hz", 0.0);
        m.mode_name = j.value("mode_name", std::string("unknown"));
        m.n_frames = j.value("n_frames", 0);
        if (auto it = j.find("seed"); it != j.end() && !it->is_null())
            m.seed = it->get<std::uint64_t>();
        m.description = j.value("description", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed capture sidecar: ") + e.what());
    }
    if (!(m.sample_rate_hz > 0.0)) throw FormatError("sidecar sample_rate_hz must be positive");
    if (!(m.center_freq_hz >= 0.0)) throw FormatError("sidecar center_freq_hz must be >= 0");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : kKnownKeys) known = known || key == k;
        if (!known) m.extra[key] = value;
    }
    return m;
}

void write_capture(const BasebandCapture& capture, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        constexpr std::size_t kChunk = 1 << 16;
        std::vector<unsigned char> buf;
        for (std::size_t i = 0; i < capture.samples.size(); i += kChunk) {
            const std::size_t n = std::min(kChunk, capture.samples.size() - i);
            buf.resize(n * 8);
            for (std::size_t k = 0; k < n; ++k) {
                const Sample& s = capture.samples[i + k];
                put_f32le(&buf[k * 8], static_cast<float>(s.real()));
                put_f32le(&buf[k * 8 + 4], static_cast<float>(s.imag()));
            }
            out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        }
        if (!out) throw IoError("short write to '" + path.string() + "'");
    }
    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) throw IoError("cannot write '" + sidecar_path(path).string() + "'");
    side << meta_to_json(capture.meta).dump(2) << '\n';
    if (!side) throw IoError("short write to '" + sidecar_path(path).string() + "'");
}

BasebandCapture read_capture(const std::filesystem::path& path,
                             std::optional<double> sample_rate_override) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % 8 != 0)
        throw FormatError("'" + path.string() + "' is " + std::to_string(bytes) +
                          " bytes, not a whole number of cf32 samples");

    BasebandCapture cap;
    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        std::ifstream sj(side);
        if (!sj) throw IoError("cannot open '" + side.string() + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(sj);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("malformed sidecar '" + side.string() + "': " + e.what());
        }
        cap.meta = meta_from_json(j);
    } else if (!sample_rate_override) {
        throw MissingMeta("no sidecar '" + side.string() + "' and no sample rate given");
    } else {
        cap.meta.mode_name = "unknown";
        cap.meta.description = "raw cf32 without sidecar";
    }
    if (sample_rate_override) {
        if (!(*sample_rate_override > 0.0)) throw InvalidArgument("sample rate must be positive");
        cap.meta.sample_rate_hz = *sample_rate_override;
    }

    in.seekg(0);
    std::vector<unsigned char> buf(bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) throw IoError("short read of '" + path.string() + "'");
    cap.samples.resize(bytes / 8);
    for (std::size_t k = 0; k < cap.samples.size(); ++k)
        cap.samples[k] = {get_f32le(&buf[k * 8]), get_f32le(&buf[k * 8 + 4])};
    return cap;
}

}  // namespace emleak

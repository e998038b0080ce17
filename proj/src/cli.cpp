#include "emleak/cli.hpp"

#include "emleak/capture_io.hpp"
#include "emleak/emission_synth.hpp"
#include "emleak/error.hpp"
#include "emleak/frame_model.hpp"
#include "emleak/jammer_planner.hpp"
#include "emleak/raster_reconstructor.hpp"
#include "emleak/spectral_analyzer.hpp"
#include "emleak/video_timing.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace emleak::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ModeTable mode_table() {
    ModeTable table;
    if (const char* extra = std::getenv("EMLEAK_MODE_TABLE"); extra && *extra) table.load_file(extra);
    return table;
}

struct ImageSource {
    std::string image_path;
    std::string card;

    void attach(CLI::App* cmd) {
        cmd->add_option("--image", image_path, "Interface image (PGM P5 or 8-bit PNG)");
        cmd->add_option("--card", card, "Built-in test card: black, white, bars, ballot_card");
    }

    FrameImage load(const DisplayMode& mode) const {
        if (image_path.empty() == card.empty()) throw UsageError("give exactly one of --image or --card");
        if (!card.empty()) return test_card(parse_test_card(card), mode);
        return load_image(image_path);
    }
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << text;
    if (!f) throw IoError("short write to '" + path + "'");
}

std::optional<double> optional_rate(double v) { return v > 0.0 ? std::optional<double>(v) : std::nullopt; }

const DisplayMode& resolve_mode(const ModeTable& table, const std::string& flag, const CaptureMeta& meta) {
    if (!flag.empty()) return table.lookup(flag);
    if (meta.mode_name.empty() || meta.mode_name == "unknown")
        throw UsageError("capture does not name its mode; pass --mode");
    return table.lookup(meta.mode_name);
}

}  // namespace

ExitStatus run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Display emanation pre-characterization, synthesis and analysis", "emleak"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    // modes
    auto* modes_cmd = app.add_subcommand("modes", "List the display timing table");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Synthesize a baseband capture of a display emission");
    ImageSource synth_src;
    synth_src.attach(synth_cmd);
    std::string synth_mode, synth_out;
    double synth_fs = 0.0, synth_duty = 0.9, synth_blank = 0.0, synth_atten = 0.0;
    std::optional<double> synth_snr;
    int synth_k = 1, synth_frames = 1, synth_os = 4;
    bool synth_edge = false;
    std::uint64_t seed = 42;
    synth_cmd->add_option("--mode", synth_mode, "Display mode, e.g. 1280x720@60")->required();
    synth_cmd->add_option("--fs", synth_fs, "SDR sample rate in Hz")->required();
    synth_cmd->add_option("--k", synth_k, "Harmonic index to centre (0 = baseband)")->capture_default_str();
    synth_cmd->add_option("--frames", synth_frames, "Frames to synthesize")->capture_default_str();
    synth_cmd->add_option("--oversample", synth_os, "Render samples per pixel")->capture_default_str();
    synth_cmd->add_option("--duty", synth_duty, "Pulse duty cycle in (0,1]")->capture_default_str();
    synth_cmd->add_flag("--edge-emphasis", synth_edge, "Differentiate the pixel stream before shaping");
    synth_cmd->add_option("--blanking", synth_blank, "Blanking level in [0,1]")->capture_default_str();
    synth_cmd->add_option("--atten", synth_atten, "Channel attenuation in dB")->capture_default_str();
    synth_cmd->add_option("--snr", synth_snr, "SNR in dB (omit for a noiseless capture)");
    synth_cmd->add_option("--seed", seed, "Noise seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Output cf32 path (sidecar written alongside)")->required();

    // signature
    auto* sig_cmd = app.add_subcommand("signature", "Predict the harmonic signature of an interface image");
    ImageSource sig_src;
    sig_src.attach(sig_cmd);
    std::string sig_mode, sig_out;
    double sig_duty = 0.9, sig_blank = 0.0;
    int sig_kmax = 5;
    sig_cmd->add_option("--mode", sig_mode, "Display mode")->required();
    sig_cmd->add_option("--duty", sig_duty, "Pulse duty cycle")->capture_default_str();
    sig_cmd->add_option("--blanking", sig_blank, "Blanking level")->capture_default_str();
    sig_cmd->add_option("--kmax", sig_kmax, "Highest harmonic")->capture_default_str();
    sig_cmd->add_option("--out", sig_out, "Signature JSON path (default stdout)");

    // analyze
    auto* an_cmd = app.add_subcommand("analyze", "PSD, harmonic comb and rate estimates of a capture");
    std::string an_in, an_mode, an_psd;
    double an_fs = 0.0, an_overlap = 0.5, an_prom = 10.0, an_frame_span = 0.5, an_line_span = 50.0;
    int an_seg = 4096, an_cands = 201, an_kmax = 8;
    an_cmd->add_option("--in", an_in, "Capture cf32 path")->required();
    an_cmd->add_option("--fs", an_fs, "Sample rate override in Hz");
    an_cmd->add_option("--mode", an_mode, "Display mode (default: from the sidecar)");
    an_cmd->add_option("--segment", an_seg, "PSD segment length")->capture_default_str();
    an_cmd->add_option("--overlap", an_overlap, "PSD segment overlap fraction")->capture_default_str();
    an_cmd->add_option("--psd-out", an_psd, "Write the PSD as CSV (freq_hz,power_db)");
    an_cmd->add_option("--kmax", an_kmax, "Highest harmonic to look for")->capture_default_str();
    an_cmd->add_option("--prominence", an_prom, "Minimum comb prominence in dB")->capture_default_str();
    an_cmd->add_option("--frame-span", an_frame_span, "Frame-rate search half-span in Hz")->capture_default_str();
    an_cmd->add_option("--line-span", an_line_span, "Line-rate search half-span in Hz")->capture_default_str();
    an_cmd->add_option("--candidates", an_cands, "Grid points per rate search")->capture_default_str();

    // raster
    auto* ras_cmd = app.add_subcommand("raster", "Line-wise DFT raster of a capture");
    std::string ras_in, ras_mode, ras_out, ras_csv;
    double ras_fs = 0.0;
    int ras_spl = 0;
    bool ras_uncentered = false;
    ras_cmd->add_option("--in", ras_in, "Capture cf32 path")->required();
    ras_cmd->add_option("--fs", ras_fs, "Sample rate override in Hz");
    ras_cmd->add_option("--mode", ras_mode, "Display mode used to derive samples per line");
    ras_cmd->add_option("--spl", ras_spl, "Samples per line (overrides --mode)");
    ras_cmd->add_flag("--no-center", ras_uncentered, "Keep the DC bin in column 0");
    ras_cmd->add_option("--out", ras_out, "Raster PGM path")->required();
    ras_cmd->add_option("--csv", ras_csv, "Also dump raster values as CSV");

    // reconstruct
    auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct the screen image from a capture");
    std::string rec_in, rec_mode, rec_out;
    double rec_fs = 0.0;
    int rec_frames = 1;
    rec_cmd->add_option("--in", rec_in, "Capture cf32 path")->required();
    rec_cmd->add_option("--fs", rec_fs, "Sample rate override in Hz");
    rec_cmd->add_option("--mode", rec_mode, "Display mode (default: from the sidecar)");
    rec_cmd->add_option("--frames", rec_frames, "Frames to average")->capture_default_str();
    rec_cmd->add_option("--out", rec_out, "Output PGM path")->required();

    // plan-jam
    auto* jam_cmd = app.add_subcommand("plan-jam", "Rank jamming bands for a device profile");
    std::string jam_profile, jam_out, jam_flat;
    double jam_duty = 0.9, jam_guard = kDefaultGuardFactor;
    int jam_kmax = 3;
    jam_cmd->add_option("--profile", jam_profile, "Device profile JSON")->required();
    jam_cmd->add_option("--duty", jam_duty, "Pulse duty cycle")->capture_default_str();
    jam_cmd->add_option("--kmax", jam_kmax, "Highest harmonic")->capture_default_str();
    jam_cmd->add_option("--guard", jam_guard, "Bandwidth guard factor (>= 1)")->capture_default_str();
    jam_cmd->add_option("--out", jam_out, "Plan JSON path (default stdout)");
    jam_cmd->add_option("--flat", jam_flat, "Also write 'center_hz bandwidth_hz priority' lines");

    std::vector<std::string> argv_store{"emleak"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    auto usage = [&](const std::string& msg) {
        err << "error: " << msg << '\n' << app.help();
        return ExitStatus::usage_error;
    };

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitStatus::success;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ExitStatus::success;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        return usage(msg);
    }

    try {
        const ModeTable table = mode_table();

        if (*modes_cmd) {
            for (const auto& m : table.modes()) {
                out << m.name << " totals " << m.total_width << 'x' << m.total_height << " pixel_rate "
                    << std::fixed << std::setprecision(0) << pixel_rate(m) << " Hz" << std::defaultfloat
                    << std::setprecision(6) << '\n';
            }
        } else if (*synth_cmd) {
            const DisplayMode& mode = table.lookup(synth_mode);
            const FrameImage img = synth_src.load(mode);
            const PixelSequence seq = compose_pixel_sequence(img, mode, synth_blank);
            SynthOptions opts;
            opts.harmonic_k = synth_k;
            opts.sample_rate_hz = synth_fs;
            opts.n_frames = synth_frames;
            opts.oversample = synth_os;
            opts.edge_emphasis = synth_edge;
            ChannelSpec channel{synth_atten, synth_snr, seed};
            const auto cap = synthesize_baseband(seq, PulseSpec{synth_duty}, opts, channel);
            write_capture(cap, synth_out);
            out << "wrote " << cap.size() << " samples to " << synth_out << '\n';
        } else if (*sig_cmd) {
            const DisplayMode& mode = table.lookup(sig_mode);
            const FrameImage img = sig_src.load(mode);
            const auto sig = signature_from_public_image(img, mode, PulseSpec{sig_duty}, sig_kmax, sig_blank);
            write_text(sig_out, to_json(sig).dump(2) + "\n", out);
        } else if (*an_cmd) {
            const auto cap = read_capture(an_in, optional_rate(an_fs));
            const DisplayMode& mode = resolve_mode(table, an_mode, cap.meta);
            const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(std::max(an_seg, 8)), cap.size());
            const Psd spectrum = psd(cap, seg, an_overlap);
            if (!an_psd.empty()) {
                std::ostringstream csv;
                csv << "freq_hz,power_db\n";
                csv.precision(12);
                for (std::size_t i = 0; i < spectrum.freqs_hz.size(); ++i)
                    csv << spectrum.freqs_hz[i] << ',' << spectrum.power_db[i] << '\n';
                write_text(an_psd, csv.str(), out);
            }
            std::vector<int> ks;
            for (int k = 0; k <= an_kmax; ++k) ks.push_back(k);
            nlohmann::json report;
            report["psd_resolution_hz"] = spectrum.resolution_hz;
            report["detections"] = nlohmann::json::array();
            for (const auto& d : detect_harmonic_comb(spectrum, mode, cap.meta.center_freq_hz, ks, an_prom))
                report["detections"].push_back(
                    {{"k", d.k}, {"measured_freq_hz", d.measured_freq_hz}, {"prominence_db", d.prominence_db}});
            auto rate_json = [](const RateEstimate& r) {
                return nlohmann::json{{"rate_hz", r.rate_hz}, {"peak_to_mean", r.peak_to_mean}};
            };
            try {
                report["frame_rate"] = rate_json(estimate_frame_rate(cap, mode.refresh_hz, an_frame_span, an_cands));
            } catch (const TooShort& e) {
                report["frame_rate"] = {{"skipped", e.what()}};
            }
            try {
                report["line_rate"] = rate_json(estimate_line_rate(cap, mode, an_line_span, an_cands));
            } catch (const TooShort& e) {
                report["line_rate"] = {{"skipped", e.what()}};
            }
            out << report.dump(2) << '\n';
        } else if (*ras_cmd) {
            const auto cap = read_capture(ras_in, optional_rate(ras_fs));
            int spl = ras_spl;
            if (spl <= 0) {
                if (ras_mode.empty() && (cap.meta.mode_name.empty() || cap.meta.mode_name == "unknown"))
                    throw UsageError("pass --spl or --mode");
                const DisplayMode& mode = resolve_mode(table, ras_mode, cap.meta);
                spl = raster_columns(samples_per_line(mode, cap.meta.sample_rate_hz));
            }
            const RasterImage raster = line_dft_raster(cap, spl, !ras_uncentered);
            write_raster_pgm(raster, ras_out);
            if (!ras_csv.empty()) write_raster_csv(raster, ras_csv);
            const auto means = raster.column_means();
            const auto peak = std::max_element(means.begin(), means.end()) - means.begin();
            out << "raster " << raster.rows << "x" << raster.cols << ", peak column " << peak << " ("
                << peak * raster.seconds_per_col * 1e6 << " us)\n";
        } else if (*rec_cmd) {
            const auto cap = read_capture(rec_in, optional_rate(rec_fs));
            const DisplayMode& mode = resolve_mode(table, rec_mode, cap.meta);
            const FrameImage img = reconstruct_image(cap, mode, rec_frames, std::filesystem::path(rec_out));
            out << "wrote " << img.width << "x" << img.height << " image to " << rec_out << '\n';
        } else if (*jam_cmd) {
            const DeviceProfile profile = load_device_profile(jam_profile, table);
            const JamPlan plan = plan_jamming(profile, PulseSpec{jam_duty}, jam_kmax, jam_guard);
            write_text(jam_out, to_json(plan).dump(2) + "\n", out);
            if (!jam_flat.empty()) write_text(jam_flat, to_flat_text(plan), out);
        }
    } catch (const UsageError& e) {
        return usage(e.what());
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << msg << '\n';
        return ExitStatus::domain_error;
    }
    return ExitStatus::success;
}

}  // namespace emleak::cli

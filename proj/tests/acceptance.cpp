// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include "emleak/capture_io.hpp"
#include "emleak/emission_synth.hpp"
#include "emleak/error.hpp"
#include "emleak/frame_model.hpp"
#include "emleak/jammer_planner.hpp"
#include "emleak/raster_reconstructor.hpp"
#include "emleak/spectral_analyzer.hpp"
#include "emleak/video_timing.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace emleak;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

DisplayMode synthetic_mode(double refresh = 60.0) { return {"synth", 40, 30, 50, 40, refresh}; }

Outcome case_study_arithmetic() {
    const DisplayMode mode = lookup_mode(1280, 720, 60);
    const double fs = 54e6;
    bool ok = mode.total_width == 1650 && mode.total_height == 750;
    ok = ok && pixel_rate(mode) == 74'250'000.0;
    ok = ok && samples_per_line(mode, fs) == 1200.0;
    const double line_s = samples_per_line(mode, fs) / fs;
    ok = ok && rel(line_s, 1200.0 / 54e6) <= 1e-12 && rel(line_s, 22.0e-6 + 2.0e-6 / 9.0) <= 1e-12;

    // One frame of the ballot card; the centred line DFT puts DC at column 600.
    SynthOptions o;
    o.harmonic_k = 1;
    o.sample_rate_hz = fs;
    o.oversample = 10;
    const auto seq = compose_pixel_sequence(test_card(TestCard::ballot_card, mode), mode);
    const auto cap = synthesize_baseband(seq, PulseSpec{0.9}, o, ChannelSpec::noiseless());
    const auto dft = line_dft_raster(cap, 1200, true);
    const auto means = dft.column_means();
    const auto peak = std::distance(means.begin(), std::max_element(means.begin(), means.end()));
    const double peak_us = static_cast<double>(peak) / fs * 1e6;
    ok = ok && peak == 600 && std::abs(peak_us - 11.11) < 0.005;

    char buf[160];
    std::snprintf(buf, sizeof buf, "f_p=%.0f Hz, spl=%.0f, line=%.4f us, DC column %td (%.3f us)",
                  pixel_rate(mode), samples_per_line(mode, fs), line_s * 1e6, peak, peak_us);
    return {ok, buf};
}

Outcome sinc_nulls() {
    const DisplayMode mode = lookup_mode(40, 30, 60);
    const auto seq = compose_pixel_sequence(FrameImage(40, 30, 0.6), mode, 0.6);
    const double fp = pixel_rate(mode);
    const std::vector<double> f{0.0, fp, 2 * fp, 3 * fp};
    const auto full = predicted_spectrum(seq, PulseSpec{1.0}, f);
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) worst = std::max(worst, std::abs(full[k]) / std::abs(full[0]));
    const auto partial = predicted_spectrum(seq, PulseSpec{0.9}, std::vector<double>{fp});
    const bool ok = worst <= 1e-9 && std::abs(partial[0]) > 0.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "duty 1: worst |X(k f_p)|/|X(0)| = %.2e; duty 0.9: |X(f_p)| = %.3e",
                  worst, std::abs(partial[0]));
    return {ok, buf};
}

Outcome replica_periodicity() {
    const DisplayMode mode = synthetic_mode();
    const double fp = pixel_rate(mode);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> level(0.0, 1.0);
    std::uniform_real_distribution<double> freq(-3 * fp, 3 * fp);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        PixelSequence seq{mode, std::vector<double>(static_cast<std::size_t>(mode.total_pixels()))};
        for (auto& v : seq.values) v = level(rng);
        std::vector<double> f(10), g(10);
        for (int i = 0; i < 10; ++i) {
            f[i] = freq(rng);
            g[i] = f[i] + fp;
        }
        const auto a = dtft_pixels(seq, f);
        const auto b = dtft_pixels(seq, g);
        for (int i = 0; i < 10; ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i])));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "1000 evaluations, worst |S(f)-S(f+f_p)|/(1+|S|) = %.2e", worst);
    return {worst <= 1e-9, buf};
}

double reconstruction_ncc(const DisplayMode& mode) {
    const auto img = test_card(TestCard::ballot_card, mode);
    SynthOptions o;
    o.harmonic_k = 1;
    o.sample_rate_hz = pixel_rate(mode) * 54.0 / 74.25;
    o.n_frames = 10;
    ChannelSpec ch;
    ch.snr_db = 30.0;
    ch.seed = 1;
    const auto cap = synthesize_baseband(compose_pixel_sequence(img, mode), PulseSpec{0.9}, o, ch);
    const auto rec = reconstruct_image(cap, mode, 10);
    return normalized_cross_correlation(rec, horizontal_edge_map(img, 0.0));
}

Outcome end_to_end_reconstruction() {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    const double big = reconstruction_ncc(lookup_mode(1280, 720, 60));
    auto t1 = clock::now();
    const double small = reconstruction_ncc(lookup_mode(40, 30, 60));
    auto t2 = clock::now();
    const double big_s = std::chrono::duration<double>(t1 - t0).count();
    const double small_s = std::chrono::duration<double>(t2 - t1).count();
    const bool ok = big >= 0.6 && small >= 0.6 && big_s <= 60.0 && small_s < 2.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "NCC 1650x750 = %.3f (%.1f s), NCC 50x40 = %.3f (%.2f s)", big, big_s,
                  small, small_s);
    return {ok, buf};
}

Outcome rate_estimation() {
    const double fs = 96000.0;
    int frame_ok_min = 10;
    double worst_frame = 0.0, worst_line = 0.0;
    bool line_ok = true;
    for (double fv : {59.94, 60.00, 60.05}) {
        const DisplayMode truth = synthetic_mode(fv);
        const DisplayMode nominal = synthetic_mode(60.0);
        SynthOptions o;
        o.harmonic_k = 1;
        o.sample_rate_hz = fs;
        o.n_frames = 8;
        const auto seq = compose_pixel_sequence(test_card(TestCard::ballot_card, truth), truth);
        int frame_ok = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            ChannelSpec ch;
            ch.snr_db = 20.0;
            ch.seed = seed;
            const auto cap = synthesize_baseband(seq, PulseSpec{0.9}, o, ch);
            const double ef = std::abs(estimate_frame_rate(cap, 60.0, 0.5, 201).rate_hz - fv);
            const double el = std::abs(estimate_line_rate(cap, nominal, 5.0, 201).rate_hz - 40 * fv);
            frame_ok += ef <= 0.005;
            line_ok = line_ok && el <= 0.5;
            worst_frame = std::max(worst_frame, ef);
            worst_line = std::max(worst_line, el);
        }
        frame_ok_min = std::min(frame_ok_min, frame_ok);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "frame rate within 0.005 Hz in >= %d/10 seeds (worst %.4f Hz); line rate worst %.3f Hz",
                  frame_ok_min, worst_frame, worst_line);
    return {frame_ok_min >= 9 && line_ok, buf};
}

double complex_mse(const ComplexRaster& a, const ComplexRaster& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::norm(a.values[i] - b.values[i]);
    return acc / static_cast<double>(a.values.size());
}

Outcome averaging_gain() {
    const DisplayMode mode = synthetic_mode();
    SynthOptions o;
    o.harmonic_k = 1;
    o.sample_rate_hz = 96000.0;
    o.n_frames = 16;
    const auto seq = compose_pixel_sequence(test_card(TestCard::ballot_card, mode), mode);
    const auto clean = synthesize_baseband(seq, PulseSpec{0.9}, o, ChannelSpec::noiseless());
    const auto ref1 = average_frames_complex(clean, mode, 1);
    const auto ref16 = average_frames_complex(clean, mode, 16);
    double lo = 1e9, hi = -1e9;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ChannelSpec ch;
        ch.snr_db = 10.0;
        ch.seed = seed;
        const auto noisy = synthesize_baseband(seq, PulseSpec{0.9}, o, ch);
        const double gain = 10.0 * std::log10(complex_mse(average_frames_complex(noisy, mode, 1), ref1) /
                                              complex_mse(average_frames_complex(noisy, mode, 16), ref16));
        lo = std::min(lo, gain);
        hi = std::max(hi, gain);
        ok = ok && std::abs(gain - 12.0) <= 2.0;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "noise floor reduction N=16 vs N=1: %.2f..%.2f dB over 5 seeds", lo, hi);
    return {ok, buf};
}

std::vector<int> priority_order(const JamPlan& plan) {
    std::vector<JamBand> bands = plan.bands;
    std::sort(bands.begin(), bands.end(), [](const JamBand& a, const JamBand& b) { return a.priority < b.priority; });
    std::vector<int> ks;
    for (const auto& b : bands) ks.push_back(b.k);
    return ks;
}

Outcome jam_plan() {
    DeviceProfile profile{"UE2020-like voting terminal", lookup_mode(1280, 720, 60), std::nullopt,
                          "office, one interior wall"};
    const auto img = test_card(TestCard::ballot_card, profile.mode);
    const auto plan = plan_jamming(profile, img, PulseSpec{0.9}, 3, 3.0);
    const auto half = plan_jamming(profile, scaled(img, 0.5), PulseSpec{0.9}, 3, 3.0);

    bool ok = plan.bands.size() == 3 && !plan.zero_power;
    const double centers[3] = {74.25e6, 148.5e6, 222.75e6};
    for (std::size_t i = 0; ok && i < 3; ++i) {
        ok = plan.bands[i].center_freq_hz == centers[i] && std::abs(plan.bands[i].bandwidth_hz - 270e3) < 1e-6;
    }
    const auto& entries = plan.source_signature.entries;
    const auto strongest = std::max_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.predicted_rel_power < b.predicted_rel_power;
    });
    const auto order = priority_order(plan);
    ok = ok && !order.empty() && order.front() == strongest->k;
    ok = ok && order == priority_order(half);

    std::string perm;
    for (int k : order) perm += std::to_string(k) + ' ';
    char buf[200];
    std::snprintf(buf, sizeof buf, "centers %.2f/%.2f/%.2f MHz, bandwidth %.0f kHz, priority order k = %s(unchanged at 0.5x)",
                  plan.bands.at(0).center_freq_hz / 1e6, plan.bands.at(1).center_freq_hz / 1e6,
                  plan.bands.at(2).center_freq_hz / 1e6, plan.bands.at(0).bandwidth_hz / 1e3, perm.c_str());
    return {ok, buf};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome io_round_trips() {
    oracle::TempDir dir;
    const DisplayMode mode = synthetic_mode();
    SynthOptions o;
    o.harmonic_k = 1;
    o.sample_rate_hz = 96000.0;
    ChannelSpec ch;
    ch.snr_db = 15.0;
    const auto cap = synthesize_baseband(
        compose_pixel_sequence(test_card(TestCard::bars, mode), mode), PulseSpec{0.9}, o, ch);

    write_capture(cap, dir / "a.cf32");
    const auto back = read_capture(dir / "a.cf32");
    bool cap_ok = back.meta == cap.meta && back.size() == cap.size();
    for (std::size_t i = 0; cap_ok && i < cap.size(); ++i) {
        cap_ok = back.samples[i] == Sample(static_cast<float>(cap.samples[i].real()),
                                           static_cast<float>(cap.samples[i].imag()));
    }
    write_capture(back, dir / "b.cf32");
    cap_ok = cap_ok && slurp(dir / "a.cf32") == slurp(dir / "b.cf32");

    FrameImage img(37, 11);
    for (std::size_t i = 0; i < img.intensity.size(); ++i) img.intensity[i] = static_cast<double>(i % 256) / 255.0;
    write_pgm(img, dir / "img.pgm");
    const auto img_back = load_image(dir / "img.pgm");
    const bool pgm_ok = img_back.width == 37 && img_back.height == 11 && img_back.intensity == img.intensity;

    {
        std::ofstream bad(dir / "bad.cf32", std::ios::binary);
        bad << std::string(25, '\0');
    }
    bool trunc_ok = false;
    try {
        read_capture(dir / "bad.cf32", 1e6);
    } catch (const FormatError&) {
        trunc_ok = true;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "capture %s, PGM %s, truncated cf32 %s", cap_ok ? "bit-exact" : "MISMATCH",
                  pgm_ok ? "value-exact" : "MISMATCH", trunc_ok ? "raises FormatError" : "NOT rejected");
    return {cap_ok && pgm_ok && trunc_ok, buf};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, case_study_arithmetic}, {2, sinc_nulls},     {3, replica_periodicity},
        {4, end_to_end_reconstruction}, {5, rate_estimation}, {6, averaging_gain},
        {7, jam_plan},              {8, io_round_trips},
    };
    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !r.pass;
        std::printf("criterion %d: %s  %s  [%.2f s]\n", id, r.pass ? "PASS" : "FAIL", r.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

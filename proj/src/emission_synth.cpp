#include "emleak/emission_synth.hpp"

#include "emleak/error.hpp"
#include "emleak/resampler.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace emleak {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sin(pi u)/(pi u) with exact zeros at nonzero integers.
double sinc(double u) {
    if (u == 0.0) return 1.0;
    const double r = std::nearbyint(u);
    const double d = u - r;
    double s = std::sin(std::numbers::pi * d);
    if (std::fmod(std::abs(r), 2.0) == 1.0) s = -s;
    return s / (std::numbers::pi * u);
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

void check_finite(std::span<const Sample> s, const char* stage) {
    for (const auto& v : s)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalOverflow(std::string("non-finite sample after ") + stage);
}

}  // namespace

void PulseSpec::validate() const {
    if (!(duty > 0.0 && duty <= 1.0)) throw InvalidArgument("pulse duty must lie in (0,1]");
}

std::complex<double> pulse_spectrum(const PulseSpec& pulse, const DisplayMode& mode, double freq_hz) {
    pulse.validate();
    const double width = pulse.duty * pixel_period(mode);
    return {width * sinc(freq_hz * width), 0.0};
}

std::vector<std::complex<double>> dtft_pixels(const PixelSequence& pixseq,
                                              std::span<const double> freqs_hz) {
    if (pixseq.values.empty()) throw EmptySequence("DTFT of an empty pixel sequence");
    const double fp = pixel_rate(pixseq.mode);
    std::vector<std::complex<double>> out;
    out.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        // S is periodic in f_p; fmod is exact, so reducing first keeps n*nu
        // small and the phase well conditioned.
        double nu = std::fmod(f, fp) / fp;
        if (nu < 0.0) nu += 1.0;
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < pixseq.values.size(); ++n) {
            const double x = pixseq.values[n];
            if (x == 0.0) continue;
            double cycles = nu * static_cast<double>(n);
            cycles -= std::floor(cycles);
            const double phase = -kTwoPi * cycles;
            re += x * std::cos(phase);
            im += x * std::sin(phase);
        }
        out.emplace_back(re, im);
    }
    return out;
}

std::vector<std::complex<double>> predicted_spectrum(const PixelSequence& pixseq,
                                                     const PulseSpec& pulse,
                                                     std::span<const double> freqs_hz) {
    auto s = dtft_pixels(pixseq, freqs_hz);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= pulse_spectrum(pulse, pixseq.mode, freqs_hz[i]);
    return s;
}

int pulse_high_samples(const PulseSpec& pulse, int oversample) {
    pulse.validate();
    const auto hi = static_cast<int>(std::lround(oversample * pulse.duty));
    return std::clamp(hi, 1, oversample);
}

double mean_power(std::span<const Sample> samples) {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples) acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

void add_awgn(std::vector<Sample>& samples, double variance, std::uint64_t seed) {
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw InvalidArgument("noise variance must be finite and non-negative");
    if (variance == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    for (auto& s : samples) {
        const double i = gauss(rng);
        const double q = gauss(rng);
        s += Sample{i, q};
    }
}

BasebandCapture noise_capture(std::size_t n, double sample_rate_hz, double center_freq_hz,
                              double variance, std::uint64_t seed) {
    BasebandCapture cap;
    cap.samples.assign(n, Sample{});
    add_awgn(cap.samples, variance, seed);
    cap.meta.sample_rate_hz = sample_rate_hz;
    cap.meta.center_freq_hz = center_freq_hz;
    cap.meta.seed = seed;
    cap.meta.description = "complex white Gaussian noise";
    return cap;
}

BasebandCapture synthesize_baseband(const PixelSequence& pixseq, const PulseSpec& pulse,
                                    const SynthOptions& opts, const ChannelSpec& channel) {
    const DisplayMode& mode = pixseq.mode;
    mode.validate();
    pulse.validate();
    if (pixseq.values.size() != static_cast<std::size_t>(mode.total_pixels()))
        throw InvalidArgument("pixel sequence length does not match its mode");
    if (opts.harmonic_k < 0) throw InvalidArgument("harmonic index must be >= 0");
    if (opts.n_frames < 1) throw InvalidArgument("n_frames must be >= 1");
    if (opts.oversample < 1) throw InvalidArgument("oversample must be >= 1");
    if (!(channel.attenuation_db >= 0.0) || !std::isfinite(channel.attenuation_db))
        throw InvalidArgument("attenuation must be finite and >= 0 dB");

    const double fp = pixel_rate(mode);
    const double render_rate = opts.oversample * fp;
    const double fs = opts.sample_rate_hz;
    const double center = opts.harmonic_k * fp;
    constexpr double kRateSlack = 1e-9;
    if (!(fs > 0.0) || fs > render_rate * (1.0 + kRateSlack))
        throw InvalidArgument("sample rate must lie in (0, oversample * pixel_rate]");
    // Content at the harmonic +- fs/2 has to sit below the render Nyquist
    // frequency, otherwise the mixed signal aliases.
    if (center + fs / 2.0 > render_rate / 2.0 * (1.0 + kRateSlack))
        throw InvalidArgument("harmonic " + std::to_string(opts.harmonic_k) +
                              " is not representable at oversample " +
                              std::to_string(opts.oversample) + "; raise --oversample");

    // Pixel stream, optionally differentiated (wrapping across frames).
    const std::vector<double>& x = pixseq.values;
    std::vector<double> diff;
    if (opts.edge_emphasis) {
        diff.resize(x.size());
        for (std::size_t n = 0; n < x.size(); ++n) diff[n] = x[n] - x[n == 0 ? x.size() - 1 : n - 1];
    }
    const std::vector<double>& stream = opts.edge_emphasis ? diff : x;

    const int os = opts.oversample;
    const int high = pulse_high_samples(pulse, os);
    std::vector<Sample> rotor(static_cast<std::size_t>(os));
    for (int j = 0; j < os; ++j) {
        // exp(-j 2 pi k f_p t) at t = j / (os f_p); exact period of os samples.
        const double cycles =
            static_cast<double>(floor_mod(std::int64_t{opts.harmonic_k} * j, os)) / os;
        rotor[static_cast<std::size_t>(j)] = std::polar(1.0, -kTwoPi * cycles);
    }

    const std::int64_t n_pixels = mode.total_pixels();
    const std::int64_t frame_samples = n_pixels * os;
    auto input = [&](std::int64_t i) -> Sample {
        const std::int64_t w = floor_mod(i, frame_samples);
        const std::int64_t slot = w % os;
        if (slot >= high) return {};
        return stream[static_cast<std::size_t>(w / os)] * rotor[static_cast<std::size_t>(slot)];
    };

    const auto n_out = static_cast<std::int64_t>(std::llround(opts.n_frames * fs / mode.refresh_hz));
    const Resampler rs(render_rate, fs);
    BasebandCapture cap;
    cap.samples = rs.run(input, n_out);
    check_finite(cap.samples, "resampling");

    const double gain = std::pow(10.0, -channel.attenuation_db / 20.0);
    if (gain != 1.0)
        for (auto& s : cap.samples) s *= gain;

    if (channel.snr_db) {
        if (!std::isfinite(*channel.snr_db)) throw InvalidArgument("SNR must be finite");
        const double ps = mean_power(cap.samples);
        add_awgn(cap.samples, ps / std::pow(10.0, *channel.snr_db / 10.0), channel.seed);
    }
    check_finite(cap.samples, "channel");

    cap.meta.sample_rate_hz = fs;
    cap.meta.center_freq_hz = center;
    cap.meta.mode_name = mode.name;
    cap.meta.n_frames = opts.n_frames;
    cap.meta.seed = channel.seed;
    cap.meta.description = "synthesized emission, harmonic " + std::to_string(opts.harmonic_k) +
                           ", duty " + std::to_string(pulse.duty);
    return cap;
}

}  // namespace emleak

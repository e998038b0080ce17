#include "emleak/spectral_analyzer.hpp"

#include "emleak/error.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace emleak {

namespace {

double to_db(double p) { return p > 0.0 ? std::max(10.0 * std::log10(p), kPsdFloorDb) : kPsdFloorDb; }

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

// Index range [lo, hi) of ascending `freqs` within [a, b].
std::pair<std::size_t, std::size_t> bins_between(const std::vector<double>& freqs, double a, double b) {
    const auto lo = std::lower_bound(freqs.begin(), freqs.end(), a);
    const auto hi = std::upper_bound(freqs.begin(), freqs.end(), b);
    return {static_cast<std::size_t>(lo - freqs.begin()), static_cast<std::size_t>(hi - freqs.begin())};
}

std::size_t nearest_bin(const std::vector<double>& freqs, double f) {
    const auto it = std::lower_bound(freqs.begin(), freqs.end(), f);
    if (it == freqs.begin()) return 0;
    if (it == freqs.end()) return freqs.size() - 1;
    const auto i = static_cast<std::size_t>(it - freqs.begin());
    return (f - freqs[i - 1] <= freqs[i] - f) ? i - 1 : i;
}

std::size_t floor_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

std::size_t ceil_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p *= 2;
    return p;
}

// Autocorrelation of the magnitude envelope at a fractional lag,
// R(L) = mean_n |x[n]| |x(n + L)|. The delayed sample x(n + L) comes from
// windowed-sinc interpolation of the complex (band-limited) samples before
// the magnitude is taken; the fractional part of L is the same for every n,
// so the taps are computed once per lag.
class EnvelopeAutocorrelation {
public:
    static constexpr int kTaps = 16;
    static constexpr double kBeta = 6.0;
    // Upper bound on product terms per lag; long captures use their leading
    // part.
    static constexpr std::size_t kMaxTerms = std::size_t{1} << 19;

    explicit EnvelopeAutocorrelation(const BasebandCapture& capture) : x_(capture.samples) {
        env_.resize(x_.size());
        std::transform(x_.begin(), x_.end(), env_.begin(), [](const Sample& s) { return std::abs(s); });
    }

    double at(double lag) const {
        const double base_f = std::floor(lag);
        const double frac = lag - base_f;
        const auto base = static_cast<std::int64_t>(base_f);
        constexpr int half = kTaps / 2;
        double taps[kTaps];
        double sum = 0.0;
        for (int j = 0; j < kTaps; ++j) {
            // Tap j weights x[n + base - half + 1 + j].
            const double tau = frac + half - 1 - j;
            taps[j] = windowed_sinc(tau);
            sum += taps[j];
        }
        for (double& t : taps) t /= sum;

        const auto n_total = static_cast<std::int64_t>(x_.size());
        const std::int64_t first_needed = base - half + 1;  // relative to n
        const std::int64_t n_begin = std::max<std::int64_t>(0, -first_needed);
        std::int64_t n_end = n_total - (base + half);        // exclusive
        if (n_end - n_begin <= 0) return 0.0;
        n_end = std::min<std::int64_t>(n_end, n_begin + static_cast<std::int64_t>(kMaxTerms));

        double acc = 0.0;
        for (std::int64_t n = n_begin; n < n_end; ++n) {
            const Sample* src = &x_[static_cast<std::size_t>(n + first_needed)];
            double re = 0.0, im = 0.0;
            for (int j = 0; j < kTaps; ++j) {
                re += taps[j] * src[j].real();
                im += taps[j] * src[j].imag();
            }
            acc += env_[static_cast<std::size_t>(n)] * std::sqrt(re * re + im * im);
        }
        return acc / static_cast<double>(n_end - n_begin);
    }

private:
    static double windowed_sinc(double tau) {
        constexpr double half = kTaps / 2.0;
        if (std::abs(tau) >= half) return 0.0;
        const double x = std::numbers::pi * tau;
        const double sinc = tau == 0.0 ? 1.0 : std::sin(x) / x;
        const double t = tau / half;
        return sinc * std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - t * t)) / std::cyl_bessel_i(0.0, kBeta);
    }

    const std::vector<Sample>& x_;
    std::vector<double> env_;
};

// Grid search over candidate rates f maximizing sum_m R(m * fs / f) over the
// lag multiples `multiples` that fit in the capture, followed by three-point
// parabolic refinement.
RateEstimate autocorrelation_search(const BasebandCapture& capture, double nominal_hz, double span_hz,
                                    int n_candidates, double min_periods, const char* what,
                                    const std::vector<int>& multiples = {1}) {
    const double fs = capture.meta.sample_rate_hz;
    if (!(fs > 0.0)) throw InvalidArgument("capture has no sample rate");
    if (!(nominal_hz > 0.0)) throw InvalidArgument(std::string("nominal ") + what + " must be positive");
    if (!(span_hz >= 0.0) || span_hz >= nominal_hz)
        throw InvalidArgument("search span must lie in [0, nominal)");
    if (n_candidates < 1) throw InvalidArgument("need at least one candidate");
    const double n = static_cast<double>(capture.size());
    if (n < min_periods * fs / nominal_hz)
        throw TooShort(std::string("capture too short for ") + what + " estimation");
    if (span_hz == 0.0 || n_candidates == 1) return {nominal_hz, 1.0};

    std::vector<double> freqs(static_cast<std::size_t>(n_candidates));
    std::vector<double> lags(freqs.size());
    const double step = 2.0 * span_hz / (n_candidates - 1);
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        freqs[j] = nominal_hz - span_hz + static_cast<double>(j) * step;
        lags[j] = fs / freqs[j];
    }
    if (lags.front() + EnvelopeAutocorrelation::kTaps >= n)
        throw TooShort(std::string("capture too short for ") + what + " search span");

    const EnvelopeAutocorrelation acf(capture);
    std::vector<int> usable;
    for (int m : multiples)
        if (m * lags.front() + EnvelopeAutocorrelation::kTaps < n) usable.push_back(m);
    std::vector<double> score(freqs.size(), 0.0);
    for (std::size_t j = 0; j < freqs.size(); ++j)
        for (int m : usable) score[j] += acf.at(m * lags[j]);

    const auto best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
    double rate = freqs[best];
    if (best > 0 && best + 1 < score.size()) {
        const double a = score[best - 1], b = score[best], c = score[best + 1];
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) rate += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) * step;
    }
    const double mean = std::accumulate(score.begin(), score.end(), 0.0) / static_cast<double>(score.size());
    return {rate, mean > 0.0 ? score[best] / mean : 1.0};
}

}  // namespace

nlohmann::json to_json(const SpectralSignature& sig) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : sig.entries)
        entries.push_back({{"k", e.k}, {"center_freq_hz", e.center_freq_hz}, {"predicted_rel_power", e.predicted_rel_power}});
    return {{"mode_name", sig.mode_name},
            {"pixel_rate_hz", sig.pixel_rate_hz},
            {"line_rate_hz", sig.line_rate_hz},
            {"frame_rate_hz", sig.frame_rate_hz},
            {"entries", entries}};
}

SpectralSignature signature_from_json(const nlohmann::json& j) {
    SpectralSignature sig;
    try {
        sig.mode_name = j.at("mode_name").get<std::string>();
        sig.pixel_rate_hz = j.at("pixel_rate_hz").get<double>();
        sig.line_rate_hz = j.at("line_rate_hz").get<double>();
        sig.frame_rate_hz = j.at("frame_rate_hz").get<double>();
        for (const auto& e : j.at("entries"))
            sig.entries.push_back({e.at("k").get<int>(), e.at("center_freq_hz").get<double>(),
                                   e.at("predicted_rel_power").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed signature JSON: ") + e.what());
    }
    return sig;
}

SpectralSignature signature_from_public_image(const FrameImage& frame, const DisplayMode& mode,
                                              const PulseSpec& pulse, int k_max, double blanking_level) {
    if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
    const PixelSequence seq = compose_pixel_sequence(frame, mode, blanking_level);
    const double fp = pixel_rate(mode);
    const double fh = line_rate(mode);

    std::vector<double> offsets(kBandProbes);
    for (int i = 0; i < kBandProbes; ++i) offsets[i] = -fh + 2.0 * fh * i / (kBandProbes - 1);
    // The DTFT term repeats every f_p, so one evaluation serves every harmonic.
    const auto dtft = dtft_pixels(seq, offsets);

    SpectralSignature sig;
    sig.mode_name = mode.name;
    sig.pixel_rate_hz = fp;
    sig.line_rate_hz = fh;
    sig.frame_rate_hz = mode.refresh_hz;
    double peak = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const double center = k * fp;
        double acc = 0.0;
        for (int i = 0; i < kBandProbes; ++i)
            acc += std::norm(pulse_spectrum(pulse, mode, center + offsets[i]) * dtft[i]);
        const double power = acc / kBandProbes;
        peak = std::max(peak, power);
        sig.entries.push_back({k, center, power});
    }
    for (auto& e : sig.entries) e.predicted_rel_power = peak > 0.0 ? e.predicted_rel_power / peak : 0.0;
    return sig;
}

double Psd::linear(std::size_t i) const {
    return power_db[i] <= kPsdFloorDb ? 0.0 : std::pow(10.0, power_db[i] / 10.0);
}

double Psd::total_power() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < power_db.size(); ++i) acc += linear(i);
    return acc;
}

Psd psd(const BasebandCapture& capture, std::size_t segment_len, double overlap_fraction) {
    if (segment_len < 8) throw InvalidArgument("PSD segment length must be >= 8");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw InvalidArgument("overlap fraction must lie in [0,1)");
    if (capture.size() < segment_len)
        throw TooShort("capture of " + std::to_string(capture.size()) + " samples is shorter than one segment");
    const double fs = capture.meta.sample_rate_hz;
    if (!(fs > 0.0)) throw InvalidArgument("capture has no sample rate");

    const std::size_t L = segment_len;
    const auto overlap = static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(L)));
    const std::size_t hop = std::max<std::size_t>(1, L - std::min(overlap, L - 1));
    const std::size_t segments = (capture.size() - L) / hop + 1;

    std::vector<double> window(L);
    double wpow = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(L)));
        wpow += window[i] * window[i];
    }

    detail::ForwardFft fft(L);
    auto& buf = fft.buffer();
    std::vector<double> acc(L, 0.0);
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t start = s * hop;
        for (std::size_t i = 0; i < L; ++i) buf[i] = capture.samples[start + i] * window[i];
        fft.execute();
        for (std::size_t i = 0; i < L; ++i) acc[i] += std::norm(buf[i]);
    }
    // Sum over bins equals the window-compensated mean square.
    const double scale = 1.0 / (static_cast<double>(segments) * static_cast<double>(L) * wpow);

    Psd out;
    out.resolution_hz = fs / static_cast<double>(L);
    out.freqs_hz.resize(L);
    out.power_db.resize(L);
    const auto half = static_cast<std::int64_t>(L / 2);
    const auto n = static_cast<std::int64_t>(L);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t k = half - n + 1 + i;  // (-fs/2, fs/2]
        const auto bin = static_cast<std::size_t>((k % n + n) % n);
        out.freqs_hz[static_cast<std::size_t>(i)] = static_cast<double>(k) * out.resolution_hz;
        out.power_db[static_cast<std::size_t>(i)] = to_db(acc[bin] * scale);
    }
    return out;
}

std::vector<CombDetection> detect_harmonic_comb(const Psd& spectrum, const DisplayMode& mode,
                                                double capture_center_hz, std::span<const int> k_range,
                                                double min_prominence_db) {
    std::vector<CombDetection> out;
    if (spectrum.freqs_hz.empty()) return out;
    const double fp = pixel_rate(mode);
    const double fh = line_rate(mode);
    const auto& f = spectrum.freqs_hz;
    const double median_half = std::max(10.0 * fh, 8.0 * spectrum.resolution_hz);

    for (int k : k_range) {
        const double offset = k * fp - capture_center_hz;
        if (offset < f.front() || offset > f.back()) continue;

        auto [lo, hi] = bins_between(f, offset - 2.0 * fh, offset + 2.0 * fh);
        if (lo >= hi) {
            lo = nearest_bin(f, offset);
            hi = lo + 1;
        }
        std::size_t peak = lo;
        for (std::size_t i = lo; i < hi; ++i)
            if (spectrum.power_db[i] > spectrum.power_db[peak]) peak = i;

        const auto [mlo, mhi] = bins_between(f, offset - median_half, offset + median_half);
        const double floor_db = median_of({spectrum.power_db.begin() + static_cast<std::ptrdiff_t>(mlo),
                                           spectrum.power_db.begin() + static_cast<std::ptrdiff_t>(mhi)});
        const double prominence = spectrum.power_db[peak] - floor_db;
        if (prominence > min_prominence_db)
            out.push_back({k, capture_center_hz + f[peak], prominence});
    }
    return out;
}

RateEstimate estimate_frame_rate(const BasebandCapture& capture, double nominal_hz, double span_hz,
                                 int n_candidates) {
    return autocorrelation_search(capture, nominal_hz, span_hz, n_candidates, 2.0, "frame rate");
}

RateEstimate estimate_line_rate(const BasebandCapture& capture, const DisplayMode& mode, double span_hz,
                                int n_candidates) {
    mode.validate();
    // Lags at 1, 2, 4, ... lines plus one whole frame: the short lags keep
    // the search on the line comb, the long ones set the precision.
    std::vector<int> multiples;
    for (int m = 1; m < mode.total_height; m *= 2) multiples.push_back(m);
    multiples.push_back(mode.total_height);
    return autocorrelation_search(capture, line_rate(mode), span_hz, n_candidates, 2.0, "line rate", multiples);
}

std::vector<int> visible_harmonics(const SpectralSignature& sig, const CaptureMeta& meta) {
    std::vector<int> out;
    for (const auto& e : sig.entries) {
        const double offset = e.center_freq_hz - meta.center_freq_hz;
        if (std::abs(offset) + sig.line_rate_hz <= 0.4 * meta.sample_rate_hz) out.push_back(e.k);
    }
    return out;
}

double signature_match(const SpectralSignature& sig, const BasebandCapture& capture) {
    const auto& meta = capture.meta;
    const auto visible = visible_harmonics(sig, meta);
    if (visible.empty())
        throw NoVisibleHarmonics("no harmonic of " + sig.mode_name + " inside the capture passband");

    const double fh = sig.line_rate_hz;
    // Resolution of at most fh/8 so each band spans several bins.
    std::size_t seg = ceil_pow2(static_cast<std::size_t>(std::ceil(8.0 * meta.sample_rate_hz / fh)));
    seg = std::max<std::size_t>(8, std::min(seg, floor_pow2(capture.size())));
    if (capture.size() < seg) throw TooShort("capture too short for signature matching");
    const Psd spec = psd(capture, seg, 0.5);

    std::vector<double> predicted, measured;
    std::size_t band_bins = 0;
    for (int k : visible) {
        const auto& e = sig.entries[static_cast<std::size_t>(
            std::find_if(sig.entries.begin(), sig.entries.end(), [k](const auto& x) { return x.k == k; }) -
            sig.entries.begin())];
        const double offset = e.center_freq_hz - meta.center_freq_hz;
        const auto [lo, hi] = bins_between(spec.freqs_hz, offset - fh, offset + fh);
        double band = 0.0;
        for (std::size_t i = lo; i < hi; ++i) band += spec.linear(i);
        band_bins = hi - lo;
        predicted.push_back(e.predicted_rel_power);
        measured.push_back(band);
    }

    if (visible.size() == 1) {
        std::vector<double> lin(spec.power_db.size());
        for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = spec.linear(i);
        const double floor_band = median_of(std::move(lin)) * static_cast<double>(std::max<std::size_t>(band_bins, 1));
        const bool measured_present = measured[0] > 2.0 * floor_band;
        const bool predicted_present = predicted[0] > 0.0;
        return measured_present == predicted_present ? 1.0 : -1.0;
    }

    const double n = static_cast<double>(predicted.size());
    const double mp = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
    const double mm = std::accumulate(measured.begin(), measured.end(), 0.0) / n;
    double spm = 0.0, spp = 0.0, smm = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        spm += (predicted[i] - mp) * (measured[i] - mm);
        spp += (predicted[i] - mp) * (predicted[i] - mp);
        smm += (measured[i] - mm) * (measured[i] - mm);
    }
    if (spp <= 0.0 || smm <= 0.0) return 0.0;
    return std::clamp(spm / std::sqrt(spp * smm), -1.0, 1.0);
}

}  // namespace emleak

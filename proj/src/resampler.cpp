#include "emleak/resampler.hpp"

#include "emleak/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace emleak {

namespace {

// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

void normalize(double* h, int n) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += h[j];
    if (s != 0.0)
        for (int j = 0; j < n; ++j) h[j] /= s;
}

constexpr int kFinePhases = 1024;

}  // namespace

std::optional<Ratio> rational_approximation(double x, std::int64_t max_den, double rel_tol) {
    if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
    // Continued-fraction convergents.
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double v = x;
    for (int iter = 0; iter < 64; ++iter) {
        const double a_f = std::floor(v);
        if (a_f > 1e12) break;
        const auto a = static_cast<std::int64_t>(a_f);
        const std::int64_t p2 = a * p1 + p0;
        const std::int64_t q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) <= rel_tol * x)
            return Ratio{p1, q1};
        const double frac = v - a_f;
        if (frac <= 0.0) break;
        v = 1.0 / frac;
    }
    return std::nullopt;
}

Resampler::Resampler(double in_rate_hz, double out_rate_hz, int taps, double beta)
    : in_rate_(in_rate_hz), out_rate_(out_rate_hz), taps_(taps), beta_(beta) {
    if (!(in_rate_hz > 0.0) || !(out_rate_hz > 0.0))
        throw InvalidArgument("resampler rates must be positive");
    if (taps < 2 || taps % 2 != 0) throw InvalidArgument("resampler tap count must be even");

    const double r = out_rate_ / in_rate_;
    step_ = in_rate_ / out_rate_;
    cutoff_ = 0.5 * std::min(1.0, r);

    if (auto q = rational_approximation(r, kMaxDenominator)) {
        polyphase_ = true;
        ratio_ = *q;
        // Output m sits at input position m*den/num; its fractional part
        // takes `num` distinct values.
        const auto phases = static_cast<std::size_t>(ratio_.num);
        table_.assign(phases * static_cast<std::size_t>(taps_), 0.0);
        for (std::size_t ph = 0; ph < phases; ++ph) {
            const double frac = static_cast<double>(ph) / static_cast<double>(ratio_.num);
            double* h = &table_[ph * taps_];
            for (int j = 0; j < taps_; ++j) h[j] = kernel(frac + taps_ / 2 - 1 - j);
            normalize(h, taps_);
        }
    } else {
        fine_phases_ = kFinePhases;
        table_.assign(static_cast<std::size_t>(fine_phases_ + 1) * taps_, 0.0);
        for (int ph = 0; ph <= fine_phases_; ++ph) {
            const double frac = static_cast<double>(ph) / fine_phases_;
            double* h = &table_[static_cast<std::size_t>(ph) * taps_];
            for (int j = 0; j < taps_; ++j) h[j] = kernel(frac + taps_ / 2 - 1 - j);
        }
    }
}

double Resampler::kernel(double tau) const {
    const double half = taps_ / 2.0;
    if (std::abs(tau) >= half) return 0.0;
    const double x = 2.0 * cutoff_ * tau;
    const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double t = tau / half;
    const double window = bessel_i0(beta_ * std::sqrt(1.0 - t * t)) / bessel_i0(beta_);
    return 2.0 * cutoff_ * sinc * window;
}

void Resampler::taps_for(std::int64_t m, std::vector<double>& scratch, const double*& taps,
                         std::int64_t& first) const {
    const int half = taps_ / 2;
    if (polyphase_) {
        const std::int64_t pos_num = m * ratio_.den;  // position = pos_num / num
        const std::int64_t base = pos_num / ratio_.num;
        const std::int64_t ph = pos_num % ratio_.num;
        taps = &table_[static_cast<std::size_t>(ph) * taps_];
        first = base - half + 1;
        return;
    }
    const double pos = static_cast<double>(m) * step_;
    const double base_f = std::floor(pos);
    const double frac = pos - base_f;
    const double idx = frac * fine_phases_;
    const int i0 = std::min(static_cast<int>(idx), fine_phases_ - 1);
    const double w = idx - i0;
    const double* a = &table_[static_cast<std::size_t>(i0) * taps_];
    const double* b = a + taps_;
    for (int j = 0; j < taps_; ++j) scratch[j] = a[j] + w * (b[j] - a[j]);
    normalize(scratch.data(), taps_);
    taps = scratch.data();
    first = static_cast<std::int64_t>(base_f) - half + 1;
}

}  // namespace emleak

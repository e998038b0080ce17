#pragma once

#include "emleak/capture.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace emleak {

struct Ratio {
    std::int64_t num = 1;
    std::int64_t den = 1;
};

/// Best rational approximation p/q of `x` with q <= max_den, accepted only
/// when it reproduces x within `rel_tol`.
std::optional<Ratio> rational_approximation(double x, std::int64_t max_den,
                                            double rel_tol = 1e-12);

/// Kaiser-windowed sinc low-pass resampler with a fixed number of taps per
/// output sample. Cutoff sits at half the lower of the two rates.
///
/// When out/in is rational with denominator <= 10000 the taps are tabulated
/// per polyphase branch; otherwise a phase accumulator indexes a finely
/// tabulated kernel with linear interpolation between table entries.
class Resampler {
public:
    static constexpr int kDefaultTaps = 64;
    static constexpr double kDefaultBeta = 8.6;
    static constexpr std::int64_t kMaxDenominator = 10000;

    Resampler(double in_rate_hz, double out_rate_hz, int taps = kDefaultTaps,
              double beta = kDefaultBeta);

    bool polyphase() const { return polyphase_; }
    double step() const { return step_; }  // input samples per output sample
    int taps() const { return taps_; }

    /// Computes `n_out` outputs. `input(i)` must accept any integer index,
    /// including negative and past-the-end ones (the caller decides how the
    /// signal is extended).
    template <class Input>
    std::vector<Sample> run(Input&& input, std::int64_t n_out) const;

private:
    // Taps for fractional offset `frac` in [0,1): tap j weights input
    // floor(p) - half + 1 + j.
    void taps_for(std::int64_t m, std::vector<double>& scratch, const double*& taps,
                  std::int64_t& first) const;

    double kernel(double tau) const;

    double in_rate_;
    double out_rate_;
    int taps_;
    double beta_;
    double cutoff_;  // cycles per input sample
    double step_;
    bool polyphase_ = false;
    Ratio ratio_{};                 // out/in = num/den
    std::vector<double> table_;     // polyphase: num x taps; otherwise fine grid
    int fine_phases_ = 0;
};

template <class Input>
std::vector<Sample> Resampler::run(Input&& input, std::int64_t n_out) const {
    std::vector<Sample> out(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 0)));
    std::vector<double> scratch(static_cast<std::size_t>(taps_));
    for (std::int64_t m = 0; m < n_out; ++m) {
        const double* h = nullptr;
        std::int64_t first = 0;
        taps_for(m, scratch, h, first);
        double re = 0.0, im = 0.0;
        for (int j = 0; j < taps_; ++j) {
            const Sample x = input(first + j);
            re += h[j] * x.real();
            im += h[j] * x.imag();
        }
        out[static_cast<std::size_t>(m)] = {re, im};
    }
    return out;
}

}  // namespace emleak

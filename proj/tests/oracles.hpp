#pragma once

// Independent reference computations used only by tests. None of these call
// into the library's numeric paths.

#include "emleak/capture.hpp"
#include "emleak/frame_model.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;

// Direct DTFT in long double, no periodic reduction of the frequency.
inline cld dtft(const std::vector<double>& x, long double f, long double fp) {
    cld acc{0, 0};
    const long double tp = 1.0L / fp;
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (x[n] == 0.0) continue;
        const long double ph = -2.0L * std::numbers::pi_v<long double> * f * static_cast<long double>(n) * tp;
        acc += static_cast<long double>(x[n]) * cld(std::cos(ph), std::sin(ph));
    }
    return acc;
}

// X(f) = integral x(t) exp(-j 2 pi f t) dt for rectangular pulses of width
// duty*T_p centred on n*T_p, by composite 8-point Gauss-Legendre quadrature.
inline cld emission_spectrum_quadrature(const std::vector<double>& x, long double f, long double fp,
                                        long double duty) {
    static const long double node[8] = {-0.9602898564975362316835609L, -0.7966664774136267395915539L,
                                        -0.5255324099163289858177390L, -0.1834346424956498049394761L,
                                        0.1834346424956498049394761L,  0.5255324099163289858177390L,
                                        0.7966664774136267395915539L,  0.9602898564975362316835609L};
    static const long double weight[8] = {0.1012285362903762591525314L, 0.2223810344533744705443560L,
                                          0.3137066458778872873379622L, 0.3626837833783619829651504L,
                                          0.3626837833783619829651504L, 0.3137066458778872873379622L,
                                          0.2223810344533744705443560L, 0.1012285362903762591525314L};
    const long double tp = 1.0L / fp;
    const long double width = duty * tp;
    // Split each pulse so every piece spans at most a quarter cycle of f.
    const int pieces = 1 + static_cast<int>(std::ceil(4.0L * std::fabs(f) * width));
    const long double half = width / (2.0L * pieces);
    cld acc{0, 0};
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (x[n] == 0.0) continue;
        const long double start = static_cast<long double>(n) * tp - width / 2.0L;
        cld pulse{0, 0};
        for (int p = 0; p < pieces; ++p) {
            const long double mid = start + (2 * p + 1) * half;
            for (int i = 0; i < 8; ++i) {
                const long double t = mid + half * node[i];
                const long double ph = -2.0L * std::numbers::pi_v<long double> * f * t;
                pulse += weight[i] * cld(std::cos(ph), std::sin(ph));
            }
        }
        acc += static_cast<long double>(x[n]) * half * pulse;
    }
    return acc;
}

// Unnormalized DFT by definition.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cld acc{0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const long double ph = -2.0L * std::numbers::pi_v<long double> *
                                   static_cast<long double>((k * i) % n) / static_cast<long double>(n);
            acc += cld(x[i].real(), x[i].imag()) * cld(std::cos(ph), std::sin(ph));
        }
        out[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
    }
    return out;
}

inline double relative_error(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Scratch directory removed at scope exit.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("emleak_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace oracle

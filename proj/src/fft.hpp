#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace emleak::detail {

// FFTW's planner is not thread-safe; plan creation/destruction is serialized.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Forward complex DFT of a fixed size, unnormalized:
/// X[k] = sum_n x[n] exp(-j 2 pi k n / N).
class ForwardFft {
public:
    explicit ForwardFft(std::size_t n) : n_(n), buf_(n) {
        std::lock_guard lock(fftw_planner_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan_) throw std::runtime_error("fftw plan creation failed");
    }
    ~ForwardFft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    ForwardFft(const ForwardFft&) = delete;
    ForwardFft& operator=(const ForwardFft&) = delete;

    std::size_t size() const { return n_; }
    std::vector<std::complex<double>>& buffer() { return buf_; }

    void execute() {
        auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
        fftw_execute_dft(plan_, p, p);
    }

private:
    std::size_t n_;
    std::vector<std::complex<double>> buf_;
    fftw_plan plan_ = nullptr;
};

}  // namespace emleak::detail

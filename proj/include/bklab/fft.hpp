#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "error.hpp"

namespace bklab {

namespace detail {

struct FftPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Plans are created once per size under a lock and executed with the thread-safe new-array interface.
inline FftPlans plans_for(int n)
{
    static std::mutex mutex;
    static std::map<int, FftPlans> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    FftPlans p;
    p.forward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.forward || !p.backward)
        throw NumericalError("FFTW plan creation failed");
    cache.emplace(n, p);
    return p;
}

} // namespace detail

// In-place unnormalised 2D DFT of an n x n row-major array (sign -1 forward).
inline void fft2(std::span<std::complex<double>> data, int n)
{
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(detail::plans_for(n).forward, buf, buf);
}

// In-place inverse 2D DFT including the 1/n^2 factor.
inline void ifft2(std::span<std::complex<double>> data, int n)
{
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(detail::plans_for(n).backward, buf, buf);
    const double s = 1.0 / (static_cast<double>(n) * n);
    for (auto& v : data) v *= s;
}

// Angular frequency of DFT bin k on an n-point axis with spacing h.
inline double frequency(int k, int n, double h)
{
    const int kk = k < n / 2 ? k : k - n;
    return 2.0 * std::numbers::pi * kk / (n * h);
}

} // namespace bklab

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fft.hpp"
#include "field.hpp"
#include "lorentz.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "sweep.hpp"

namespace bklab {

// Fourier transform convention: F f(xi) = (1/2pi) int f(x) e^{-i x.xi} dm(x), so F(f * g) = 2pi Ff Fg.
// With it, the kernel kappa_tau(z) = (2 tau/pi) e^{i tau (z^2 + conj z^2)} has transform
// (1/2pi) e^{-i(xi^2 + conj xi^2)/(16 tau)} and convolution with kappa_tau is the unimodular multiplier below.
inline cplx gaussian_multiplier(double xi1, double xi2, double tau)
{
    return std::polar(1.0, -(xi1 * xi1 - xi2 * xi2) / (8.0 * tau));
}

inline cplx gaussian_kernel(cplx z, double tau)
{
    return (2.0 * tau / std::numbers::pi) * std::polar(1.0, tau * phase_R(z, 0.0));
}

// Multiplier on an n-point DFT frequency lattice with spacing h, in FFT storage order.
inline std::vector<cplx> kernel_multiplier(int n, double h, double tau)
{
    if (!(tau > 0.0))
        throw ConfigError("tau must be positive");
    std::vector<cplx> m(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(k) * n + j] = gaussian_multiplier(frequency(j, n, h), frequency(k, n, h), tau);
    return m;
}

inline std::vector<cplx> kernel_multiplier(const Grid& g, double tau) { return kernel_multiplier(g.size(), g.spacing(), tau); }

namespace detail {

inline std::vector<cplx> zero_pad(const Field& f, int m)
{
    const int n = f.grid().size();
    std::vector<cplx> buf(static_cast<std::size_t>(m) * m, 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            buf[static_cast<std::size_t>(k) * m + j] = f(j, k);
    return buf;
}

inline Field crop(const std::vector<cplx>& buf, const Grid& g, int m)
{
    Field out(g);
    for (int k = 0; k < g.size(); ++k)
        for (int j = 0; j < g.size(); ++j)
            out(j, k) = buf[static_cast<std::size_t>(k) * m + j];
    return out;
}

} // namespace detail

// kappa_tau * Q via the exact multiplier applied to the transform of the zero extension (2N padding).
inline Field smooth(const Field& q, double tau)
{
    const Grid& g = q.grid();
    const int m = 2 * g.size();
    auto buf = detail::zero_pad(q, m);
    fft2(buf, m);
    const auto mult = kernel_multiplier(m, g.spacing(), tau);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= mult[i];
    ifft2(buf, m);
    return detail::crop(buf, g, m);
}

// Cross-check path: linear convolution with the sampled kernel. Displacements reach 2L per axis, so the
// kernel is resolved only for tau <= pi N/(16 L^2), half the usual guard.
inline Field smooth_direct(const Field& q, double tau)
{
    const Grid& g = q.grid();
    if (tau > 0.5 * tau_guard(g) * (1.0 + 1e-12))
        throw GuardViolation("direct smoothing needs tau <= pi N/(16 L^2)");
    const int n = g.size(), m = 2 * n;
    const double h = g.spacing();
    std::vector<cplx> kern(static_cast<std::size_t>(m) * m, 0.0);
    for (int b = 0; b < m; ++b) {
        const int dy = b < n ? b : b - m;
        for (int a = 0; a < m; ++a) {
            const int dx = a < n ? a : a - m;
            if (a == n || b == n)
                continue;
            kern[static_cast<std::size_t>(b) * m + a] = gaussian_kernel(cplx(dx * h, dy * h), tau) * g.cell_area();
        }
    }
    fft2(kern, m);
    auto buf = detail::zero_pad(q, m);
    fft2(buf, m);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= kern[i];
    ifft2(buf, m);
    return detail::crop(buf, g, m);
}

// max over samples of |1 - e^{-i(xi^2 + conj xi^2)}| / |xi|^s, with ratio 0 at xi = 0.
inline double phase_holder_check(double s, const std::vector<cplx>& xis)
{
    if (s < 0.0 || s > 2.0)
        throw ConfigError("Holder exponent must lie in [0, 2]");
    double best = 0.0;
    for (cplx xi : xis) {
        const double r = std::abs(xi);
        if (r == 0.0)
            continue;
        const double num = std::abs(1.0 - std::polar(1.0, -2.0 * (xi * xi).real()));
        best = std::max(best, num / std::pow(r, s));
    }
    return best;
}

// Compact smooth window: 1 on |x| <= a, 0 on |x| >= b, C-infinity in between.
inline double flat_top_window(double x, double a, double b)
{
    const double t = (std::abs(x) - a) / (b - a);
    if (t <= 0.0)
        return 1.0;
    if (t >= 1.0)
        return 0.0;
    auto psi = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    return psi(1.0 - t) / (psi(1.0 - t) + psi(t));
}

// Halton points (bases 2, 3) mapped to the disk B(0, radius) by the area-preserving polar map.
inline std::vector<cplx> halton_disk(std::size_t count, double radius)
{
    auto radical = [](std::size_t i, unsigned base) {
        double f = 1.0, r = 0.0;
        for (; i > 0; i /= base) {
            f /= base;
            r += f * static_cast<double>(i % base);
        }
        return r;
    };
    std::vector<cplx> pts(count);
    for (std::size_t i = 0; i < count; ++i)
        pts[i] = std::polar(radius * std::sqrt(radical(i + 1, 2)), 2.0 * std::numbers::pi * radical(i + 1, 3));
    return pts;
}

struct KernelSpectrumCheck {
    double max_relative_error = 0.0;
    double half_width = 0.0;
};

// DFT of the sampled kernel, windowed, against the closed-form transform over the central half of the
// frequency lattice. With L^2 = pi N/(8 tau) the stationary points xi/(4 tau) of the compared frequencies
// reach L/2; the window is flat out to 3L/4 so the taper sits away from them.
inline KernelSpectrumCheck kernel_spectrum_check(int n, double tau)
{
    const double L = std::sqrt(std::numbers::pi * n / (8.0 * tau));
    const Grid g(L, n);
    const double h = g.spacing();
    std::vector<cplx> buf(g.cells());
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            const double w = flat_top_window(g.x(j), 0.75 * L, L) * flat_top_window(g.y(k), 0.75 * L, L);
            buf[g.index(j, k)] = gaussian_kernel(g.center(j, k), tau) * w;
        }
    fft2(buf, n);
    KernelSpectrumCheck out{0.0, L};
    for (int k = 0; k < n; ++k) {
        const int kk = k < n / 2 ? k : k - n;
        if (std::abs(kk) > n / 4)
            continue;
        for (int j = 0; j < n; ++j) {
            const int jj = j < n / 2 ? j : j - n;
            if (std::abs(jj) > n / 4)
                continue;
            const double xi1 = frequency(j, n, h), xi2 = frequency(k, n, h);
            // sample z_jk = x_0 + j h: shift the DFT to the continuous-transform origin
            const cplx shift = std::polar(1.0, -(g.x(0) * xi1 + g.y(0) * xi2));
            const cplx approx = buf[g.index(j, k)] * shift * g.cell_area() / (2.0 * std::numbers::pi);
            const cplx exact = gaussian_multiplier(xi1, xi2, tau) / (2.0 * std::numbers::pi);
            out.max_relative_error = std::max(out.max_relative_error, std::abs(approx - exact) / std::abs(exact));
        }
    }
    return out;
}

inline double l2_norm(const Field& f)
{
    double s = 0.0;
    for (cplx v : f.values()) s += std::norm(v);
    return std::sqrt(s * f.grid().cell_area());
}

struct SmoothingRow {
    double tau;
    double error; // ||Q - smooth(Q, tau)||_2
    double bound; // 2 tau^{-s/2} ||Q||_{H^{s,2}}
};

inline std::vector<SmoothingRow> smoothing_sweep(const Field& q, double s, const std::vector<double>& taus)
{
    const double hs = bessel_norm(q, s, LorentzIndex{2.0, 2.0, false});
    std::vector<SmoothingRow> rows(taus.size());
    parallel_for(taus.size(), [&](std::size_t i) {
        Field d = q;
        d -= smooth(q, taus[i]);
        rows[i] = {taus[i], l2_norm(d), 2.0 * std::pow(taus[i], -0.5 * s) * hs};
    });
    return rows;
}

} // namespace bklab

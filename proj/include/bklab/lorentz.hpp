#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "domain.hpp"
#include "difference.hpp"
#include "fft.hpp"

namespace bklab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Lorentz exponents. normed selects the f**-based norm (p,q); otherwise the f*-based quasinorm p,q.
struct LorentzIndex {
    double p = 2.0;
    double q = 2.0;
    bool normed = true;

    void validate() const
    {
        if (!(p > 1.0) || !std::isfinite(p))
            throw ConfigError("Lorentz exponent p must lie in (1, inf)");
        if (!(q >= 1.0))
            throw ConfigError("Lorentz exponent q must lie in [1, inf]");
    }
};

// Non-increasing rearrangement of |f| as a step function: f* = values[i] on [t_{i-1}, t_i), t_0 = 0.
// Equal magnitudes are merged into one step, so values are strictly decreasing.
class StepRearrangement {
public:
    StepRearrangement() = default;

    StepRearrangement(std::vector<double> magnitudes, double cell_measure)
    {
        for (double v : magnitudes)
            if (std::isnan(v))
                throw ConfigError("rearrangement of a field with NaN samples");
        std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
        std::size_t i = 0;
        while (i < magnitudes.size()) {
            std::size_t j = i;
            while (j < magnitudes.size() && magnitudes[j] == magnitudes[i])
                ++j;
            values_.push_back(magnitudes[i]);
            breaks_.push_back(static_cast<double>(j) * cell_measure);
            i = j;
        }
    }

    std::span<const double> breakpoints() const { return breaks_; }
    std::span<const double> values() const { return values_; }
    std::size_t steps() const { return values_.size(); }
    double total_measure() const { return breaks_.empty() ? 0.0 : breaks_.back(); }

    // f*(s); zero beyond the support.
    double at(double s) const
    {
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
        return it == breaks_.end() ? 0.0 : values_[static_cast<std::size_t>(it - breaks_.begin())];
    }

    // m(f, lambda) = measure of {|f| > lambda}.
    double distribution(double lambda) const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size() && values_[i] > lambda; ++i)
            m = breaks_[i];
        return m;
    }

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

inline StepRearrangement rearrange(const Field& f, const Domain* mask = nullptr)
{
    if (mask)
        require_same_grid(f.grid(), mask->grid(), "rearrange");
    std::vector<double> mags;
    mags.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!mask || mask->in_mask(i))
            mags.push_back(std::abs(f[i]));
    if (mags.empty())
        throw ConfigError("rearrangement over an empty mask");
    return StepRearrangement(std::move(mags), f.grid().cell_area());
}

namespace detail {

// Integral over [a, b] of (t^{1/p} (c + D/t))^q dt/t with 0 < a < b.
inline double lorentz_piece(double a, double b, double c, double D, double p, double q)
{
    const double ip = 1.0 / p;
    if (D == 0.0 || c == 0.0) {
        // single power c^q t^{q/p - 1} or D^q t^{q/p - q - 1}
        const double coef = D == 0.0 ? std::pow(c, q) : std::pow(D, q);
        const double e = D == 0.0 ? q * ip : q * ip - q;
        return coef * (std::pow(b, e) - std::pow(a, e)) / e;
    }
    if (q == 1.0)
        return c * p * (std::pow(b, ip) - std::pow(a, ip)) + D * (std::pow(b, ip - 1.0) - std::pow(a, ip - 1.0)) / (ip - 1.0);
    // Smooth in u = ln t; Gauss-Legendre on pieces of log-length at most 2.
    const double la = std::log(a), lb = std::log(b);
    const int pieces = std::max(1, static_cast<int>(std::ceil((lb - la) / 2.0)));
    const double w = (lb - la) / pieces;
    auto g = [&](double u) { return std::pow(std::exp(u * ip) * c + D * std::exp(u * (ip - 1.0)), q); };
    double sum = 0.0;
    for (int k = 0; k < pieces; ++k)
        sum += boost::math::quadrature::gauss<double, 32>::integrate(g, la + k * w, la + (k + 1) * w);
    return sum;
}

} // namespace detail

inline double lorentz_norm(const StepRearrangement& r, const LorentzIndex& idx)
{
    idx.validate();
    const double p = idx.p, q = idx.q;
    const auto t = r.breakpoints();
    const auto v = r.values();
    const std::size_t m = r.steps();
    if (m == 0)
        return 0.0;

    if (!idx.normed) {
        if (std::isinf(q)) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s = std::max(s, v[i] * std::pow(t[i], 1.0 / p));
            return s;
        }
        double s = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double cur = std::pow(t[i], q / p);
            s += std::pow(v[i], q) * (cur - prev);
            prev = cur;
        }
        return std::pow(s * p / q, 1.0 / q);
    }

    // f** = c + D/t on [t_{i-1}, t_i] with c = v_i, D = S_{i-1} - v_i t_{i-1}; f** = S/t after t_M.
    if (std::isinf(q)) {
        double best = 0.0, S = 0.0, tprev = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = v[i], D = S - c * tprev;
            S += c * (t[i] - tprev);
            best = std::max(best, std::pow(t[i], 1.0 / p) * (S / t[i]));
            if (c > 0.0 && D > 0.0) {
                const double ts = D * (p - 1.0) / c;
                if (ts > tprev && ts < t[i])
                    best = std::max(best, std::pow(ts, 1.0 / p) * (c + D / ts));
            }
            tprev = t[i];
        }
        return best;
    }

    double sum = std::pow(v[0], q) * std::pow(t[0], q / p) * p / q;
    double S = v[0] * t[0];
    for (std::size_t i = 1; i < m; ++i) {
        const double c = v[i], D = S - c * t[i - 1];
        sum += detail::lorentz_piece(t[i - 1], t[i], c, D, p, q);
        S += c * (t[i] - t[i - 1]);
    }
    if (S > 0.0)
        sum += std::pow(S, q) * std::pow(t[m - 1], q / p - q) / (q - q / p);
    return std::pow(sum, 1.0 / q);
}

inline double lorentz_norm(const Field& f, const LorentzIndex& idx, const Domain* mask = nullptr)
{
    idx.validate();
    return lorentz_norm(rearrange(f, mask), idx);
}

// ||f|| + sum over first-order partials of ||D f|| when order == 1.
inline double sobolev_lorentz_norm(const Field& f, const LorentzIndex& idx, int order, const Domain* mask = nullptr)
{
    if (order < 0 || order > 1)
        throw ConfigError("Sobolev-Lorentz order must be 0 or 1");
    double s = lorentz_norm(f, idx, mask);
    if (order == 1) {
        auto [dx, dy] = gradient(f, mask);
        s += lorentz_norm(dx, idx, mask) + lorentz_norm(dy, idx, mask);
    }
    return s;
}

// Lorentz norm of F^{-1}((1 + |xi|^2)^{s/2} F f) for the zero extension of f (masked if a domain is given),
// evaluated on the 2N x 2N zero-padded grid.
inline double bessel_norm(const Field& f, double s, const LorentzIndex& idx, const Domain* mask = nullptr)
{
    if (!std::isfinite(s))
        throw ConfigError("Bessel smoothness must be finite");
    idx.validate();
    const Field fz = mask ? mask->restrict(f) : f;
    if (s == 0.0)
        return lorentz_norm(fz, idx);
    const Grid& g = f.grid();
    const int n = g.size(), m = 2 * n;
    std::vector<cplx> buf(static_cast<std::size_t>(m) * m);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            buf[static_cast<std::size_t>(k) * m + j] = fz(j, k);
    fft2(buf, m);
    for (int k = 0; k < m; ++k) {
        const double ky = frequency(k, m, g.spacing());
        for (int j = 0; j < m; ++j) {
            const double kx = frequency(j, m, g.spacing());
            buf[static_cast<std::size_t>(k) * m + j] *= std::pow(1.0 + kx * kx + ky * ky, 0.5 * s);
        }
    }
    ifft2(buf, m);
    std::vector<double> mags(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
        mags[i] = std::abs(buf[i]);
    return lorentz_norm(StepRearrangement(std::move(mags), g.cell_area()), idx);
}

} // namespace bklab

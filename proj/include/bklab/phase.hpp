#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "field.hpp"

namespace bklab {

// Largest tau whose phase e^{i tau R} is resolved on the grid: local frequency 4 tau L below pi/h.
inline double tau_guard(const Grid& g)
{
    return std::numbers::pi * g.size() / (8.0 * g.half_width() * g.half_width());
}

struct PhaseParams {
    double tau = 1.0;
    cplx z0{0.0, 0.0};
};

inline void check_guard(const Grid& g, double tau)
{
    if (!(tau > 0.0))
        throw ConfigError("tau must be positive");
    if (tau > tau_guard(g) * (1.0 + 1e-12))
        throw GuardViolation("tau = " + std::to_string(tau) + " exceeds the aliasing guard " +
                             std::to_string(tau_guard(g)) + " of the grid");
}

// R(z; z0) = (z - z0)^2 + conj(z - z0)^2 = 2((x - x0)^2 - (y - y0)^2), real by construction.
inline double phase_R(cplx z, cplx z0)
{
    const double dx = z.real() - z0.real();
    const double dy = z.imag() - z0.imag();
    return 2.0 * (dx * dx - dy * dy);
}

// e^{sign * i tau R} sampled on the grid.
inline Field phase_field(const Grid& g, const PhaseParams& pp, double sign = 1.0)
{
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::polar(1.0, sign * pp.tau * phase_R(g.center(i), pp.z0));
    return f;
}

} // namespace bklab

#pragma once

#include <cmath>
#include <utility>

#include "domain.hpp"

namespace bklab {

namespace detail {

// One-sided second-order difference along an axis, falling back to first order or zero near mask edges.
inline cplx axis_derivative(const Field& f, const Domain* mask, int j, int k, int dj, int dk)
{
    const Grid& g = f.grid();
    const int n = g.size();
    auto ok = [&](int a, int b) { return a >= 0 && b >= 0 && a < n && b < n && (!mask || mask->in_mask(a, b)); };
    const double h = g.spacing();
    const bool fwd = ok(j + dj, k + dk), bwd = ok(j - dj, k - dk);
    if (fwd && bwd)
        return (f(j + dj, k + dk) - f(j - dj, k - dk)) / (2.0 * h);
    if (fwd && ok(j + 2 * dj, k + 2 * dk))
        return (-3.0 * f(j, k) + 4.0 * f(j + dj, k + dk) - f(j + 2 * dj, k + 2 * dk)) / (2.0 * h);
    if (bwd && ok(j - 2 * dj, k - 2 * dk))
        return (3.0 * f(j, k) - 4.0 * f(j - dj, k - dk) + f(j - 2 * dj, k - 2 * dk)) / (2.0 * h);
    if (fwd)
        return (f(j + dj, k + dk) - f(j, k)) / h;
    if (bwd)
        return (f(j, k) - f(j - dj, k - dk)) / h;
    return 0.0;
}

} // namespace detail

// Centered-difference partial derivatives over the mask (or the whole grid).
inline std::pair<Field, Field> gradient(const Field& f, const Domain* mask = nullptr)
{
    const Grid& g = f.grid();
    Field dx(g), dy(g);
    for (int k = 0; k < g.size(); ++k)
        for (int j = 0; j < g.size(); ++j) {
            if (mask && !mask->in_mask(j, k))
                continue;
            dx(j, k) = detail::axis_derivative(f, mask, j, k, 1, 0);
            dy(j, k) = detail::axis_derivative(f, mask, j, k, 0, 1);
        }
    return {std::move(dx), std::move(dy)};
}

// (||f||_2^2 + ||d_x f||_2^2 + ||d_y f||_2^2)^{1/2} over the mask, gradients as above.
inline double w12_norm(const Field& f, const Domain& dom)
{
    require_same_grid(f.grid(), dom.grid(), "w12_norm");
    const auto [dx, dy] = gradient(f, &dom);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (dom.in_mask(i))
            s += std::norm(f[i]) + std::norm(dx[i]) + std::norm(dy[i]);
    return std::sqrt(s * f.grid().cell_area());
}

} // namespace bklab

#pragma once

#include <cmath>

#include "field.hpp"

namespace bklab {

// amplitude * exp(1 - 1/(1 - r^2)), r = |z - c|/radius: peak value amplitude at c, zero for r >= 1.
inline Field bump_field(const Grid& g, cplx amplitude, cplx c, double radius)
{
    if (!(radius > 0.0))
        throw ConfigError("bump radius must be positive");
    return Field::from_function(g, [=](cplx z) {
        const double r2 = std::norm((z - c) / radius);
        return r2 < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - r2)) : cplx(0.0);
    });
}

// amplitude * exp(-|z - c|^2 / width^2).
inline Field gaussian_field(const Grid& g, cplx amplitude, cplx c, double width)
{
    if (!(width > 0.0))
        throw ConfigError("gaussian width must be positive");
    return Field::from_function(g, [=](cplx z) { return amplitude * std::exp(-std::norm(z - c) / (width * width)); });
}

} // namespace bklab

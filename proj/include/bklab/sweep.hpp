#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"

namespace bklab {

struct SlopeFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN(); // rms of log-residuals
    bool sufficient = false;
};

// Least squares on (ln x, ln y). For tau sweeps (ascending x) the first point is dropped when there are three
// or more; resolution sweeps pass drop_first = false. Lists that are too short or contain a vanishing ordinate
// give an insufficient fit.
inline SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, bool drop_first = true)
{
    if (x.size() != y.size())
        throw ConfigError("slope fit needs equally many abscissae and ordinates");
    const std::size_t first = drop_first && x.size() >= 3 ? 1 : 0;
    const std::size_t n = x.size() - first;
    SlopeFit out;
    if (n < 2)
        return out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i < x.size(); ++i) {
        if (!(x[i] > 0.0))
            throw ConfigError("slope fit needs positive abscissae");
        if (!(y[i] > 0.0))
            return out;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0.0)
        return out;
    out.slope = (n * sxy - sx * sy) / den;
    out.intercept = (sy - out.slope * sx) / n;
    double r2 = 0.0;
    for (std::size_t i = first; i < x.size(); ++i) {
        const double e = std::log(y[i]) - out.intercept - out.slope * std::log(x[i]);
        r2 += e * e;
    }
    out.residual = std::sqrt(r2 / n);
    out.sufficient = true;
    return out;
}

// Geometric tau list lo, 2 lo, ... up to hi.
inline std::vector<double> geometric_taus(double lo, double hi, double ratio = 2.0)
{
    if (!(lo > 0.0) || !(hi >= lo) || !(ratio > 1.0))
        throw ConfigError("tau range must satisfy 0 < lo <= hi and ratio > 1");
    std::vector<double> t;
    for (double v = lo; v <= hi * (1.0 + 1e-12); v *= ratio)
        t.push_back(v);
    return t;
}

struct SweepSeries {
    std::string name;
    std::vector<double> values;
    SlopeFit fit;
};

struct SweepRecord {
    std::vector<double> taus;
    std::vector<SweepSeries> series;
    std::vector<double> skipped; // tau values rejected by the aliasing guard
    std::string domain;
    std::string operand;
    double z0_re = 0.0, z0_im = 0.0;

    bool insufficient() const { return taus.size() < 2; }
};

} // namespace bklab

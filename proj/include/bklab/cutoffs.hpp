#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "domain.hpp"
#include "fft.hpp"
#include "lorentz.hpp"

namespace bklab {

enum class CutoffKind { h1, h2 };

struct CutoffBundle {
    Field h;
    Field dbar_h;
    std::optional<Field> del_h; // h1 only
    Field defect;               // 1 - conj(z - z0) h
    double eps = 0.0;
    double delta = 0.0;
    cplx z0;
    CutoffKind kind = CutoffKind::h1;
};

// Cell average of 1/|z| over a centred square of side h, times h: 4 ln(1 + sqrt 2).
inline constexpr double kCellInverseRadius = 3.5254943480781717;

// H(z - z0) with H = 1/conj z outside B(0, eps) and |z|/(eps conj z) inside, eps = tau^{-1/2}.
// A cell centred exactly on z0 gets h = 0 and the cell averages of |dH|, |dbar H| (the pointwise values
// have no limit there).
inline CutoffBundle build_h1(const Grid& g, cplx z0, double tau)
{
    if (!(tau >= 1.0))
        throw ConfigError("build_h1 needs tau >= 1");
    const double eps = 1.0 / std::sqrt(tau);
    CutoffBundle b{Field(g), Field(g), Field(g), Field(g), eps, 0.0, z0, CutoffKind::h1};
    Field& del = *b.del_h;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const cplx w = g.center(i) - z0;
        const double r = std::abs(w);
        const cplx wb = std::conj(w);
        if (r > eps) {
            b.h[i] = 1.0 / wb;
            b.dbar_h[i] = -1.0 / (wb * wb);
        } else if (r > 1e-12 * g.spacing()) {
            b.h[i] = r / (eps * wb);
            b.dbar_h[i] = -r / (2.0 * eps * wb * wb);
            del[i] = 1.0 / (2.0 * eps * r);
            b.defect[i] = 1.0 - r / eps;
        } else {
            const double avg = kCellInverseRadius / (2.0 * eps * g.spacing());
            b.dbar_h[i] = avg;
            del[i] = avg;
            b.defect[i] = 1.0;
        }
    }
    return b;
}

namespace detail {

inline double bump_profile(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// Integral of the unnormalised bump exp(-1/(1-|z|^2)) over the unit disk.
inline double bump_mass()
{
    static const double m = [] {
        boost::math::quadrature::tanh_sinh<double> ts;
        return 2.0 * std::numbers::pi * ts.integrate([](double r) { return r * bump_profile(r * r); }, 0.0, 1.0);
    }();
    return m;
}

// Convolution of an indicator with a kernel, both given as functions of position, on the grid extended to
// twice its width (so the indicator may reach past the grid edge without wrapping back); includes h^2.
template <class Ind, class K>
Field extended_convolve(const Grid& g, Ind&& indicator, K&& kernel)
{
    const int n = g.size(), m = 2 * n;
    const double h = g.spacing();
    std::vector<cplx> kf(static_cast<std::size_t>(m) * m), ff(kf.size());
    for (int b = 0; b < m; ++b) {
        const int dy = b <= n ? b : b - m;
        for (int a = 0; a < m; ++a) {
            const int dx = a <= n ? a : a - m;
            const std::size_t i = static_cast<std::size_t>(b) * m + a;
            kf[i] = kernel(cplx(dx * h, dy * h)) * g.cell_area();
            ff[i] = indicator(cplx(g.x(a - n / 2), g.y(b - n / 2))) ? 1.0 : 0.0;
        }
    }
    fft2(kf, m);
    fft2(ff, m);
    for (std::size_t i = 0; i < ff.size(); ++i) ff[i] *= kf[i];
    ifft2(ff, m);
    Field out(g);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            out(j, k) = ff[static_cast<std::size_t>(k + n / 2) * m + (j + n / 2)];
    return out;
}

} // namespace detail

// ||dbar phi||_1 for the normalised bump phi.
inline double mollifier_dbar_l1()
{
    static const double v = [] {
        boost::math::quadrature::tanh_sinh<double> ts;
        const double num = ts.integrate(
            [](double r) {
                const double s = 1.0 - r * r;
                return s > 0.0 ? r * r * detail::bump_profile(r * r) / (s * s) : 0.0;
            },
            0.0, 1.0);
        return 2.0 * std::numbers::pi * num / detail::bump_mass();
    }();
    return v;
}

struct MollifiedCutoff {
    Field chi;
    Field dbar_chi;
};

// indicator * phi_a and indicator * dbar phi_a with phi_a(z) = a^{-2} phi(z/a), normalised so the
// discrete kernel sums to one.
inline MollifiedCutoff mollify(const Grid& g, const std::function<bool(cplx)>& indicator, double a)
{
    double mass = 0.0;
    const int reach = static_cast<int>(std::ceil(a / g.spacing()));
    for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx)
            mass += detail::bump_profile(std::norm(cplx(dx, dy) * g.spacing() / a)) * g.cell_area();
    auto phi = [&](cplx w) { return cplx(detail::bump_profile(std::norm(w / a)) / mass); };
    auto dphi = [&](cplx w) {
        const cplx u = w / a;
        const double s = 1.0 - std::norm(u);
        return s > 0.0 ? -u * detail::bump_profile(std::norm(u)) / (s * s) / (a * mass) : cplx(0.0);
    };
    return {detail::extended_convolve(g, indicator, phi), detail::extended_convolve(g, indicator, dphi)};
}

// h = chi_eps chi^delta / conj(z - z0): chi_eps mollifies {d(z, boundary) > 2 eps} at scale eps, chi^delta
// mollifies the complement of B(z0, 2 delta) at scale delta. The zero sets {d < eps} and B(z0, delta) are
// enforced exactly.
inline CutoffBundle build_h2(const Domain& dom, cplx z0, double eps, double delta)
{
    const Grid& g = dom.grid();
    if (!(eps > 0.0) || !(delta > 0.0))
        throw ConfigError("build_h2 needs positive eps and delta");
    if (eps < 4.0 * g.spacing() || delta < 4.0 * g.spacing())
        throw ConfigError("cut-off scale below 4h cannot be resolved by the mollifier");
    auto inner = [&](cplx z) { return dom.contains(z) && dom.distance_to_boundary(z) > 2.0 * eps; };
    auto ball = [&](cplx z) { return std::abs(z - z0) < 2.0 * delta; };
    const MollifiedCutoff ce = mollify(g, inner, eps);
    const MollifiedCutoff cb = mollify(g, ball, delta);
    CutoffBundle b{Field(g), Field(g), std::nullopt, Field(g), eps, delta, z0, CutoffKind::h2};
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const cplx w = g.center(i) - z0;
        const bool zero = !dom.in_mask(i) || dom.signed_distance(i) < eps || std::abs(w) < delta;
        if (zero) {
            b.defect[i] = dom.in_mask(i) ? 1.0 : 0.0;
            continue;
        }
        const double xe = std::clamp(ce.chi[i].real(), 0.0, 1.0);
        const double xd = std::clamp(1.0 - cb.chi[i].real(), 0.0, 1.0);
        const cplx dxe = ce.dbar_chi[i];
        const cplx dxd = -cb.dbar_chi[i];
        const cplx wb = std::conj(w);
        b.h[i] = xe * xd / wb;
        b.dbar_h[i] = (dxe * xd + xe * dxd) / wb - xe * xd / (wb * wb);
        b.defect[i] = 1.0 - xe * xd;
    }
    return b;
}

// eps = delta^2 = tau^{-2/3}.
inline CutoffBundle tune_h2(const Domain& dom, cplx z0, double tau)
{
    if (!(tau >= 1.0))
        throw ConfigError("tune_h2 needs tau >= 1");
    const double eps = std::pow(tau, -2.0 / 3.0);
    if (eps < 4.0 * dom.grid().spacing())
        throw ConfigError("tau^{-2/3} is below 4h; refine the grid");
    return build_h2(dom, z0, eps, std::sqrt(eps));
}

// tau ||1 - conj(z - z0) h||_(2,1) + ||h||_inf + ||dbar h||_(2,1), all over the domain.
inline double cutoff_composite(const CutoffBundle& b, const Domain& dom, double tau)
{
    const LorentzIndex l21{2.0, 1.0, true};
    double hsup = 0.0;
    for (std::size_t i = 0; i < b.h.size(); ++i)
        if (dom.in_mask(i))
            hsup = std::max(hsup, std::abs(b.h[i]));
    return tau * lorentz_norm(b.defect, l21, &dom) + hsup + lorentz_norm(b.dbar_h, l21, &dom);
}

inline double l1_over(const Field& f, const Domain& dom)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (dom.in_mask(i))
            s += std::abs(f[i]);
    return s * f.grid().cell_area();
}

// ||h||_1 + ||dh||_1 + ||dbar h||_1 over the domain (h1 bundles).
inline double w11_norm(const CutoffBundle& b, const Domain& dom)
{
    if (!b.del_h)
        throw ConfigError("W^{1,1} norm needs the d-derivative of the cut-off");
    return l1_over(b.h, dom) + l1_over(*b.del_h, dom) + l1_over(b.dbar_h, dom);
}

// L1 norm over the domain of the h1 defect (1 - |z - z0|/eps)_+, integrated in polar coordinates about z0
// against the exact polyline rather than the cell mask.
inline double h1_defect_l1_exact(const Domain& dom, cplx z0, double tau)
{
    const double eps = 1.0 / std::sqrt(tau);
    // radial antiderivative of (1 - r/eps) r
    auto F = [eps](double r) { return r * r / 2.0 - r * r * r / (3.0 * eps); };
    if (dom.contains(z0) && dom.distance_to_boundary(z0) >= eps)
        return 2.0 * std::numbers::pi * F(eps);
    const int panels = 256;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = 2.0 * std::numbers::pi * p / panels, b = 2.0 * std::numbers::pi * (p + 1) / panels;
        total += boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double th) {
                const cplx end = z0 + std::polar(eps, th);
                bool inside = dom.contains(z0);
                double r0 = 0.0, s = 0.0;
                for (double t : dom.all_hits(z0, end)) {
                    if (inside)
                        s += F(t * eps) - F(r0);
                    inside = !inside;
                    r0 = t * eps;
                }
                if (inside)
                    s += F(eps) - F(r0);
                return s;
            },
            a, b);
    }
    return total;
}

struct AnnulusNorms {
    double inverse = 0.0;        // || conj(z - z0)^{-1} ||_(2,1)
    double inverse_square = 0.0; // || conj(z - z0)^{-2} ||_(2,1)
};

// Norms over the domain minus B(z0, rho); zero when the ball swallows every masked cell.
inline AnnulusNorms annulus_kernel_norms(const Domain& dom, cplx z0, double rho)
{
    if (!(rho > 0.0))
        throw ConfigError("annulus radius must be positive");
    const Grid& g = dom.grid();
    std::vector<double> a1, a2;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const double r = std::abs(g.center(i) - z0);
        if (dom.in_mask(i) && r >= rho) {
            a1.push_back(1.0 / r);
            a2.push_back(1.0 / (r * r));
        }
    }
    if (a1.empty())
        return {};
    const LorentzIndex l21{2.0, 1.0, true};
    return {lorentz_norm(StepRearrangement(std::move(a1), g.cell_area()), l21),
            lorentz_norm(StepRearrangement(std::move(a2), g.cell_area()), l21)};
}

} // namespace bklab

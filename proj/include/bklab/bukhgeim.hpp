#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cauchy.hpp"
#include "lorentz.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "sweep.hpp"

namespace bklab {

// holomorphic: u = e^{i tau (z - z0)^2} f; antiholomorphic: u = e^{i tau conj(z - z0)^2} f, for which the
// roles of C and C-bar in S are exchanged.
enum class PhaseType { holomorphic, antiholomorphic };

struct BukhgeimOptions {
    PhaseType type = PhaseType::holomorphic;
    bool conjugate_phase = false; // run with e^{-i tau R} in place of e^{i tau R}
    double tol = 1e-10;
    int max_iter = 200;
};

struct BukhgeimSolution {
    Field f;
    PhaseParams params;
    BukhgeimOptions options;
    int iterations = 0;
    bool converged = false;
    double final_update = 0.0;
    double contraction = 0.0;       // last ratio of successive sup-norm updates
    double fixed_point_defect = 0.0; // ||f - (1 - S f / 4)||_inf at the returned f
    std::vector<double> updates;
};

// S f = C(e^{-i tau R} chi C-bar(e^{i tau R} chi q f)) (C, C-bar swapped for the antiholomorphic type).
inline Field apply_S(const Field& q, const Field& f, const Domain& dom, const PhaseParams& pp, const ConvolutionPlan& plan,
                     PhaseType type = PhaseType::holomorphic, bool conjugate_phase = false)
{
    const Grid& g = dom.grid();
    require_same_grid(q.grid(), g, "apply_S");
    require_same_grid(f.grid(), g, "apply_S");
    require_same_grid(plan.grid(), g, "apply_S");
    check_guard(g, pp.tau);
    const double sgn = conjugate_phase ? -1.0 : 1.0;
    const bool holo = type == PhaseType::holomorphic;
    Field w(g);
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (dom.in_mask(i))
            w[i] = std::polar(1.0, sgn * pp.tau * phase_R(g.center(i), pp.z0)) * q[i] * f[i];
    w = holo ? plan.conj_cauchy(w) : plan.cauchy(w);
    for (std::size_t i = 0; i < g.cells(); ++i)
        w[i] = dom.in_mask(i) ? std::polar(1.0, -sgn * pp.tau * phase_R(g.center(i), pp.z0)) * w[i] : cplx(0.0);
    return holo ? plan.cauchy(w) : plan.conj_cauchy(w);
}

namespace detail {

inline double sup_diff(const Field& a, const Field& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

inline Field picard_step(const Field& q, const Field& f, const Domain& dom, const PhaseParams& pp, const ConvolutionPlan& plan,
                         const BukhgeimOptions& opt)
{
    Field next = apply_S(q, f, dom, pp, plan, opt.type, opt.conjugate_phase);
    for (auto& v : next.values()) v = 1.0 - 0.25 * v;
    return next;
}

} // namespace detail

// Picard iteration f_0 = 1, f_{k+1} = 1 - S f_k / 4 in the sup norm. Five consecutive growing updates are
// reported as divergence (tau below the contraction threshold for this q).
inline BukhgeimSolution solve_f(const Field& q, const Domain& dom, const PhaseParams& pp, const ConvolutionPlan& plan,
                                const BukhgeimOptions& opt = {})
{
    if (!(opt.tol > 0.0) || opt.max_iter < 1)
        throw ConfigError("solve_f needs tol > 0 and max_iter >= 1");
    BukhgeimSolution sol{Field(dom.grid(), 1.0), pp, opt};
    int growing = 0;
    for (int k = 0; k < opt.max_iter; ++k) {
        Field next = detail::picard_step(q, sol.f, dom, pp, plan, opt);
        const double upd = detail::sup_diff(next, sol.f);
        sol.f = std::move(next);
        sol.iterations = k + 1;
        if (!sol.updates.empty()) {
            growing = upd > sol.updates.back() ? growing + 1 : 0;
            if (sol.updates.back() > 0.0)
                sol.contraction = upd / sol.updates.back();
        }
        sol.updates.push_back(upd);
        sol.final_update = upd;
        if (!std::isfinite(upd) || growing >= 5)
            throw DivergenceError("fixed-point iteration diverges at tau = " + std::to_string(pp.tau));
        if (upd < opt.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.fixed_point_defect = detail::sup_diff(sol.f, detail::picard_step(q, sol.f, dom, pp, plan, opt));
    return sol;
}

inline BukhgeimSolution solve_f(const Field& q, const Domain& dom, const PhaseParams& pp, const BukhgeimOptions& opt = {})
{
    return solve_f(q, dom, pp, ConvolutionPlan(dom.grid()), opt);
}

// e^{+-i tau (z - z0)^2} or e^{+-i tau conj(z - z0)^2}; the sign follows conjugate_phase.
inline cplx bukhgeim_phase(cplx z, const PhaseParams& pp, const BukhgeimOptions& opt)
{
    const cplx w = opt.type == PhaseType::holomorphic ? z - pp.z0 : std::conj(z - pp.z0);
    const cplx I(0.0, opt.conjugate_phase ? -1.0 : 1.0);
    return std::exp(I * pp.tau * w * w);
}

// u on the mask and a 3h halo around it, zero elsewhere (the weight grows like e^{2 tau |x y|} off the domain).
inline Field assemble_u(const BukhgeimSolution& sol, const Domain& dom)
{
    const Grid& g = dom.grid();
    require_same_grid(sol.f.grid(), g, "assemble_u");
    Field u(g);
    const double halo = 3.0 * g.spacing();
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (dom.signed_distance(i) > -halo)
            u[i] = bukhgeim_phase(g.center(i), sol.params, sol.options) * sol.f[i];
    return u;
}

enum class LaplacianForm {
    direct,  // 5-point Laplacian of u itself
    factored // u = phase f: Delta u = phase (Delta_h f + 4 (phase'/phase) dbar_h f), 5-point on f
};

// Relative l2 residual ||Delta u + q u|| / ||q u|| over cells at least `erosion` inside the boundary
// (default 3h). For q = 0 the normalisation is ||u||.
inline double pde_residual(const BukhgeimSolution& sol, const Field& q, const Domain& dom, LaplacianForm form = LaplacianForm::direct,
                           double erosion = -1.0)
{
    const Grid& g = dom.grid();
    require_same_grid(q.grid(), g, "pde_residual");
    check_guard(g, sol.params.tau);
    const Field u = assemble_u(sol, dom);
    const Field& f = sol.f;
    const double h = g.spacing(), h2 = g.cell_area();
    const double inner = erosion < 0.0 ? 3.0 * h : erosion;
    const bool holo = sol.options.type == PhaseType::holomorphic;
    const cplx I(0.0, 1.0);
    const cplx log_deriv = 2.0 * I * (sol.options.conjugate_phase ? -1.0 : 1.0) * sol.params.tau;
    const int n = g.size();
    double num = 0.0, qu = 0.0, uu = 0.0;
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j) {
            const std::size_t i = g.index(j, k);
            if (dom.signed_distance(i) < inner)
                continue;
            cplx lap;
            if (form == LaplacianForm::direct) {
                lap = (u(j + 1, k) + u(j - 1, k) + u(j, k + 1) + u(j, k - 1) - 4.0 * u[i]) / h2;
            } else {
                const cplx lf = (f(j + 1, k) + f(j - 1, k) + f(j, k + 1) + f(j, k - 1) - 4.0 * f[i]) / h2;
                const cplx fx = (f(j + 1, k) - f(j - 1, k)) / (2.0 * h), fy = (f(j, k + 1) - f(j, k - 1)) / (2.0 * h);
                const cplx w = g.center(i) - sol.params.z0;
                // holomorphic phase pairs with dbar f, antiholomorphic with d f
                const cplx first = holo ? log_deriv * w * 0.5 * (fx + I * fy) : log_deriv * std::conj(w) * 0.5 * (fx - I * fy);
                lap = bukhgeim_phase(g.center(i), sol.params, sol.options) * (lf + 4.0 * first);
            }
            num += std::norm(lap + q[i] * u[i]);
            qu += std::norm(q[i] * u[i]);
            uu += std::norm(u[i]);
        }
    const double den = qu > 0.0 ? qu : uu;
    if (!(den > 0.0))
        throw NumericalError("pde_residual: empty eroded interior");
    return std::sqrt(num / den);
}

enum class CarlemanMode { phased_cauchy, fixed_point };

// Per tau: phased_cauchy mode measures C(e^{-i tau R} chi a); fixed_point mode measures S 1 built from q. Both the
// L^(2,inf) norm over the grid and the sup norm are recorded, with slopes fitted on log-log axes.
inline SweepRecord carleman_sweep(const Field& a, const Domain& dom, const std::vector<double>& taus, CarlemanMode mode,
                                  cplx z0 = 0.0)
{
    const Grid& g = dom.grid();
    require_same_grid(a.grid(), g, "carleman_sweep");
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1]))
            throw ConfigError("tau list must be strictly increasing");
    SweepRecord rec;
    rec.operand = mode == CarlemanMode::phased_cauchy ? "C(exp(-i tau R) chi a)" : "S 1";
    rec.z0_re = z0.real();
    rec.z0_im = z0.imag();
    for (double t : taus) {
        if (!(t > 0.0))
            throw ConfigError("tau must be positive");
        (t > tau_guard(g) * (1.0 + 1e-12) ? rec.skipped : rec.taus).push_back(t);
    }
    const ConvolutionPlan plan(g);
    std::vector<double> weak(rec.taus.size()), sup(rec.taus.size());
    parallel_for(rec.taus.size(), [&](std::size_t k) {
        const PhaseParams pp{rec.taus[k], z0};
        Field w(g);
        if (mode == CarlemanMode::phased_cauchy) {
            for (std::size_t i = 0; i < g.cells(); ++i)
                if (dom.in_mask(i))
                    w[i] = std::polar(1.0, -pp.tau * phase_R(g.center(i), z0)) * a[i];
            w = plan.cauchy(w);
        } else {
            w = apply_S(a, Field(g, 1.0), dom, pp, plan);
        }
        weak[k] = lorentz_norm(w, LorentzIndex{2.0, kInf, true});
        sup[k] = w.sup_norm();
    });
    rec.series.push_back({"norm_l2weak", weak, fit_loglog_slope(rec.taus, weak)});
    rec.series.push_back({"norm_sup", sup, fit_loglog_slope(rec.taus, sup)});
    return rec;
}

} // namespace bklab

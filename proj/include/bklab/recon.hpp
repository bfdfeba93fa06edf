#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "boundary_data.hpp"
#include "bukhgeim.hpp"
#include "lorentz.hpp"
#include "parallel.hpp"
#include "sweep.hpp"

namespace bklab {

enum class ReconForm { interior, boundary, pairing };

inline const char* form_name(ReconForm f)
{
    switch (f) {
    case ReconForm::interior: return "interior";
    case ReconForm::boundary: return "boundary";
    case ReconForm::pairing: return "pairing";
    }
    return "?";
}

// Values on the cell centres of a coarse lattice grid. Centres outside the domain or closer than 5h to
// its boundary are not evaluated (valid = 0); neither are those where the fixed point diverged.
struct ReconstructionResult {
    Grid lattice;
    Field q_rec;
    Field truth;
    Field baseline; // interior form only: the same quadrature with f = 1, i.e. smooth(q, tau) at z0
    std::vector<std::uint8_t> valid;
    double tau = 0.0;
    ReconForm form = ReconForm::interior;
    int diverged = 0;
    double sup_error = 0.0;
    double l2_error = 0.0;
    double weak_error = 0.0; // L^(2,inf), lattice points weighted by the lattice cell area
};

inline std::vector<std::uint8_t> lattice_mask(const Grid& lattice, const Domain& dom)
{
    std::vector<std::uint8_t> ok(lattice.cells(), 0);
    const double margin = 5.0 * dom.grid().spacing();
    for (std::size_t i = 0; i < lattice.cells(); ++i) {
        const cplx z = lattice.center(i);
        ok[i] = dom.contains(z) && dom.distance_to_boundary(z) >= margin;
    }
    return ok;
}

namespace detail {

inline void finish_metrics(ReconstructionResult& r)
{
    std::vector<double> err;
    double sq = 0.0;
    r.sup_error = 0.0;
    for (std::size_t i = 0; i < r.valid.size(); ++i) {
        if (!r.valid[i])
            continue;
        const double e = std::abs(r.q_rec[i] - r.truth[i]);
        err.push_back(e);
        r.sup_error = std::max(r.sup_error, e);
        sq += e * e;
    }
    if (err.empty()) {
        r.sup_error = r.l2_error = r.weak_error = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    r.l2_error = std::sqrt(sq * r.lattice.cell_area());
    r.weak_error = lorentz_norm(StepRearrangement(std::move(err), r.lattice.cell_area()), LorentzIndex{2.0, kInf, true});
}

// e^{i tau R(z - z0)} chi q on the grid.
inline Field phased(const Field& q, const Domain& dom, const PhaseParams& pp)
{
    const Grid& g = dom.grid();
    Field w(g);
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (dom.in_mask(i))
            w[i] = std::polar(1.0, pp.tau * phase_R(g.center(i), pp.z0)) * q[i];
    return w;
}

inline cplx masked_sum(const Field& a, const Domain& dom)
{
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (dom.in_mask(i))
            s += a[i];
    return s * dom.grid().cell_area();
}

inline ReconstructionResult empty_result(const Grid& lattice, const Domain& dom, double tau, ReconForm form, const Field& truth_src)
{
    ReconstructionResult r{lattice, Field(lattice), Field(lattice), Field(lattice), lattice_mask(lattice, dom), tau, form};
    for (std::size_t i = 0; i < lattice.cells(); ++i)
        if (r.valid[i])
            r.truth[i] = interpolate_field(truth_src, lattice.center(i));
    return r;
}

inline void check_recon_inputs(const Field& q, const Domain& dom, double tau)
{
    require_same_grid(q.grid(), dom.grid(), "reconstruct");
    if (!(tau > 0.0))
        throw ConfigError("tau must be positive");
    check_guard(dom.grid(), tau);
}

} // namespace detail

// Frozen constant C of the interior/boundary agreement |interior - boundary| <= C h tau, fitted once on the
// 0.5 bump over the unit disk, N = 128, tau in {4, ..., 32}.
inline constexpr double kReconGapConstant = 2e-6;

// Interior and/or boundary forms from one Bukhgeim solve per lattice point.
//   interior: (2 tau/pi) int e^{i tau conj(z - z0)^2} q u dm = (2 tau/pi) int e^{i tau R} q f dm
//   boundary: -(4 tau/pi) int_{dOmega} conj(eta) e^{i tau conj(z - z0)^2} dbar u dsigma
// In the boundary form dbar u = e^{i tau (z - z0)^2} dbar f and dbar f = -(1/4) e^{-i tau R} G on the domain,
// G = C-bar(e^{i tau R} chi q f), so the integrand is (1/4) conj(eta) G. G is continuous across the boundary
// and is interpolated there; this avoids differentiating u across the mask edge.
inline std::vector<ReconstructionResult> reconstruct(const Field& q, const Domain& dom, double tau, const Grid& lattice,
                                                     bool interior = true, bool boundary = true, const BukhgeimOptions& opt = {})
{
    detail::check_recon_inputs(q, dom, tau);
    const ConvolutionPlan plan(dom.grid());
    ReconstructionResult ri = detail::empty_result(lattice, dom, tau, ReconForm::interior, q);
    ReconstructionResult rb = detail::empty_result(lattice, dom, tau, ReconForm::boundary, q);
    std::vector<std::uint8_t> diverged(lattice.cells(), 0);
    const double pref = 2.0 * tau / std::numbers::pi;
    parallel_for(lattice.cells(), [&](std::size_t i) {
        if (!ri.valid[i])
            return;
        const PhaseParams pp{tau, lattice.center(i)};
        BukhgeimOptions o = opt;
        o.type = PhaseType::holomorphic;
        o.conjugate_phase = false;
        BukhgeimSolution sol;
        try {
            sol = solve_f(q, dom, pp, plan, o);
        } catch (const DivergenceError&) {
            diverged[i] = 1;
            return;
        }
        Field w = detail::phased(q, dom, pp);
        ri.baseline[i] = pref * detail::masked_sum(w, dom);
        for (std::size_t c = 0; c < w.size(); ++c) w[c] *= sol.f[c];
        if (interior)
            ri.q_rec[i] = pref * detail::masked_sum(w, dom);
        if (boundary) {
            const Field G = plan.conj_cauchy(w);
            cplx s = 0.0;
            for (const BoundaryNode& nd : dom.nodes()) s += std::conj(nd.eta) * detail::interpolate_field(G, nd.point) * nd.weight;
            rb.q_rec[i] = (tau / std::numbers::pi) * s;
        }
    });
    std::vector<ReconstructionResult> out;
    for (ReconstructionResult* r : {&ri, &rb}) {
        for (std::size_t i = 0; i < diverged.size(); ++i)
            if (diverged[i]) {
                r->valid[i] = 0;
                ++r->diverged;
            }
        detail::finish_metrics(*r);
    }
    if (interior)
        out.push_back(std::move(ri));
    if (boundary)
        out.push_back(std::move(rb));
    return out;
}

inline ReconstructionResult reconstruct_interior(const Field& q, const Domain& dom, double tau, const Grid& lattice,
                                                 const BukhgeimOptions& opt = {})
{
    return std::move(reconstruct(q, dom, tau, lattice, true, false, opt).front());
}

inline ReconstructionResult reconstruct_boundary(const Field& q, const Domain& dom, double tau, const Grid& lattice,
                                                 const BukhgeimOptions& opt = {})
{
    return std::move(reconstruct(q, dom, tau, lattice, false, true, opt).front());
}

// (2 tau/pi) int u1 (q1 - q2) u2 dm with u1 = e^{i tau (z - z0)^2} f1 for q1 and u2 = e^{i tau conj(z - z0)^2} f2
// for q2; the phases multiply to e^{i tau R}.
inline ReconstructionResult reconstruct_pairing(const Field& q1, const Field& q2, const Domain& dom, double tau, const Grid& lattice,
                                                const BukhgeimOptions& opt = {})
{
    detail::check_recon_inputs(q1, dom, tau);
    require_same_grid(q2.grid(), dom.grid(), "reconstruct_pairing");
    Field dq = q1;
    dq -= q2;
    const ConvolutionPlan plan(dom.grid());
    ReconstructionResult r = detail::empty_result(lattice, dom, tau, ReconForm::pairing, dq);
    std::vector<std::uint8_t> diverged(lattice.cells(), 0);
    const double pref = 2.0 * tau / std::numbers::pi;
    parallel_for(lattice.cells(), [&](std::size_t i) {
        if (!r.valid[i])
            return;
        const PhaseParams pp{tau, lattice.center(i)};
        BukhgeimOptions o1 = opt, o2 = opt;
        o1.type = PhaseType::holomorphic;
        o2.type = PhaseType::antiholomorphic;
        o1.conjugate_phase = o2.conjugate_phase = false;
        try {
            const BukhgeimSolution s1 = solve_f(q1, dom, pp, plan, o1);
            const BukhgeimSolution s2 = solve_f(q2, dom, pp, plan, o2);
            Field w = detail::phased(dq, dom, pp);
            for (std::size_t c = 0; c < w.size(); ++c) w[c] *= s1.f[c] * s2.f[c];
            r.q_rec[i] = pref * detail::masked_sum(w, dom);
        } catch (const DivergenceError&) {
            diverged[i] = 1;
        }
    });
    for (std::size_t i = 0; i < diverged.size(); ++i)
        if (diverged[i]) {
            r.valid[i] = 0;
            ++r.diverged;
        }
    detail::finish_metrics(r);
    return r;
}

// (2 tau/pi) int_Omega e^{i tau R} Q r dm.
inline cplx error_term(const Field& Q, const Field& r, const Domain& dom, const PhaseParams& pp)
{
    require_same_grid(Q.grid(), dom.grid(), "error_term");
    require_same_grid(r.grid(), dom.grid(), "error_term");
    Field w = detail::phased(Q, dom, pp);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= r[i];
    return (2.0 * pp.tau / std::numbers::pi) * detail::masked_sum(w, dom);
}

// tau^{1 - s/3} ||Q||_{s,(2,1)} ||r||_{s,(2,inf)}, both norms of the zero extensions.
inline double error_term_scale(const Field& Q, const Field& r, const Domain& dom, double tau, double s)
{
    const Field qz = dom.restrict(Q), rz = dom.restrict(r);
    return std::pow(tau, 1.0 - s / 3.0) * bessel_norm(qz, s, LorentzIndex{2.0, 1.0, true}) *
           bessel_norm(rz, s, LorentzIndex{2.0, kInf, true});
}

// Slope of ln ||u||_{W^{1,2}} against tau for the free phase u = e^{i tau (z - z0)^2} (f = 1), maximised over
// z0; this is the growth constant of the exponential weight.
inline double weight_growth_constant(const Domain& dom, const std::vector<cplx>& z0s, const std::vector<double>& taus)
{
    if (taus.size() < 2 || z0s.empty())
        throw ConfigError("growth calibration needs >= 2 taus and >= 1 z0");
    const Grid& g = dom.grid();
    std::vector<double> slopes(z0s.size());
    parallel_for(z0s.size(), [&](std::size_t k) {
        std::vector<double> lg;
        for (double t : taus) {
            BukhgeimSolution sol{Field(g, 1.0), PhaseParams{t, z0s[k]}};
            lg.push_back(std::log(w12_norm(assemble_u(sol, dom), dom)));
        }
        // least squares slope of lg against tau
        double mt = 0.0, ml = 0.0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            mt += taus[i];
            ml += lg[i];
        }
        mt /= taus.size();
        ml /= taus.size();
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            num += (taus[i] - mt) * (lg[i] - ml);
            den += (taus[i] - mt) * (taus[i] - mt);
        }
        slopes[k] = num / den;
    });
    return *std::max_element(slopes.begin(), slopes.end());
}

// Spearman rank correlation; ties get their average rank.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw ConfigError("spearman needs two samples of equal size >= 2");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - mean) * (rb[i] - mean);
        da += (ra[i] - mean) * (ra[i] - mean);
        db += (rb[i] - mean) * (rb[i] - mean);
    }
    return num / std::sqrt(da * db);
}

struct PotentialPair {
    std::string label;
    Field q1;
    Field q2;
};

struct StabilityConfig {
    double s = 0.25;
    CauchyFamily family;
    Grid lattice = Grid(0.6, 8);
    std::vector<double> growth_taus{2.0, 4.0, 8.0, 16.0};
    double tau_min = 1.0;
};

struct StabilityRow {
    std::string label;
    double norm_diff = 0.0; // ||q1 - q2||_(2,inf) over the domain
    double dhat = 0.0;
    double log_term = 0.0;  // (ln 1/dhat)^{-s/4}, the bound with C = 1
    double tau_rule = 0.0;  // ln(1/dhat) / (2 B)
    double tau_used = 0.0;  // tau_rule clamped to [tau_min, guard]
    bool clamped = false;
    double recon_sup_error = 0.0;
    double recon_l2_error = 0.0;
};

struct StabilityRecord {
    std::vector<StabilityRow> rows;
    std::vector<std::string> excluded; // labels with dhat = 0 or dhat >= 1
    double growth_constant = 0.0;      // C of ||u|| <= e^{C tau} ||f||
    double B = 0.0;                    // 1 + 2 C
    double spearman = std::numeric_limits<double>::quiet_NaN();
    double max_ratio = 0.0;            // max norm_diff / log_term: the smallest C making every row hold
};

inline StabilityRecord stability_experiment(const std::vector<PotentialPair>& pairs, const Domain& dom, const StabilityConfig& cfg)
{
    if (!(cfg.s > 0.0 && cfg.s < 1.0))
        throw ConfigError("stability experiment needs 0 < s < 1");
    StabilityRecord rec;
    rec.growth_constant = weight_growth_constant(dom, cfg.family.z0s.empty() ? std::vector<cplx>{domain_centre(dom)} : cfg.family.z0s,
                                                 cfg.growth_taus);
    rec.B = 1.0 + 2.0 * rec.growth_constant;
    const double guard = tau_guard(dom.grid());
    for (const PotentialPair& p : pairs) {
        const CauchyDistanceReport d = cauchy_distance(p.q1, p.q2, dom, cfg.family);
        if (!(d.value > 0.0) || !(d.value < 1.0)) {
            rec.excluded.push_back(p.label);
            continue;
        }
        StabilityRow row;
        row.label = p.label;
        Field dq = p.q1;
        dq -= p.q2;
        row.norm_diff = lorentz_norm(dq, LorentzIndex{2.0, kInf, true}, &dom);
        row.dhat = d.value;
        row.log_term = std::pow(std::log(1.0 / d.value), -cfg.s / 4.0);
        row.tau_rule = std::log(1.0 / d.value) / (2.0 * rec.B);
        row.tau_used = std::clamp(row.tau_rule, cfg.tau_min, guard);
        row.clamped = row.tau_used != row.tau_rule;
        const ReconstructionResult r = reconstruct_pairing(p.q1, p.q2, dom, row.tau_used, cfg.lattice);
        row.recon_sup_error = r.sup_error;
        row.recon_l2_error = r.l2_error;
        rec.max_ratio = std::max(rec.max_ratio, row.norm_diff / row.log_term);
        rec.rows.push_back(std::move(row));
    }
    if (rec.rows.size() >= 2) {
        std::vector<double> a, b;
        for (const auto& r : rec.rows) {
            a.push_back(r.norm_diff);
            b.push_back(r.log_term);
        }
        rec.spearman = spearman(a, b);
    }
    return rec;
}

} // namespace bklab

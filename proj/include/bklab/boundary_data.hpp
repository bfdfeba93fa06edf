#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "bukhgeim.hpp"
#include "difference.hpp"
#include "domain.hpp"
#include "parallel.hpp"

namespace bklab {

// Dirichlet datum as a function of position; only its values on the polyline are used, except as the
// fallback value at cells outside the mask during interpolation.
using BoundaryFunction = std::function<cplx(cplx)>;

// Linear interpolation of a node trace in arclength (periodic).
inline BoundaryFunction interpolate_trace(const BoundaryTrace& trace, const Domain& dom)
{
    const auto& nodes = dom.nodes();
    if (trace.size() != nodes.size())
        throw ConfigError("trace length does not match the domain's boundary nodes");
    std::vector<double> s(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) s[i] = nodes[i].arclength;
    const double per = dom.perimeter();
    return [s, trace, per, &dom](cplx p) {
        const double a = dom.arclength_at(p);
        const std::size_t m = s.size();
        auto it = std::upper_bound(s.begin(), s.end(), a);
        const std::size_t hi = static_cast<std::size_t>(it - s.begin()) % m;
        const std::size_t lo = (hi + m - 1) % m;
        double span = s[hi] - s[lo], off = a - s[lo];
        if (span <= 0.0)
            span += per;
        if (off < 0.0)
            off += per;
        const double t = std::clamp(off / span, 0.0, 1.0);
        return (1.0 - t) * trace[lo] + t * trace[hi];
    };
}

namespace detail {

// One arm of the Shortley-Weller stencil: the neighbour cell (frac = 1, interior) or the polyline crossing at
// distance frac h, where the datum is imposed.
struct Arm {
    double frac = 1.0;
    bool interior = true;
    cplx crossing;
};

inline constexpr std::array<std::pair<int, int>, 4> kDirections{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

// Factorisation of Delta_h + diag q on the masked cells (Shortley-Weller at the polyline). Immutable once
// built; shared by the solver handle and every problem solved with it. The domain must outlive both.
struct DirichletSystem {
    const Domain* dom = nullptr;
    Field q;
    std::vector<std::size_t> cells;
    std::vector<long> unknown;
    std::vector<std::array<Arm, 4>> arms;
    Eigen::SparseMatrix<cplx> matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
};

inline std::shared_ptr<DirichletSystem> build_dirichlet_system(const Field& q, const Domain& dom)
{
    const Grid& g = dom.grid();
    require_same_grid(q.grid(), g, "forward_solve");
    auto sys = std::make_shared<DirichletSystem>();
    sys->dom = &dom;
    sys->q = q;
    const double h = g.spacing();
    sys->unknown.assign(g.cells(), -1);
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (dom.in_mask(i)) {
            sys->unknown[i] = static_cast<long>(sys->cells.size());
            sys->cells.push_back(i);
        }
    const std::size_t nc = sys->cells.size();
    sys->arms.resize(nc);
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(nc * 5);
    for (std::size_t c = 0; c < nc; ++c) {
        const std::size_t i = sys->cells[c];
        const int j = static_cast<int>(i % g.size()), k = static_cast<int>(i / g.size());
        const cplx z = g.center(i);
        for (std::size_t d = 0; d < 4; ++d) {
            const auto [dj, dk] = kDirections[d];
            Arm& arm = sys->arms[c][d];
            if (dom.in_mask(j + dj, k + dk))
                continue;
            const double t = dom.first_hit(z, z + h * cplx(dj, dk)).value_or(1.0);
            arm.interior = false;
            arm.frac = std::max(t, 1e-6);
            arm.crossing = z + arm.frac * h * cplx(dj, dk);
        }
        cplx diag = q[i];
        for (int axis = 0; axis < 2; ++axis) {
            const Arm& pos = sys->arms[c][2 * axis];
            const Arm& neg = sys->arms[c][2 * axis + 1];
            const double hp = pos.frac * h, hn = neg.frac * h;
            diag -= 2.0 / (hp * hn);
            const auto [pj, pk] = kDirections[2 * axis];
            if (pos.interior)
                trip.emplace_back(static_cast<int>(c), static_cast<int>(sys->unknown[g.index(j + pj, k + pk)]), 2.0 / (hp * (hp + hn)));
            if (neg.interior)
                trip.emplace_back(static_cast<int>(c), static_cast<int>(sys->unknown[g.index(j - pj, k - pk)]), 2.0 / (hn * (hp + hn)));
        }
        trip.emplace_back(static_cast<int>(c), static_cast<int>(c), diag);
    }
    sys->matrix.resize(static_cast<int>(nc), static_cast<int>(nc));
    sys->matrix.setFromTriplets(trip.begin(), trip.end());
    sys->matrix.makeCompressed();
    sys->lu.analyzePattern(sys->matrix);
    sys->lu.factorize(sys->matrix);
    if (sys->lu.info() != Eigen::Success)
        throw SingularSystem("Dirichlet system is singular (q at a Dirichlet eigenvalue?)");
    return sys;
}

} // namespace detail

struct DirichletProblem {
    std::shared_ptr<const detail::DirichletSystem> system;
    BoundaryFunction datum;
    Field U;                                     // solution on the mask, zero elsewhere
    std::vector<std::array<cplx, 4>> arm_values; // datum at each boundary arm, by masked cell
    double residual = 0.0;                       // relative max residual of the linear system

    const Domain& domain() const { return *system->dom; }
    const Field& potential() const { return system->q; }

    // Nonuniform 3-point partial derivatives using the crossing values at boundary arms.
    std::pair<Field, Field> gradient() const
    {
        const Grid& g = domain().grid();
        const double h = g.spacing();
        Field dx(g), dy(g);
        for (std::size_t c = 0; c < system->cells.size(); ++c) {
            const std::size_t i = system->cells[c];
            const int j = static_cast<int>(i % g.size()), k = static_cast<int>(i / g.size());
            for (int axis = 0; axis < 2; ++axis) {
                const auto [pj, pk] = detail::kDirections[2 * axis];
                const detail::Arm& pos = system->arms[c][2 * axis];
                const detail::Arm& neg = system->arms[c][2 * axis + 1];
                const double hp = pos.frac * h, hn = neg.frac * h;
                const cplx fp = pos.interior ? U(j + pj, k + pk) : arm_values[c][2 * axis];
                const cplx fn = neg.interior ? U(j - pj, k - pk) : arm_values[c][2 * axis + 1];
                (axis == 0 ? dx : dy)[i] = (hn * hn * fp - hp * hp * fn + (hp * hp - hn * hn) * U[i]) / (hp * hn * (hp + hn));
            }
        }
        return {std::move(dx), std::move(dy)};
    }

    double w12_norm() const
    {
        const auto [dx, dy] = gradient();
        double s = 0.0;
        for (std::size_t i : system->cells) s += std::norm(U[i]) + std::norm(dx[i]) + std::norm(dy[i]);
        return std::sqrt(s * domain().grid().cell_area());
    }
};

class DirichletSolver {
public:
    DirichletSolver(const Field& q, const Domain& dom) : sys_(detail::build_dirichlet_system(q, dom)) {}

    const Domain& domain() const { return *sys_->dom; }
    const Field& potential() const { return sys_->q; }

    DirichletProblem solve(const BoundaryFunction& g) const
    {
        const detail::DirichletSystem& s = *sys_;
        const double h = s.dom->grid().spacing();
        const std::size_t nc = s.cells.size();
        DirichletProblem p{sys_, g, Field(s.dom->grid()), std::vector<std::array<cplx, 4>>(nc)};
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<long>(nc));
        for (std::size_t c = 0; c < nc; ++c)
            for (int axis = 0; axis < 2; ++axis) {
                const detail::Arm& pos = s.arms[c][2 * axis];
                const detail::Arm& neg = s.arms[c][2 * axis + 1];
                const double hp = pos.frac * h, hn = neg.frac * h;
                if (!pos.interior) {
                    p.arm_values[c][2 * axis] = g(pos.crossing);
                    rhs[static_cast<long>(c)] -= 2.0 / (hp * (hp + hn)) * p.arm_values[c][2 * axis];
                }
                if (!neg.interior) {
                    p.arm_values[c][2 * axis + 1] = g(neg.crossing);
                    rhs[static_cast<long>(c)] -= 2.0 / (hn * (hp + hn)) * p.arm_values[c][2 * axis + 1];
                }
            }
        const Eigen::VectorXcd x = s.lu.solve(rhs);
        if (!x.allFinite())
            throw SingularSystem("Dirichlet solve produced non-finite values");
        const Eigen::VectorXcd ax = s.matrix * x;
        const double scale = std::max(rhs.cwiseAbs().maxCoeff(), ax.cwiseAbs().maxCoeff());
        p.residual = scale > 0.0 ? (ax - rhs).cwiseAbs().maxCoeff() / scale : 0.0;
        if (p.residual > 1e-6)
            throw SingularSystem("Dirichlet system is numerically singular (relative residual " + std::to_string(p.residual) + ")");
        for (std::size_t c = 0; c < nc; ++c) p.U[s.cells[c]] = x[static_cast<long>(c)];
        return p;
    }

    DirichletProblem solve(const BoundaryTrace& trace) const { return solve(interpolate_trace(trace, domain())); }

private:
    std::shared_ptr<const detail::DirichletSystem> sys_;
};

inline DirichletProblem forward_solve(const Field& q, const BoundaryFunction& g, const Domain& dom)
{
    return DirichletSolver(q, dom).solve(g);
}

// (Lambda_q u, v) = int (-grad U . grad V + q U V) dm with the potential of the first problem.
inline cplx dn_pairing(const DirichletProblem& u, const DirichletProblem& v)
{
    require_same_grid(u.domain().grid(), v.domain().grid(), "dn_pairing");
    const auto [ux, uy] = u.gradient();
    const auto [vx, vy] = v.gradient();
    const Field& q = u.potential();
    cplx s = 0.0;
    for (std::size_t i = 0; i < ux.size(); ++i)
        if (u.domain().in_mask(i))
            s += -(ux[i] * vx[i] + uy[i] * vy[i]) + q[i] * u.U[i] * v.U[i];
    return s * u.domain().grid().cell_area();
}

namespace detail {

inline std::array<double, 4> lagrange4(double t)
{
    std::array<double, 4> w{};
    for (int a = 0; a < 4; ++a) {
        w[a] = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a)
                w[a] *= (t - b) / (a - b);
    }
    return w;
}

// Bicubic Lagrange interpolation from the 4 x 4 cells around z; value(j, k) supplies the samples.
template <class Value>
cplx interpolate_bicubic(const Grid& g, cplx z, Value&& value)
{
    const double h = g.spacing();
    const double fx = (z.real() - g.x(0)) / h, fy = (z.imag() - g.y(0)) / h;
    const int j0 = static_cast<int>(std::floor(fx)) - 1, k0 = static_cast<int>(std::floor(fy)) - 1;
    const auto wx = lagrange4(fx - j0), wy = lagrange4(fy - k0);
    cplx s = 0.0;
    for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) s += wx[a] * wy[b] * value(j0 + a, k0 + b);
    return s;
}

// Cells outside the mask contribute fallback(centre).
inline cplx interpolate_cubic(const Field& f, const Domain& dom, cplx z, const BoundaryFunction& fallback)
{
    const Grid& g = f.grid();
    return interpolate_bicubic(g, z, [&](int j, int k) {
        return dom.in_mask(j, k) ? f(j, k) : fallback(g.center(std::clamp(j, 0, g.size() - 1), std::clamp(k, 0, g.size() - 1)));
    });
}

// Whole-grid version; indices are clamped at the grid edge.
inline cplx interpolate_field(const Field& f, cplx z)
{
    const int n = f.grid().size();
    return interpolate_bicubic(f.grid(), z, [&](int j, int k) { return f(std::clamp(j, 0, n - 1), std::clamp(k, 0, n - 1)); });
}

// Outward normal derivative at a boundary node: one-sided second order from the datum at the node and
// interpolated values at 3h and 6h along the inward normal.
inline cplx normal_derivative(const DirichletProblem& p, const BoundaryNode& node)
{
    const Domain& dom = p.domain();
    const double s = 3.0 * dom.grid().spacing();
    const cplx u0 = p.datum(node.point);
    const cplx u1 = interpolate_cubic(p.U, dom, node.point - s * node.eta, p.datum);
    const cplx u2 = interpolate_cubic(p.U, dom, node.point - 2.0 * s * node.eta, p.datum);
    return (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * s);
}

} // namespace detail

struct AlessandriniCheck {
    cplx interior;
    cplx boundary;
    double gap = 0.0;
};

// int U1 (q1 - q2) U2 dm against the boundary integral of Tr U1 d_nu U2 - Tr U2 d_nu U1.
inline AlessandriniCheck alessandrini_check(const DirichletProblem& p1, const DirichletProblem& p2)
{
    const Domain& dom = p1.domain();
    require_same_grid(dom.grid(), p2.domain().grid(), "alessandrini_check");
    const Field& q1 = p1.potential();
    const Field& q2 = p2.potential();
    AlessandriniCheck out;
    for (std::size_t i = 0; i < q1.size(); ++i)
        if (dom.in_mask(i))
            out.interior += p1.U[i] * (q1[i] - q2[i]) * p2.U[i];
    out.interior *= dom.grid().cell_area();
    for (const BoundaryNode& node : dom.nodes())
        out.boundary += node.weight * (p1.datum(node.point) * detail::normal_derivative(p2, node) -
                                       p2.datum(node.point) * detail::normal_derivative(p1, node));
    out.gap = std::abs(out.interior - out.boundary);
    return out;
}

// Centre used for angular trace modes: disk centre or polygon vertex mean.
inline cplx domain_centre(const Domain& dom)
{
    if (const auto* d = std::get_if<Disk>(&dom.shape()))
        return d->center;
    cplx c = 0.0;
    const auto& v = std::get<Polygon>(dom.shape()).vertices;
    for (cplx p : v) c += p;
    return c / static_cast<double>(v.size());
}

// 1, cos t, sin t, cos 2t, sin 2t, ... with t the angle about the domain centre.
inline BoundaryFunction trig_mode(const Domain& dom, int index)
{
    const cplx c = domain_centre(dom);
    const int k = (index + 1) / 2;
    const bool sine = index > 0 && index % 2 == 0;
    return [c, k, sine](cplx z) {
        const double t = std::arg(z - c);
        return cplx(k == 0 ? 1.0 : (sine ? std::sin(k * t) : std::cos(k * t)));
    };
}

// Trace norm: W^{1,2} norm of the minimal-energy extension, which solves Delta W - W = 0.
inline double trace_norm(const BoundaryFunction& g, const Domain& dom)
{
    return DirichletSolver(Field(dom.grid(), -1.0), dom).solve(g).w12_norm();
}

// z0 lattice: m x m points in the square of half-width `half` about `centre`, keeping points at least 5h inside.
inline std::vector<cplx> z0_lattice(const Domain& dom, cplx centre, double half, int m)
{
    if (m < 1 || !(half >= 0.0))
        throw ConfigError("z0 lattice needs m >= 1 and half-width >= 0");
    std::vector<cplx> pts;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            const double sx = m == 1 ? 0.0 : -half + 2.0 * half * a / (m - 1);
            const double sy = m == 1 ? 0.0 : -half + 2.0 * half * b / (m - 1);
            const cplx z = centre + cplx(sx, sy);
            if (dom.contains(z) && dom.distance_to_boundary(z) >= 5.0 * dom.grid().spacing())
                pts.push_back(z);
        }
    return pts;
}

struct CauchyFamily {
    std::vector<cplx> z0s;
    std::vector<double> taus;
    int trig_modes = 8; // 0 disables the finite-difference pairs
    bool bukhgeim = true;
};

struct PairValue {
    std::string kind; // "bukhgeim" or "fd"
    double tau = 0.0;
    cplx z0;
    int mode_u = -1, mode_v = -1;
    double value = 0.0;
};

struct CauchyDistanceReport {
    double value = 0.0; // lower bound for the Cauchy-data distance
    std::vector<PairValue> pairs;
    std::vector<std::pair<double, cplx>> skipped; // (tau, z0) with a diverging fixed point
    std::string family;
};

namespace detail {

inline cplx masked_triple(const Field& a, const Field& w, const Field& b, const Domain& dom)
{
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (dom.in_mask(i))
            s += a[i] * w[i] * b[i];
    return s * dom.grid().cell_area();
}

} // namespace detail

// max over a finite family of normalised solution pairs of |int U (q1 - q2) V dm|, all in W^{1,2}.
inline CauchyDistanceReport cauchy_distance(const Field& q1, const Field& q2, const Domain& dom, const CauchyFamily& fam)
{
    const Grid& g = dom.grid();
    require_same_grid(q1.grid(), g, "cauchy_distance");
    require_same_grid(q2.grid(), g, "cauchy_distance");
    if (fam.bukhgeim && (fam.z0s.size() < 9 || fam.taus.size() < 3))
        throw ConfigError("Bukhgeim family needs at least 9 z0 points and 3 tau values");
    if (fam.trig_modes < 0)
        throw ConfigError("number of trigonometric modes must be nonnegative");
    Field dq = q1;
    dq -= q2;
    CauchyDistanceReport rep;
    rep.family = std::to_string(fam.bukhgeim ? fam.z0s.size() * fam.taus.size() : 0) + " Bukhgeim pairs, " +
                 std::to_string(fam.trig_modes * fam.trig_modes) + " trigonometric FD pairs";
    if (fam.bukhgeim) {
        const ConvolutionPlan plan(g);
        const std::size_t tasks = fam.z0s.size() * fam.taus.size();
        std::vector<PairValue> vals(tasks);
        std::vector<std::uint8_t> ok(tasks, 0);
        parallel_for(tasks, [&](std::size_t t) {
            const PhaseParams pp{fam.taus[t % fam.taus.size()], fam.z0s[t / fam.taus.size()]};
            vals[t] = {"bukhgeim", pp.tau, pp.z0};
            try {
                BukhgeimOptions anti;
                anti.type = PhaseType::antiholomorphic;
                const Field u = assemble_u(solve_f(q1, dom, pp, plan), dom);
                const Field v = assemble_u(solve_f(q2, dom, pp, plan, anti), dom);
                vals[t].value = std::abs(detail::masked_triple(u, dq, v, dom)) / (w12_norm(u, dom) * w12_norm(v, dom));
                ok[t] = 1;
            } catch (const DivergenceError&) {
            }
        });
        for (std::size_t t = 0; t < tasks; ++t) {
            if (ok[t])
                rep.pairs.push_back(vals[t]);
            else
                rep.skipped.emplace_back(vals[t].tau, vals[t].z0);
        }
    }
    if (fam.trig_modes > 0) {
        const DirichletSolver s1(q1, dom), s2(q2, dom);
        std::vector<DirichletProblem> us, vs;
        for (int m = 0; m < fam.trig_modes; ++m) {
            us.push_back(s1.solve(trig_mode(dom, m)));
            vs.push_back(s2.solve(trig_mode(dom, m)));
        }
        for (int a = 0; a < fam.trig_modes; ++a)
            for (int b = 0; b < fam.trig_modes; ++b) {
                const double val = std::abs(detail::masked_triple(us[a].U, dq, vs[b].U, dom)) / (us[a].w12_norm() * vs[b].w12_norm());
                rep.pairs.push_back({"fd", 0.0, 0.0, a, b, val});
            }
    }
    for (const auto& p : rep.pairs) rep.value = std::max(rep.value, p.value);
    return rep;
}

// max over pairs of trigonometric traces of |((Lambda_1 - Lambda_2) u, v)| / (||u|| ||v||) with trace norms;
// the pairing is evaluated through int U1 (q1 - q2) V2 dm.
inline double dn_difference_norm(const Field& q1, const Field& q2, const Domain& dom, int modes = 8)
{
    const DirichletSolver s1(q1, dom), s2(q2, dom);
    Field dq = q1;
    dq -= q2;
    std::vector<DirichletProblem> us, vs;
    std::vector<double> tn;
    for (int m = 0; m < modes; ++m) {
        us.push_back(s1.solve(trig_mode(dom, m)));
        vs.push_back(s2.solve(trig_mode(dom, m)));
        tn.push_back(trace_norm(trig_mode(dom, m), dom));
    }
    double best = 0.0;
    for (int a = 0; a < modes; ++a)
        for (int b = 0; b < modes; ++b)
            best = std::max(best, std::abs(detail::masked_triple(us[a].U, dq, vs[b].U, dom)) / (tn[a] * tn[b]));
    return best;
}

} // namespace bklab

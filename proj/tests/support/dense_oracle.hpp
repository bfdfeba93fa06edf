#pragma once

#include <numbers>

#include <bklab/domain.hpp>
#include <bklab/phase.hpp>

// Brute-force O(N^4) reference implementations, deliberately free of FFTs.
namespace bklab::oracle {

// sum over cells w != z of h^2 f(w) / (pi (z - w)), or with conj(z - w) when conjugate is set.
inline Field dense_cauchy(const Field& f, bool conjugate = false)
{
    const Grid& g = f.grid();
    const double h2 = g.cell_area();
    Field out(g);
    for (std::size_t a = 0; a < g.cells(); ++a) {
        const cplx z = g.center(a);
        cplx s = 0.0;
        for (std::size_t b = 0; b < g.cells(); ++b) {
            if (a == b || f[b] == 0.0)
                continue;
            const cplx d = z - g.center(b);
            s += f[b] / (conjugate ? std::conj(d) : d);
        }
        out[a] = s * h2 / std::numbers::pi;
    }
    return out;
}

// S f = C(e^{-i tau R} chi C-bar(e^{i tau R} chi q f)) evaluated by dense sums.
inline Field dense_S(const Field& q, const Field& f, const Domain& dom, const PhaseParams& pp)
{
    const Grid& g = q.grid();
    Field inner(g), mid(g);
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (dom.in_mask(i))
            inner[i] = std::polar(1.0, pp.tau * phase_R(g.center(i), pp.z0)) * q[i] * f[i];
    Field cb = dense_cauchy(inner, true);
    for (std::size_t i = 0; i < g.cells(); ++i)
        if (dom.in_mask(i))
            mid[i] = std::polar(1.0, -pp.tau * phase_R(g.center(i), pp.z0)) * cb[i];
    return dense_cauchy(mid, false);
}

inline Field dense_picard(const Field& q, const Domain& dom, const PhaseParams& pp, int iterations)
{
    Field f(q.grid(), 1.0);
    for (int k = 0; k < iterations; ++k) {
        Field s = dense_S(q, f, dom, pp);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = 1.0 - 0.25 * s[i];
    }
    return f;
}

} // namespace bklab::oracle

#include <gtest/gtest.h>

#include <bklab/bukhgeim.hpp>

#include "dense_oracle.hpp"
#include "test_util.hpp"

using namespace bklab;

namespace {

Domain disk(int n) { return Domain(Grid(1.2, n), Disk{0.0, 1.0}); }

Field bump_q(const Grid& g, double amp = 0.5)
{
    return Field::from_function(g, [amp](cplx z) { return amp * testutil::bump(z, cplx(0.1, -0.1), 0.6); });
}

double rel_sup(const Field& a, const Field& b)
{
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return d / s;
}

} // namespace

TEST(ApplyS, ZeroPotential)
{
    const Domain d = disk(32);
    std::mt19937_64 rng(1);
    const Field f = testutil::random_field(d.grid(), rng);
    EXPECT_EQ(apply_S(Field(d.grid()), f, d, {4.0, 0.0}, ConvolutionPlan(d.grid())).sup_norm(), 0.0);
}

TEST(ApplyS, MatchesDenseOracle)
{
    const Domain d = disk(32);
    const ConvolutionPlan plan(d.grid());
    std::mt19937_64 rng(2);
    const Field q = testutil::random_field(d.grid(), rng);
    const Field f = testutil::random_field(d.grid(), rng);
    for (const PhaseParams& pp : {PhaseParams{2.0, cplx(0.1, 0.2)}, PhaseParams{5.0, cplx(-0.3, 0.0)}, PhaseParams{8.0, cplx(0.0, 0.4)}})
        EXPECT_LE(rel_sup(apply_S(q, f, d, pp, plan), oracle::dense_S(q, f, d, pp)), 1e-6);
}

TEST(ApplyS, LinearInF)
{
    const Domain d = disk(32);
    const ConvolutionPlan plan(d.grid());
    std::mt19937_64 rng(3);
    const Field q = testutil::random_field(d.grid(), rng), f1 = testutil::random_field(d.grid(), rng),
                f2 = testutil::random_field(d.grid(), rng);
    Field sum = f1;
    sum *= cplx(2.0, -1.0);
    sum += f2;
    Field expect = apply_S(q, f1, d, {3.0, 0.0}, plan);
    expect *= cplx(2.0, -1.0);
    expect += apply_S(q, f2, d, {3.0, 0.0}, plan);
    EXPECT_LE(rel_sup(apply_S(q, sum, d, {3.0, 0.0}, plan), expect), 1e-12);
}

TEST(ApplyS, GuardAndGridErrors)
{
    const Domain d = disk(32);
    const ConvolutionPlan plan(d.grid());
    const Field q(d.grid(), 1.0);
    EXPECT_THROW(apply_S(q, q, d, {100.0, 0.0}, plan), GuardViolation);
    EXPECT_THROW(apply_S(Field(Grid(1.2, 64)), q, d, {1.0, 0.0}, plan), GridMismatch);
}

TEST(ApplyS, SupNormDecaysInTau)
{
    const Domain d = disk(256);
    const SweepRecord r = carleman_sweep(bump_q(d.grid()), d, geometric_taus(4, 64), CarlemanMode::fixed_point, cplx(0.1, 0.2));
    EXPECT_LE(r.series[1].fit.slope, -0.30);
}

TEST(SolveF, ZeroPotentialIsOneAfterOneStep)
{
    const Domain d = disk(32);
    const BukhgeimSolution s = solve_f(Field(d.grid()), d, {4.0, 0.0});
    EXPECT_EQ(s.iterations, 1);
    EXPECT_TRUE(s.converged);
    for (cplx v : s.f.values()) EXPECT_EQ(v, cplx(1.0));
}

TEST(SolveF, PicardMatchesDenseOracle)
{
    const Domain d = disk(32);
    const ConvolutionPlan plan(d.grid());
    const Field q = bump_q(d.grid(), 3.0);
    for (const PhaseParams& pp : {PhaseParams{2.0, cplx(0.1, 0.2)}, PhaseParams{4.0, cplx(-0.2, 0.1)}, PhaseParams{8.0, cplx(0.0, -0.3)}}) {
        BukhgeimOptions opt;
        opt.tol = 1e-300;
        opt.max_iter = 4;
        const BukhgeimSolution s = solve_f(q, d, pp, plan, opt);
        EXPECT_LE(rel_sup(s.f, oracle::dense_picard(q, d, pp, s.iterations)), 1e-6);
    }
}

TEST(SolveF, FixedPointDefectAndSurrogateBound)
{
    const Domain d = disk(128);
    const Field q = bump_q(d.grid());
    for (double tau : {4.0, 16.0}) {
        const BukhgeimSolution s = solve_f(q, d, {tau, cplx(0.1, 0.2)});
        EXPECT_TRUE(s.converged);
        EXPECT_LE(s.fixed_point_defect, 10.0 * s.options.tol);
        EXPECT_LE(s.f.sup_norm(), 4.0 / 3.0);
    }
}

TEST(SolveF, ContractionImprovesWithTau)
{
    const Domain d = disk(128);
    const ConvolutionPlan plan(d.grid());
    const Field q = bump_q(d.grid(), 5.0);
    double prev = 1.0;
    for (double tau : {2.0, 4.0, 8.0, 16.0}) {
        const BukhgeimSolution s = solve_f(q, d, {tau, cplx(0.1, 0.2)}, plan);
        EXPECT_LT(s.contraction, prev) << tau;
        prev = s.contraction;
    }
}

TEST(SolveF, DivergenceIsReported)
{
    const Domain d = disk(64);
    EXPECT_THROW(solve_f(bump_q(d.grid(), 400.0), d, {1.0, 0.0}), DivergenceError);
}

TEST(SolveF, CorrectionDecaysInTau)
{
    const Domain d = disk(256);
    const ConvolutionPlan plan(d.grid());
    const Field q = bump_q(d.grid());
    std::vector<double> taus = geometric_taus(4, 64), norms;
    for (double tau : taus) {
        Field r = solve_f(q, d, {tau, cplx(0.1, 0.2)}, plan).f;
        for (auto& v : r.values()) v -= 1.0;
        norms.push_back(bessel_norm(r, 0.25, LorentzIndex{2.0, kInf, true}, &d));
    }
    EXPECT_LE(fit_loglog_slope(taus, norms).slope, -0.85);
}

TEST(SolveF, ContinuousInZ0)
{
    const Domain d = disk(128);
    const ConvolutionPlan plan(d.grid());
    const Field q = bump_q(d.grid(), 2.0);
    const cplx base(0.1, 0.2);
    const Field f0 = solve_f(q, d, {8.0, base}, plan).f;
    double prev = 1e300;
    for (double step : {0.2, 0.05, 0.0125, 0.003125}) {
        const Field f1 = solve_f(q, d, {8.0, base + cplx(step, -step)}, plan).f;
        double diff = 0.0;
        for (std::size_t i = 0; i < f0.size(); ++i) diff = std::max(diff, std::abs(f0[i] - f1[i]));
        EXPECT_LT(diff, prev);
        prev = diff;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(SolveF, SignFlipIsConjugation)
{
    const Domain d = disk(64);
    const Field q = bump_q(d.grid(), 2.0);
    BukhgeimOptions flip, anti;
    flip.conjugate_phase = true;
    anti.type = PhaseType::antiholomorphic;
    const PhaseParams pp{6.0, cplx(0.2, -0.1)};
    const Field a = solve_f(q, d, pp, flip).f;
    const Field b = solve_f(q, d, pp, anti).f.conj();
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    EXPECT_LE(diff, 1e-12);
}

TEST(AssembleU, ZeroPotentialIsThePhase)
{
    const Domain d = disk(64);
    const PhaseParams pp{5.0, cplx(0.1, -0.2)};
    const Field u = assemble_u(solve_f(Field(d.grid()), d, pp), d);
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!d.in_mask(i))
            continue;
        const cplx w = d.grid().center(i) - pp.z0;
        const double mod = std::exp(-5.0 * 2.0 * w.real() * w.imag());
        EXPECT_NEAR(std::abs(u[i] - std::exp(I * 5.0 * w * w)), 0.0, 1e-12 * mod);
    }
}

TEST(AssembleU, ConjugateVariantAtCentre)
{
    const Domain d = disk(64);
    const cplx z0 = d.grid().center(30, 35);
    BukhgeimOptions anti;
    anti.type = PhaseType::antiholomorphic;
    const BukhgeimSolution s = solve_f(bump_q(d.grid(), 2.0), d, {6.0, z0}, anti);
    EXPECT_EQ(assemble_u(s, d)(30, 35), s.f(30, 35));
}

TEST(AssembleU, NormGrowsAtMostExponentially)
{
    const Domain d = disk(128);
    const ConvolutionPlan plan(d.grid());
    const Field q = bump_q(d.grid());
    std::vector<double> taus{2, 4, 8, 16}, logs;
    for (double tau : taus) logs.push_back(std::log(w12_norm(assemble_u(solve_f(q, d, {tau, cplx(0.1, 0.2)}, plan), d), d)));
    // least-squares slope of log ||u|| against tau
    double mt = 0, ml = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        mt += taus[i] / taus.size();
        ml += logs[i] / taus.size();
    }
    for (std::size_t i = 0; i < taus.size(); ++i) {
        stt += (taus[i] - mt) * (taus[i] - mt);
        stl += (taus[i] - mt) * (logs[i] - ml);
    }
    EXPECT_LE(stl / stt, 1.05 * d.diameter() * d.diameter() * 2.0);
}

TEST(PdeResidual, FreePhaseTruncationOrder)
{
    std::vector<double> hs, rs;
    for (int n : {64, 128, 256}) {
        const Domain d = disk(n);
        rs.push_back(pde_residual(solve_f(Field(d.grid()), d, {8.0, cplx(0.1, 0.2)}), Field(d.grid()), d));
        hs.push_back(d.grid().spacing());
    }
    EXPECT_GE(testutil::loglog_slope(hs, rs), 1.6);
    // the factored form differentiates only f = 1
    const Domain d = disk(64);
    EXPECT_EQ(pde_residual(solve_f(Field(d.grid()), d, {8.0, 0.0}), Field(d.grid()), d, LaplacianForm::factored), 0.0);
}

// Away from the mask edge (where dbar f jumps) the factored residual converges at second order.
TEST(PdeResidual, FactoredConvergesOnFixedInterior)
{
    std::vector<double> hs, rs;
    for (int n : {128, 256, 512}) {
        const Domain d = disk(n);
        const Field q = bump_q(d.grid());
        rs.push_back(pde_residual(solve_f(q, d, {8.0, cplx(0.1, 0.2)}), q, d, LaplacianForm::factored, 0.2));
        hs.push_back(d.grid().spacing());
    }
    EXPECT_GE(testutil::loglog_slope(hs, rs), 1.5);
}

TEST(PdeResidual, TranslationEquivariant)
{
    const Grid g(1.2, 128);
    const double shift = 8 * g.spacing();
    const Domain d0(g, Disk{cplx(-0.1, 0.0), 0.8}), d1(g, Disk{cplx(-0.1 + shift, shift), 0.8});
    auto q_at = [&](cplx c) { return Field::from_function(g, [c](cplx z) { return 0.5 * testutil::bump(z, c, 0.5); }); };
    const Field q0 = q_at(cplx(0.0, -0.1)), q1 = q_at(cplx(shift, shift - 0.1));
    const double r0 = pde_residual(solve_f(q0, d0, {8.0, cplx(0.05, 0.1)}), q0, d0, LaplacianForm::factored);
    const double r1 = pde_residual(solve_f(q1, d1, {8.0, cplx(0.05 + shift, 0.1 + shift)}), q1, d1, LaplacianForm::factored);
    EXPECT_NEAR(r1, r0, 1e-6 * r0);
}

TEST(CarlemanSweep, BookkeepingAndLinearity)
{
    const Domain d = disk(64);
    const Field a(d.grid(), 1.0);
    Field a2 = a;
    a2 *= 2.0;
    const SweepRecord one = carleman_sweep(a, d, {4.0}, CarlemanMode::phased_cauchy);
    EXPECT_FALSE(one.series[0].fit.sufficient);
    const auto taus = geometric_taus(2, 64);
    const SweepRecord r1 = carleman_sweep(a, d, taus, CarlemanMode::phased_cauchy), r2 = carleman_sweep(a2, d, taus, CarlemanMode::phased_cauchy);
    ASSERT_EQ(r1.taus.size(), r2.taus.size());
    EXPECT_FALSE(r1.skipped.empty());
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t i = 0; i < r1.taus.size(); ++i) EXPECT_EQ(r2.series[s].values[i], 2.0 * r1.series[s].values[i]);
    EXPECT_THROW(carleman_sweep(a, d, {8.0, 4.0}, CarlemanMode::phased_cauchy), ConfigError);
}

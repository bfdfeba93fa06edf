#include <numbers>

#include <gtest/gtest.h>

#include <bklab/cauchy.hpp>
#include <bklab/lorentz.hpp>
#include <bklab/phase.hpp>

#include "dense_oracle.hpp"
#include "test_util.hpp"

using namespace bklab;
constexpr double pi = std::numbers::pi;

namespace {

double l2(const Field& f)
{
    double s = 0.0;
    for (auto v : f.values()) s += std::norm(v);
    return std::sqrt(s * f.grid().cell_area());
}

} // namespace

TEST(Cauchy, KernelOriginIsZeroAndMatchesDenseSum)
{
    std::mt19937_64 rng(1);
    Grid g(1.0, 32);
    ConvolutionPlan plan(g);
    Field delta(g);
    delta(16, 16) = 1.0;
    EXPECT_NEAR(std::abs(plan.cauchy(delta)(16, 16)), 0.0, 1e-14);
    Field f = testutil::random_field(g, rng);
    Field fast = plan.cauchy(f), slow = oracle::dense_cauchy(f);
    Field fastc = plan.conj_cauchy(f), slowc = oracle::dense_cauchy(f, true);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(std::abs(fast[i] - slow[i]), 0.0, 1e-11);
        EXPECT_NEAR(std::abs(fastc[i] - slowc[i]), 0.0, 1e-11);
    }
}

TEST(Cauchy, ZeroAndLinearity)
{
    std::mt19937_64 rng(2);
    Grid g(1.0, 64);
    ConvolutionPlan plan(g);
    EXPECT_EQ(plan.cauchy(Field(g)).sup_norm(), 0.0);
    Field f = testutil::random_field(g, rng), h = testutil::random_field(g, rng);
    const cplx a(0.3, -1.2), b(2.0, 0.7);
    Field lhs = plan.cauchy(f * a + h * b);
    Field rhs = plan.cauchy(f) * a + plan.cauchy(h) * b;
    EXPECT_LE((lhs - rhs).sup_norm(), 1e-12 * rhs.sup_norm());
}

TEST(Cauchy, UnitDiskClosedForm)
{
    Grid g(1.5, 256);
    const double h = g.spacing();
    Domain d(g, Disk{{0, 0}, 1.0});
    ConvolutionPlan plan(g);
    Field c = plan.cauchy(d.indicator());
    double err = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const cplx z = g.center(i);
        const cplx expect = std::abs(z) <= 1.0 ? std::conj(z) : 1.0 / z;
        err = std::max(err, std::abs(c[i] - expect));
    }
    EXPECT_LE(err, 10 * h * std::log(1 / h));
}

TEST(Cauchy, ConjugationSymmetryBitwise)
{
    std::mt19937_64 rng(3);
    Grid g(1.0, 32);
    ConvolutionPlan plan(g);
    Field f = testutil::random_field(g, rng);
    Field a = plan.conj_cauchy(f), b = plan.cauchy(f.conj()).conj();
    for (std::size_t i = 0; i < f.size(); ++i)
        EXPECT_EQ(a[i], b[i]);
}

TEST(Cauchy, TranslationEquivariance)
{
    Grid g(1.0, 64);
    ConvolutionPlan plan(g);
    Field f = Field::from_function(g, [](cplx z) { return testutil::bump(z, {0.1, 0.0}, 0.4); });
    Field s(g);
    for (int k = 0; k < 64; ++k)
        for (int j = 1; j < 64; ++j)
            s(j, k) = f(j - 1, k);
    Field cf = plan.cauchy(f), cs = plan.cauchy(s);
    for (int k = 0; k < 64; ++k)
        for (int j = 1; j < 64; ++j)
            EXPECT_NEAR(std::abs(cs(j, k) - cf(j - 1, k)), 0.0, 1e-13);
}

TEST(Cauchy, SupBoundByLorentz21)
{
    std::mt19937_64 rng(4);
    Grid g(1.0, 64);
    Domain d(g, Disk{{0, 0}, 0.8});
    ConvolutionPlan plan(g);
    for (int trial = 0; trial < 10; ++trial) {
        Field f = d.restrict(testutil::random_field(g, rng));
        EXPECT_LE(plan.cauchy(f).sup_norm(), 2.0 / std::sqrt(pi) * 1.05 * lorentz_norm(f, {2.0, 1.0, true}));
    }
}

TEST(Cauchy, RightInverseOrder)
{
    std::vector<double> hs, errs;
    for (int n : {64, 128, 256}) {
        Grid g(1.0, n);
        ConvolutionPlan plan(g);
        Field phi = Field::from_function(g, [](cplx z) { return testutil::bump(z, {0.05, -0.1}, 0.6); });
        Field r = wirtinger(plan.cauchy(phi), Wirtinger::delbar, DiffMethod::centered) - phi;
        hs.push_back(g.spacing());
        errs.push_back(r.sup_norm());
    }
    EXPECT_GE(testutil::loglog_slope(hs, errs), 0.9);
}

TEST(Wirtinger, Polynomials)
{
    Grid g(1.0, 64);
    Field zb = Field::from_function(g, [](cplx z) { return std::conj(z); });
    Field z2 = Field::from_function(g, [](cplx z) { return z * z; });
    Field a = wirtinger(zb, Wirtinger::delbar, DiffMethod::centered);
    Field b = wirtinger(zb, Wirtinger::del, DiffMethod::centered);
    Field c = wirtinger(z2, Wirtinger::del, DiffMethod::centered);
    for (int k = 1; k < 63; ++k)
        for (int j = 1; j < 63; ++j) {
            EXPECT_NEAR(std::abs(a(j, k) - 1.0), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(b(j, k)), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(c(j, k) - 2.0 * g.center(j, k)), 0.0, 1e-12);
        }
}

TEST(Wirtinger, ChainRuleOnPhaseSpectral)
{
    // Spectral differentiation of e^{i tau R} w with a Gaussian window w (zero to machine precision at the
    // grid edge), compared with the chain rule d-bar e^{i tau R} = 2 i tau conj(z - z0) e^{i tau R}.
    const double tau = 5.0;
    const cplx z0(0.2, -0.1);
    Grid g(3.0, 256);
    auto w = [](cplx z) { return std::exp(-4.0 * std::norm(z)); };
    Field f = Field::from_function(g, [&](cplx z) { return std::polar(1.0, tau * phase_R(z, z0)) * w(z); });
    Field d = wirtinger(f, Wirtinger::delbar, DiffMethod::spectral);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const cplx z = g.center(i);
        if (std::abs(z) > 0.8)
            continue;
        const cplx expect = std::polar(1.0, tau * phase_R(z, z0)) * w(z) * (2.0 * cplx(0, 1) * tau * std::conj(z - z0) - 4.0 * z);
        ASSERT_LE(std::abs(d[i] - expect), 1e-6 * std::abs(expect)) << z;
    }
}

TEST(Beurling, UnitDisk)
{
    Grid g(1.5, 256);
    const double h = g.spacing();
    Domain dom(g, Disk{{0, 0}, 1.0});
    ConvolutionPlan plan(g);
    Field b = plan.beurling(dom.indicator());
    double err = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const cplx z = g.center(i);
        if (std::abs(std::abs(z) - 1.0) < 3 * h)
            continue;
        const cplx expect = std::abs(z) < 1.0 ? cplx(0.0) : -1.0 / (z * z);
        err = std::max(err, std::abs(b[i] - expect));
    }
    EXPECT_LE(err, 10 * h * std::log(1 / h));
    EXPECT_EQ(plan.beurling(Field(g)).sup_norm(), 0.0);
}

TEST(Beurling, NearIsometry)
{
    Grid g(3.0, 128);
    ConvolutionPlan plan(g);
    Field q = Field::from_function(g, [](cplx z) { return std::exp(-2.0 * std::norm(z - cplx(0.2, 0.1))); });
    const double ratio = l2(plan.beurling(q)) / l2(q);
    EXPECT_GE(ratio, 0.9);
    EXPECT_LE(ratio, 1.1);
}

TEST(BoundaryCauchy, ConstantTraceOnCircle)
{
    Grid g(1.5, 256);
    const double h = g.spacing();
    Domain d(g, Disk{{0, 0}, 1.0});
    auto bc = boundary_cauchy(d.sample([](cplx) { return cplx(1.0); }), d);
    double err = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        const double r = std::abs(g.center(i));
        if (r < 1 - 2 * h)
            err = std::max(err, std::abs(bc.value[i] + 1.0));
        else if (r > 1 + 2 * h)
            err = std::max(err, std::abs(bc.value[i]));
        if (std::abs(d.signed_distance(i)) <= h)
            EXPECT_EQ(bc.evaluated[i], 0);
    }
    EXPECT_LE(err, 1e-3);
    EXPECT_EQ(boundary_cauchy(BoundaryTrace(d.nodes().size(), 0.0), d).value.sup_norm(), 0.0);
    EXPECT_THROW(boundary_cauchy(BoundaryTrace{}, d), ConfigError);
}

TEST(BoundaryCauchy, WeakNormBound)
{
    std::mt19937_64 rng(6);
    Grid g(1.5, 64);
    Domain d(g, Disk{{0, 0}, 1.0});
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
        BoundaryTrace t(d.nodes().size());
        double l1 = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = cplx(nd(rng), nd(rng));
            l1 += std::abs(t[i]) * d.nodes()[i].weight;
        }
        auto bc = boundary_cauchy(t, d);
        EXPECT_LE(lorentz_norm(bc.value, {2.0, kInf, true}), std::pow(pi, -1.5) * l1);
    }
}

TEST(Ibp, Identities)
{
    Grid g(1.5, 256);
    const double h = g.spacing();
    Domain d(g, Disk{{0, 0}, 1.0});
    ConvolutionPlan plan(g);
    auto zero = [](cplx) { return cplx(0.0); };
    EXPECT_LE(ibp_check(d, plan, [](cplx) { return cplx(1.0); }, zero), 1e-2);
    EXPECT_LE(ibp_check(d, plan, [](cplx z) { return std::conj(z); }, [](cplx) { return cplx(1.0); }), 10 * h * std::log(1 / h));
    EXPECT_EQ(ibp_check(d, plan, zero, zero), 0.0);
}

#include <gtest/gtest.h>

#include <bklab/cutoffs.hpp>

using namespace bklab;

namespace {

const LorentzIndex kL21{2.0, 1.0, true};

Domain unit_disk(int n = 256) { return Domain(Grid(1.2, n), Disk{0.0, 1.0}); }

Domain unit_square(int n = 256)
{
    return Domain(Grid(1.2, n), Polygon{{cplx(-1, -1), cplx(1, -1), cplx(1, 1), cplx(-1, 1)}});
}

Domain triangle(int n = 256)
{
    return Domain(Grid(1.2, n), Polygon{{cplx(-1, -0.8), cplx(1, -0.8), cplx(0.1, 1.0)}});
}

double masked_sup(const Field& f, const Domain& d)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (d.in_mask(i))
            s = std::max(s, std::abs(f[i]));
    return s;
}

} // namespace

TEST(CutoffH1, DefectL1WithinStatedBound)
{
    const Domain d = unit_disk();
    for (double tau : {4.0, 16.0, 100.0}) {
        const double bound = std::numbers::pi / (3.0 * tau);
        // ball well inside: the bound is attained
        EXPECT_NEAR(h1_defect_l1_exact(d, cplx(0.1, 0.2), tau), bound, 1e-14 * bound);
        // ball cut by the boundary: strictly smaller
        const double cut = h1_defect_l1_exact(d, cplx(0.98, 0.0), tau);
        EXPECT_LT(cut, bound);
        EXPECT_GT(cut, 0.2 * bound);
        const CutoffBundle b = build_h1(d.grid(), cplx(0.1, 0.2), tau);
        EXPECT_NEAR(l1_over(b.defect, d), bound, 0.01 * bound);
    }
}

TEST(CutoffH1, DefectOutsideDomainVanishes)
{
    const Domain d = unit_disk();
    EXPECT_EQ(h1_defect_l1_exact(d, cplx(1.15, 0.0), 100.0), 0.0);
}

TEST(CutoffH1, CombinedBound)
{
    for (const Domain& d : {unit_disk(), unit_square(), triangle()}) {
        const double m = d.mask_measure();
        for (double tau : {1.0, 10.0, 100.0}) {
            const cplx z0(0.05, -0.1);
            const CutoffBundle b = build_h1(d.grid(), z0, tau);
            const double lhs = tau * h1_defect_l1_exact(d, z0, tau) + w11_norm(b, d);
            const double rhs = 2.0 * std::numbers::pi *
                               (std::sqrt(m / std::numbers::pi) + 2.0 + std::max(0.0, std::log(std::sqrt(m * tau / std::numbers::pi))));
            EXPECT_LE(lhs, rhs) << tau;
        }
    }
}

TEST(CutoffH1, OuterBranchIsExactInverse)
{
    const Grid g(1.2, 64);
    const double tau = 9.0, eps = 1.0 / 3.0;
    const cplx z0 = g.center(40, 30) - 2.0 * eps;
    const CutoffBundle b = build_h1(g, z0, tau);
    const std::size_t i = g.index(40, 30);
    EXPECT_NEAR(std::abs(std::conj(g.center(i) - z0) * b.h[i] - 1.0), 0.0, 1e-15);
    EXPECT_EQ(b.defect[i], cplx(0.0));
    EXPECT_EQ(b.dbar_h[i], -1.0 / (std::conj(g.center(i) - z0) * std::conj(g.center(i) - z0)));
}

TEST(CutoffH1, RejectsSmallTau)
{
    EXPECT_THROW(build_h1(Grid(1.0, 16), 0.0, 0.5), ConfigError);
}

TEST(CutoffH2, SupBoundAndExactZeros)
{
    const Domain d = unit_disk();
    const cplx z0(0.1, 0.05);
    for (auto [eps, delta] : std::vector<std::pair<double, double>>{{0.05, 0.1}, {0.1, 0.2}, {0.2, 0.3}}) {
        const CutoffBundle b = build_h2(d, z0, eps, delta);
        EXPECT_LE(masked_sup(b.h, d), 1.0 / delta);
        for (std::size_t i = 0; i < b.h.size(); ++i) {
            const bool zone = !d.in_mask(i) || d.signed_distance(i) < eps || std::abs(d.grid().center(i) - z0) < delta;
            if (zone) {
                EXPECT_EQ(b.h[i], cplx(0.0));
                EXPECT_EQ(b.dbar_h[i], cplx(0.0));
            }
        }
    }
}

TEST(CutoffH2, MollifierDerivativeBound)
{
    const Domain d = unit_disk();
    for (double eps : {0.05, 0.1, 0.2}) {
        const MollifiedCutoff c = mollify(
            d.grid(), [&](cplx z) { return d.contains(z) && d.distance_to_boundary(z) > 2.0 * eps; }, eps);
        EXPECT_LE(c.dbar_chi.sup_norm(), 1.05 * mollifier_dbar_l1() / eps) << eps;
        EXPECT_GT(c.dbar_chi.sup_norm(), 0.25 * mollifier_dbar_l1() / eps);
        EXPECT_NEAR(masked_sup(c.chi, d), 1.0, 1e-10);
    }
}

// C fitted at N = 256 from (eps, delta) in {(.05,.1), (.1,.2), (.2,.3), (.05,.3), (.1,.1)} and frozen.
TEST(CutoffH2, DefectNormCalibrated)
{
    const std::vector<std::pair<Domain, double>> cases{{unit_disk(), 14.0}, {unit_square(), 15.6}};
    for (const auto& [d, c_omega] : cases)
        for (auto [eps, delta] : std::vector<std::pair<double, double>>{{0.06, 0.12}, {0.15, 0.25}, {0.08, 0.2}}) {
            const CutoffBundle b = build_h2(d, cplx(0.1, 0.05), eps, delta);
            EXPECT_LE(lorentz_norm(b.defect, kL21, &d), c_omega * std::sqrt(delta * delta + eps));
        }
}

TEST(CutoffH2, RejectsUnresolvedScales)
{
    const Domain d = unit_disk(64);
    EXPECT_THROW(build_h2(d, 0.0, 0.01, 0.2), ConfigError);
    EXPECT_THROW(build_h2(d, 0.0, 0.2, -1.0), ConfigError);
    EXPECT_THROW(tune_h2(d, 0.0, 1000.0), ConfigError);
    EXPECT_THROW(tune_h2(d, 0.0, 0.5), ConfigError);
}

TEST(CutoffH2, TuningArithmetic)
{
    const Domain d = unit_disk(64);
    const CutoffBundle b = tune_h2(d, 0.0, 1.0);
    EXPECT_EQ(b.eps, 1.0);
    EXPECT_EQ(b.delta, 1.0);
    const CutoffBundle b8 = tune_h2(d, 0.0, 8.0);
    EXPECT_NEAR(b8.eps, 0.25, 1e-15);
    EXPECT_NEAR(b8.delta, 0.5, 1e-15);
}

TEST(CutoffH2, SupportGrowsWithTau)
{
    const Domain d = unit_disk();
    std::optional<CutoffBundle> prev;
    for (double tau : {4.0, 8.0, 16.0, 32.0, 64.0}) {
        CutoffBundle b = tune_h2(d, cplx(0.2, -0.1), tau);
        if (prev)
            for (std::size_t i = 0; i < b.h.size(); ++i)
                if (prev->h[i] != cplx(0.0))
                    EXPECT_NE(b.h[i], cplx(0.0));
        prev = std::move(b);
    }
}

TEST(AnnulusNorms, KernelBoundsOverRadiusSweep)
{
    for (const Domain& d : {unit_disk(), unit_square()}) {
        const double m = d.mask_measure();
        const cplx z0(0.1, 0.05);
        // radii from 32h; the bounds are sharp as rho -> 0, where the cell sampling of the inner circle
        // moves the discrete norm by O(h/rho) to either side of them (see TightForSmallRadius)
        for (int k = 0; k < 10; ++k) {
            const double rho = 0.3 * std::pow(1.25, k);
            const AnnulusNorms a = annulus_kernel_norms(d, z0, rho);
            const double x = 2.0 * m / (std::numbers::pi * rho * rho) + 1.0;
            EXPECT_LE(a.inverse, 2.0 * std::sqrt(std::numbers::pi) * std::log(x + std::sqrt(x * x - 1.0))) << rho;
            EXPECT_LE(a.inverse_square, 4.0 * std::sqrt(std::numbers::pi) / rho * std::atan(std::sqrt(m / (std::numbers::pi * rho * rho)))) << rho;
        }
    }
}

TEST(AnnulusNorms, TightForSmallRadius)
{
    const Domain d = unit_disk();
    const double m = d.mask_measure();
    for (double rho : {4.0 * d.grid().spacing(), 8.0 * d.grid().spacing()}) {
        const AnnulusNorms a = annulus_kernel_norms(d, 0.0, rho);
        const double x = 2.0 * m / (std::numbers::pi * rho * rho) + 1.0;
        EXPECT_NEAR(a.inverse / (2.0 * std::sqrt(std::numbers::pi) * std::log(x + std::sqrt(x * x - 1.0))), 1.0, 0.05);
        EXPECT_NEAR(a.inverse_square / (4.0 * std::sqrt(std::numbers::pi) / rho * std::atan(std::sqrt(m / (std::numbers::pi * rho * rho)))), 1.0, 0.05);
    }
}

TEST(AnnulusNorms, EmptyRegionAndErrors)
{
    const Domain d = unit_disk(64);
    const AnnulusNorms a = annulus_kernel_norms(d, cplx(0.3, 0.0), d.diameter() + 0.3);
    EXPECT_EQ(a.inverse, 0.0);
    EXPECT_EQ(a.inverse_square, 0.0);
    EXPECT_THROW(annulus_kernel_norms(d, 0.0, 0.0), ConfigError);
}

// Radial non-increasing integrands: the integral over the domain minus B(0, eps) is at most the integral over
// the annulus of equal measure around the ball.
TEST(ShapeToAnnulus, AnnulusMaximises)
{
    const double eps = 0.1;
    const std::vector<std::function<double(double)>> fs{[](double r) { return 1.0 / r; }, [](double r) { return std::exp(-r); },
                                                        [](double r) { return 1.0 / (1.0 + r * r); }};
    // antiderivatives of 2 pi r f(r)
    const std::vector<std::function<double(double)>> Fs{[](double r) { return 2.0 * std::numbers::pi * r; },
                                                        [](double r) { return -2.0 * std::numbers::pi * (r + 1.0) * std::exp(-r); },
                                                        [](double r) { return std::numbers::pi * std::log(1.0 + r * r); }};
    const Domain shifted(Grid(1.2, 256), Disk{cplx(0.15, -0.1), 0.9});
    for (const Domain& d : {shifted, unit_square(), triangle()}) {
        const Grid& g = d.grid();
        const double outer = std::sqrt(d.mask_measure() / std::numbers::pi + eps * eps);
        for (std::size_t k = 0; k < fs.size(); ++k) {
            double lhs = 0.0;
            for (std::size_t i = 0; i < g.cells(); ++i) {
                const double r = std::abs(g.center(i));
                if (d.in_mask(i) && r >= eps)
                    lhs += fs[k](r) * g.cell_area();
            }
            EXPECT_LE(lhs, Fs[k](outer) - Fs[k](eps)) << k;
        }
    }
}

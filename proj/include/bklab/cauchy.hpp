#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "difference.hpp"
#include "domain.hpp"
#include "fft.hpp"
#include "parallel.hpp"
#include "potentials.hpp"

namespace bklab {

// Zero-padded FFT convolution with the kernel 1/(pi z) sampled at cell-centre displacements.
// The origin sample is 0: the average of 1/(pi z) over the centred cell vanishes by odd symmetry.
class ConvolutionPlan {
public:
    explicit ConvolutionPlan(const Grid& g) : grid_(g), m_(2 * g.size())
    {
        const double h = g.spacing();
        const int n = g.size();
        kernel_hat_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int b = 0; b < m_; ++b) {
            const int dy = b < n ? b : b - m_;
            for (int a = 0; a < m_; ++a) {
                const int dx = a < n ? a : a - m_;
                if ((dx == 0 && dy == 0) || a == n || b == n)
                    continue;
                kernel_hat_[static_cast<std::size_t>(b) * m_ + a] = 1.0 / (std::numbers::pi * h * cplx(dx, dy));
            }
        }
        fft2(kernel_hat_, m_);
        // fold in the cell measure and the inverse-transform normalisation
        const double s = g.cell_area() / (static_cast<double>(m_) * m_);
        for (auto& v : kernel_hat_) v *= s;
    }

    const Grid& grid() const { return grid_; }
    int padded_size() const { return m_; }

    Field cauchy(const Field& f) const
    {
        auto buf = pad_forward(f);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= kernel_hat_[i];
        return backward_crop(buf);
    }

    // Convolution with 1/(pi conj z), defined as conj(C(conj f)).
    Field conj_cauchy(const Field& f) const { return cauchy(f.conj()).conj(); }

    // Pi f = d(C f), the Wirtinger derivative taken spectrally on the padded grid.
    Field beurling(const Field& f) const
    {
        auto buf = pad_forward(f);
        const double h = grid_.spacing();
        for (int b = 0; b < m_; ++b) {
            const double ky = b == m_ / 2 ? 0.0 : frequency(b, m_, h);
            for (int a = 0; a < m_; ++a) {
                const double kx = a == m_ / 2 ? 0.0 : frequency(a, m_, h);
                const std::size_t i = static_cast<std::size_t>(b) * m_ + a;
                buf[i] *= kernel_hat_[i] * cplx(ky, kx) * 0.5; // symbol of d is (i xi_1 + xi_2)/2
            }
        }
        return backward_crop(buf);
    }

private:
    std::vector<cplx> pad_forward(const Field& f) const
    {
        require_same_grid(f.grid(), grid_, "Cauchy transform");
        const int n = grid_.size();
        std::vector<cplx> buf(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                buf[static_cast<std::size_t>(k) * m_ + j] = f(j, k);
        fft2(buf, m_);
        return buf;
    }

    Field backward_crop(std::vector<cplx>& buf) const
    {
        auto* raw = reinterpret_cast<fftw_complex*>(buf.data());
        fftw_execute_dft(detail::plans_for(m_).backward, raw, raw);
        const int n = grid_.size();
        Field out(grid_);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                out(j, k) = buf[static_cast<std::size_t>(k) * m_ + j];
        return out;
    }

    Grid grid_;
    int m_;
    std::vector<cplx> kernel_hat_;
};

inline Field cauchy(const Field& f, const ConvolutionPlan& plan) { return plan.cauchy(f); }
inline Field conj_cauchy(const Field& f, const ConvolutionPlan& plan) { return plan.conj_cauchy(f); }
inline Field beurling(const Field& f, const ConvolutionPlan& plan) { return plan.beurling(f); }

enum class Wirtinger { del, delbar };
enum class DiffMethod { spectral, centered };

// del = (d_x - i d_y)/2, delbar = (d_x + i d_y)/2. Spectral: periodic on the grid. Centered: second-order
// differences, one-sided at grid or mask edges.
inline Field wirtinger(const Field& f, Wirtinger which, DiffMethod method = DiffMethod::spectral, const Domain* mask = nullptr)
{
    const Grid& g = f.grid();
    const double sgn = which == Wirtinger::del ? -1.0 : 1.0;
    if (method == DiffMethod::centered) {
        const cplx I(0.0, 1.0);
        Field out(g);
        for (int k = 0; k < g.size(); ++k)
            for (int j = 0; j < g.size(); ++j) {
                if (mask && !mask->in_mask(j, k))
                    continue;
                out(j, k) = 0.5 * (detail::axis_derivative(f, mask, j, k, 1, 0) + sgn * I * detail::axis_derivative(f, mask, j, k, 0, 1));
            }
        return out;
    }
    const int n = g.size();
    std::vector<cplx> buf(f.values().begin(), f.values().end());
    fft2(buf, n);
    for (int k = 0; k < n; ++k) {
        const double ky = k == n / 2 ? 0.0 : frequency(k, n, g.spacing());
        for (int j = 0; j < n; ++j) {
            const double kx = j == n / 2 ? 0.0 : frequency(j, n, g.spacing());
            // (i kx + sgn * i * i ky)/2
            buf[static_cast<std::size_t>(k) * n + j] *= 0.5 * cplx(-sgn * ky, kx);
        }
    }
    ifft2(buf, n);
    Field out(g);
    std::copy(buf.begin(), buf.end(), out.values().begin());
    return out;
}

struct BoundaryCauchy {
    Field value;
    std::vector<std::uint8_t> evaluated; // 0 for cells within h of the boundary
};

// (1/2pi) sum over nodes of w g eta / (z - z'), skipping cells within h of the polyline.
inline BoundaryCauchy boundary_cauchy(const BoundaryTrace& g, const Domain& dom)
{
    const auto& nodes = dom.nodes();
    if (g.empty())
        throw ConfigError("boundary_cauchy needs a nonempty trace");
    if (g.size() != nodes.size())
        throw ConfigError("trace length does not match the domain's boundary nodes");
    const Grid& grid = dom.grid();
    BoundaryCauchy out{Field(grid), std::vector<std::uint8_t>(grid.cells(), 0)};
    std::vector<cplx> weighted(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        weighted[i] = nodes[i].weight * g[i] * nodes[i].eta / (2.0 * std::numbers::pi);
    const double h = grid.spacing();
    const int n = grid.size();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        for (int j = 0; j < n; ++j) {
            const std::size_t idx = grid.index(j, static_cast<int>(k));
            if (std::abs(dom.signed_distance(idx)) <= h)
                continue;
            const cplx z = grid.center(idx);
            cplx s = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                s += weighted[i] / (z - nodes[i].point);
            out.value[idx] = s;
            out.evaluated[idx] = 1;
        }
    });
    return out;
}

// sup over cells at distance > 3h inside the boundary of |C(chi df/dzbar) - chi f - boundary_cauchy(Tr f)|.
inline double ibp_check(const Domain& dom, const ConvolutionPlan& plan, const std::function<cplx(cplx)>& f,
                        const std::function<cplx(cplx)>& dbar_f)
{
    const Grid& g = dom.grid();
    require_same_grid(g, plan.grid(), "ibp_check");
    const Field lhs = plan.cauchy(dom.restrict(Field::from_function(g, dbar_f)));
    const BoundaryCauchy bc = boundary_cauchy(dom.sample(f), dom);
    double r = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        if (dom.signed_distance(i) <= 3.0 * g.spacing())
            continue;
        r = std::max(r, std::abs(lhs[i] - f(g.center(i)) - bc.value[i]));
    }
    return r;
}

struct CauchySelftestRow {
    int n = 0;
    double h = 0.0;
    double inverse_error = 0.0; // ||dbar C phi - phi||_inf, centered dbar, bump phi on [-1, 1]^2
    double disk_error = 0.0;    // sup |C chi_B - (conj z inside, 1/z outside)| on [-1.5, 1.5]^2
    double disk_bound = 0.0;    // 10 h ln(1/h)
};

inline std::vector<CauchySelftestRow> cauchy_selftest(const std::vector<int>& sizes)
{
    std::vector<CauchySelftestRow> rows;
    for (int n : sizes) {
        CauchySelftestRow r{n};
        {
            const Grid g(1.0, n);
            const ConvolutionPlan plan(g);
            const Field phi = bump_field(g, 1.0, cplx(0.05, -0.1), 0.6);
            Field d = wirtinger(plan.cauchy(phi), Wirtinger::delbar, DiffMethod::centered);
            d -= phi;
            r.h = g.spacing();
            r.inverse_error = d.sup_norm();
        }
        {
            const Grid g(1.5, n);
            const Domain disk(g, Disk{{0.0, 0.0}, 1.0});
            const Field c = ConvolutionPlan(g).cauchy(disk.indicator());
            for (std::size_t i = 0; i < g.cells(); ++i) {
                const cplx z = g.center(i);
                const cplx expect = std::abs(z) <= 1.0 ? std::conj(z) : 1.0 / z;
                r.disk_error = std::max(r.disk_error, std::abs(c[i] - expect));
            }
            r.disk_bound = 10.0 * g.spacing() * std::log(1.0 / g.spacing());
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace bklab

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "field.hpp"

namespace bklab {

struct Disk {
    cplx center{0.0, 0.0};
    double radius = 1.0;
};

struct Polygon {
    std::vector<cplx> vertices;
};

using Shape = std::variant<Disk, Polygon>;

// Quadrature node on the boundary polyline. eta = nu_1 + i nu_2 is the outward unit normal.
struct BoundaryNode {
    cplx point;
    cplx eta;
    double weight;    // arclength weight
    double arclength; // position along the polyline from vertex 0
};

// Values at the quadrature nodes of one domain, in node order.
using BoundaryTrace = std::vector<cplx>;

namespace detail {

inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline double point_segment_distance(cplx p, cplx a, cplx b)
{
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0.0 ? ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

// Parameter s in [0,1] along p->q where the segment a->b is crossed, if any.
inline std::optional<double> segment_hit(cplx p, cplx q, cplx a, cplx b)
{
    const cplx r = q - p;
    const cplx s = b - a;
    const double den = cross(r, s);
    if (den == 0.0)
        return std::nullopt;
    const double t = cross(a - p, s) / den;
    const double u = cross(a - p, r) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0)
        return std::nullopt;
    return t;
}

} // namespace detail

// A disk or simple polygon discretised on a Grid: cell mask, positively oriented boundary polyline,
// boundary quadrature nodes, and the exact signed distance from each cell centre to the polyline.
class Domain {
public:
    Domain(const Grid& grid, Shape shape) : grid_(grid), shape_(std::move(shape))
    {
        build_polyline();
        build_nodes();
        build_cells();
    }

    const Grid& grid() const { return grid_; }
    const Shape& shape() const { return shape_; }
    bool is_disk() const { return std::holds_alternative<Disk>(shape_); }
    const std::vector<cplx>& polyline() const { return verts_; }
    const std::vector<BoundaryNode>& nodes() const { return nodes_; }
    double perimeter() const { return perimeter_; }
    double polyline_area() const { return area_; }
    double diameter() const { return diameter_; }

    bool in_mask(std::size_t idx) const { return mask_[idx] != 0; }
    bool in_mask(int j, int k) const
    {
        const int n = grid_.size();
        return j >= 0 && k >= 0 && j < n && k < n && mask_[grid_.index(j, k)] != 0;
    }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    std::size_t mask_count() const { return mask_count_; }
    double mask_measure() const { return static_cast<double>(mask_count_) * grid_.cell_area(); }

    // Positive inside, negative outside.
    double signed_distance(std::size_t idx) const { return sdist_[idx]; }

    bool contains(cplx z) const
    {
        if (const auto* d = std::get_if<Disk>(&shape_)) {
            const int m = static_cast<int>(verts_.size());
            const int s = sector(z, d->center);
            return detail::cross(verts_[(s + 1) % m] - verts_[s], z - verts_[s]) > 0.0;
        }
        bool inside = false;
        const std::size_t m = verts_.size();
        for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
            const cplx a = verts_[i], b = verts_[j];
            if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
                const double xc = a.real() + (z.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
                if (z.real() < xc)
                    inside = !inside;
            }
        }
        return inside;
    }

    double distance_to_boundary(cplx z) const
    {
        double best = std::numeric_limits<double>::infinity();
        for_candidate_segments(z, z, [&](std::size_t i) {
            best = std::min(best, detail::point_segment_distance(z, verts_[i], verts_[(i + 1) % verts_.size()]));
        });
        return best;
    }

    // First crossing of the polyline along p -> q, as a fraction of |q - p|.
    std::optional<double> first_hit(cplx p, cplx q) const
    {
        std::optional<double> best;
        for_candidate_segments(p, q, [&](std::size_t i) {
            if (auto t = detail::segment_hit(p, q, verts_[i], verts_[(i + 1) % verts_.size()]))
                if (!best || *t < *best)
                    best = t;
        });
        return best;
    }

    // All crossings of the polyline along p -> q, sorted, as fractions of |q - p|.
    std::vector<double> all_hits(cplx p, cplx q) const
    {
        std::vector<double> ts;
        for_candidate_segments(p, q, [&](std::size_t i) {
            if (auto t = detail::segment_hit(p, q, verts_[i], verts_[(i + 1) % verts_.size()]))
                ts.push_back(*t);
        });
        std::sort(ts.begin(), ts.end());
        return ts;
    }

    // Arclength position (from vertex 0) of the polyline point nearest to p.
    double arclength_at(cplx p) const
    {
        double best = std::numeric_limits<double>::infinity(), pos = 0.0;
        const std::size_t m = verts_.size();
        for_candidate_segments(p, p, [&](std::size_t i) {
            const cplx a = verts_[i], b = verts_[(i + 1) % m];
            const double len2 = std::norm(b - a);
            const double t = std::clamp(((p - a) * std::conj(b - a)).real() / len2, 0.0, 1.0);
            const double d = std::abs(p - (a + t * (b - a)));
            if (d < best) {
                best = d;
                pos = cum_[i] + t * std::sqrt(len2);
            }
        });
        return pos;
    }

    // Multiply a field by the characteristic function of the mask.
    Field restrict(Field f) const
    {
        require_same_grid(f.grid(), grid_, "mask restriction");
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!mask_[i])
                f[i] = 0.0;
        return f;
    }

    Field indicator() const
    {
        Field f(grid_);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = mask_[i] ? 1.0 : 0.0;
        return f;
    }

    BoundaryTrace sample(const std::function<cplx(cplx)>& fn) const
    {
        BoundaryTrace t(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            t[i] = fn(nodes_[i].point);
        return t;
    }

private:
    int sector(cplx z, cplx c) const
    {
        const int m = static_cast<int>(verts_.size());
        double a = std::arg(z - c);
        if (a < 0.0)
            a += 2.0 * std::numbers::pi;
        int s = static_cast<int>(std::floor(a / (2.0 * std::numbers::pi) * m));
        return std::clamp(s, 0, m - 1);
    }

    // Calls fn(i) for every segment index i that can matter for points on the segment p -> q.
    template <class Fn>
    void for_candidate_segments(cplx p, cplx q, Fn&& fn) const
    {
        const std::size_t m = verts_.size();
        if (const auto* d = std::get_if<Disk>(&shape_)) {
            const int sp = sector(p, d->center);
            const int sq = sector(q, d->center);
            int span = std::abs(sq - sp);
            int lo = std::min(sp, sq);
            if (span > static_cast<int>(m) / 2) { // wraps through angle 0
                span = static_cast<int>(m) - span;
                lo = std::max(sp, sq);
            }
            for (int o = -1; o <= span + 1; ++o)
                fn(static_cast<std::size_t>(((lo + o) % static_cast<int>(m) + static_cast<int>(m)) % static_cast<int>(m)));
            return;
        }
        for (std::size_t i = 0; i < m; ++i)
            fn(i);
    }

    std::size_t node_target(double perimeter) const
    {
        return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(8.0 * perimeter / grid_.spacing())));
    }

    void build_polyline()
    {
        const double lim = grid_.half_width();
        auto inside_square = [&](cplx z) { return std::abs(z.real()) < lim && std::abs(z.imag()) < lim; };
        if (const auto* d = std::get_if<Disk>(&shape_)) {
            if (!(d->radius > 0.0))
                throw ConfigError("disk radius must be positive");
            if (std::abs(d->center.real()) + d->radius >= lim || std::abs(d->center.imag()) + d->radius >= lim)
                throw ConfigError("disk exits the grid square");
            const std::size_t m = node_target(2.0 * std::numbers::pi * d->radius);
            verts_.resize(m);
            for (std::size_t i = 0; i < m; ++i)
                verts_[i] = d->center + std::polar(d->radius, 2.0 * std::numbers::pi * static_cast<double>(i) / m);
            diameter_ = 2.0 * d->radius;
        } else {
            verts_ = std::get<Polygon>(shape_).vertices;
            if (verts_.size() < 3)
                throw ConfigError("polygon needs at least three vertices");
            for (auto v : verts_)
                if (!inside_square(v))
                    throw ConfigError("polygon exits the grid square");
            double a = 0.0;
            for (std::size_t i = 0; i < verts_.size(); ++i)
                a += detail::cross(verts_[i], verts_[(i + 1) % verts_.size()]);
            if (std::abs(a) < 1e-14)
                throw ConfigError("degenerate polygon (zero area)");
            if (a < 0.0)
                std::reverse(verts_.begin(), verts_.end());
            const std::size_t m = verts_.size();
            for (std::size_t i = 0; i < m; ++i) {
                if (verts_[i] == verts_[(i + 1) % m])
                    throw ConfigError("degenerate polygon (repeated vertex)");
                for (std::size_t j = i + 2; j < m; ++j) {
                    if (i == 0 && j == m - 1)
                        continue;
                    if (detail::segment_hit(verts_[i], verts_[i + 1], verts_[j], verts_[(j + 1) % m]))
                        throw ConfigError("polygon is not simple");
                }
            }
            for (auto a1 : verts_)
                for (auto b1 : verts_)
                    diameter_ = std::max(diameter_, std::abs(a1 - b1));
        }
        const std::size_t m = verts_.size();
        perimeter_ = 0.0;
        area_ = 0.0;
        cum_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            cum_[i] = perimeter_;
            perimeter_ += std::abs(verts_[(i + 1) % m] - verts_[i]);
            area_ += 0.5 * detail::cross(verts_[i], verts_[(i + 1) % m]);
        }
    }

    void build_nodes()
    {
        const std::size_t m = verts_.size();
        if (const auto* d = std::get_if<Disk>(&shape_)) {
            // Trapezoid rule on the inscribed polygon: nodes at its vertices, which lie on the circle.
            const double w = perimeter_ / static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) {
                const cplx eta = (verts_[i] - d->center) / d->radius;
                nodes_.push_back({verts_[i], eta, w, w * static_cast<double>(i)});
            }
            return;
        }
        // Midpoint rule on each edge, subdivided in proportion to its length.
        const double target = static_cast<double>(node_target(perimeter_));
        double s0 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const cplx a = verts_[i], b = verts_[(i + 1) % m];
            const double len = std::abs(b - a);
            const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(target * len / perimeter_)));
            const cplx t = (b - a) / len;
            const cplx eta = -cplx(0.0, 1.0) * t; // tangent rotated clockwise: outward for CCW orientation
            const double w = len / static_cast<double>(pieces);
            for (std::size_t p = 0; p < pieces; ++p) {
                const double s = (static_cast<double>(p) + 0.5) * w;
                nodes_.push_back({a + s * t, eta, w, s0 + s});
            }
            s0 += len;
        }
    }

    void build_cells()
    {
        const std::size_t n = grid_.cells();
        mask_.assign(n, 0);
        sdist_.assign(n, 0.0);
        mask_count_ = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx z = grid_.center(i);
            const bool in = contains(z);
            const double d = distance_to_boundary(z);
            mask_[i] = in ? 1 : 0;
            sdist_[i] = in ? d : -d;
            mask_count_ += in;
        }
        if (mask_count_ == 0)
            throw ConfigError("domain covers no grid cell");
    }

    Grid grid_;
    Shape shape_;
    std::vector<cplx> verts_;
    std::vector<double> cum_; // arclength at each vertex
    std::vector<BoundaryNode> nodes_;
    std::vector<std::uint8_t> mask_;
    std::vector<double> sdist_;
    std::size_t mask_count_ = 0;
    double perimeter_ = 0.0;
    double area_ = 0.0;
    double diameter_ = 0.0;
};

inline Domain make_domain(const Grid& grid, Shape shape) { return Domain(grid, std::move(shape)); }

struct Belt {
    std::vector<std::uint8_t> mask;
    double measure = 0.0;
};

// Masked cells within distance eps of the boundary polyline.
inline Belt boundary_belt(const Domain& dom, double eps)
{
    if (eps < 0.0)
        throw ConfigError("belt width must be nonnegative");
    Belt b;
    b.mask.assign(dom.grid().cells(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < b.mask.size(); ++i) {
        if (dom.in_mask(i) && dom.signed_distance(i) < eps) {
            b.mask[i] = 1;
            ++count;
        }
    }
    b.measure = static_cast<double>(count) * dom.grid().cell_area();
    return b;
}

} // namespace bklab

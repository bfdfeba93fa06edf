#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace bklab {

using cplx = std::complex<double>;

// Square cell-centred grid on [-L, L]^2 with N cells per side.
// Cell (j, k) has centre (-L + (j + 1/2) h) + i (-L + (k + 1/2) h); storage is row-major with k (the y index) outermost.
class Grid {
public:
    Grid() = default;

    Grid(double half_width, int n) : half_width_(half_width), n_(n), h_(2.0 * half_width / n)
    {
        if (!(half_width > 0.0))
            throw ConfigError("grid half-width must be positive");
        if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n)))
            throw ConfigError("grid size must be a power of two >= 8, got " + std::to_string(n));
    }

    double half_width() const { return half_width_; }
    int size() const { return n_; }
    double spacing() const { return h_; }
    double cell_area() const { return h_ * h_; }
    std::size_t cells() const { return static_cast<std::size_t>(n_) * n_; }

    double x(int j) const { return -half_width_ + (j + 0.5) * h_; }
    double y(int k) const { return -half_width_ + (k + 0.5) * h_; }
    cplx center(int j, int k) const { return {x(j), y(k)}; }
    cplx center(std::size_t idx) const { return center(static_cast<int>(idx % n_), static_cast<int>(idx / n_)); }
    std::size_t index(int j, int k) const { return static_cast<std::size_t>(k) * n_ + j; }

    friend bool operator==(const Grid& a, const Grid& b) { return a.n_ == b.n_ && a.half_width_ == b.half_width_; }

private:
    double half_width_ = 1.0;
    int n_ = 0;
    double h_ = 0.0;
};

inline Grid make_grid(double half_width, int n) { return Grid(half_width, n); }

inline void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b))
        throw GridMismatch(std::string(what) + ": operands live on different grids");
}

// Complex samples at the cell centres of a Grid.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g, cplx value = 0.0) : grid_(g), data_(g.cells(), value) {}

    static Field from_function(const Grid& g, const std::function<cplx(cplx)>& fn)
    {
        Field f(g);
        for (std::size_t i = 0; i < f.data_.size(); ++i)
            f.data_[i] = fn(g.center(i));
        return f;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }

    cplx& operator()(int j, int k) { return data_[grid_.index(j, k)]; }
    cplx operator()(int j, int k) const { return data_[grid_.index(j, k)]; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    cplx operator[](std::size_t i) const { return data_[i]; }

    std::span<cplx> values() { return data_; }
    std::span<const cplx> values() const { return data_; }

    Field& operator+=(const Field& o)
    {
        require_same_grid(grid_, o.grid_, "field +=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field& operator-=(const Field& o)
    {
        require_same_grid(grid_, o.grid_, "field -=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Field& operator*=(const Field& o)
    {
        require_same_grid(grid_, o.grid_, "field *=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] *= o.data_[i];
        return *this;
    }
    Field& operator*=(cplx s)
    {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, const Field& b) { return a *= b; }
    friend Field operator*(Field a, cplx s) { return a *= s; }
    friend Field operator*(cplx s, Field a) { return a *= s; }

    Field conj() const
    {
        Field r(*this);
        for (auto& v : r.data_) v = std::conj(v);
        return r;
    }

    double sup_norm() const
    {
        double m = 0.0;
        for (auto v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    Grid grid_;
    std::vector<cplx> data_;
};

// Binary field format: ASCII header "BKFLD1 N L\n" then N*N little-endian (re, im) double pairs in storage order.
inline void write_field(const Field& f, const std::string& path)
{
    static_assert(std::endian::native == std::endian::little, "field I/O assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot open field file for writing: " + path);
    std::ostringstream hdr;
    hdr.precision(17);
    hdr << "BKFLD1 " << f.grid().size() << ' ' << f.grid().half_width() << '\n';
    os << hdr.str();
    os.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!os)
        throw ConfigError("failed writing field file: " + path);
}

inline Field read_field(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open field file: " + path);
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError("empty field file: " + path);
    std::istringstream hdr(line);
    std::string magic;
    int n = 0;
    double half_width = 0.0;
    if (!(hdr >> magic >> n >> half_width) || magic != "BKFLD1")
        throw ConfigError("bad field header in " + path);
    Field f(Grid(half_width, n));
    is.read(reinterpret_cast<char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (is.gcount() != static_cast<std::streamsize>(f.size() * sizeof(cplx)))
        throw ConfigError("truncated field file: " + path);
    return f;
}

} // namespace bklab

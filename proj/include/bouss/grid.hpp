#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace bouss {

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2() = default;
    constexpr Vec2(double a, double b) : x(a), y(b) {}
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    double norm() const { return std::hypot(x, y); }
    bool operator==(const Vec2&) const = default;
};
inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
    }
    Rect inflate(double d) const { return {x0 - d, x1 + d, y0 - d, y1 + d}; }
    // other lies in the interior of *this with every side separated by more than tol
    bool strictly_contains(const Rect& o, double tol = 0.0) const {
        return o.x0 > x0 + tol && o.x1 < x1 - tol && o.y0 > y0 + tol && o.y1 < y1 - tol;
    }
    bool contains_rect(const Rect& o, double tol = 0.0) const {
        return o.x0 >= x0 - tol && o.x1 <= x1 + tol && o.y0 >= y0 - tol && o.y1 <= y1 + tol;
    }
    double perimeter() const { return 2.0 * (width() + height()); }
    bool operator==(const Rect&) const = default;
};

// Uniform node grid: nodes (i,j), 0<=i<=nx, 0<=j<=ny, at (x0+i h, y0+j h),
// stored row-major with i fastest.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(double x0, double y0, double h, int nx, int ny);
    // Grid covering rect with spacing h; rect extents must be multiples of h.
    static Grid2D covering(const Rect& r, double h);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nxn() const { return nx_ + 1; }
    int nyn() const { return ny_ + 1; }
    std::size_t size() const { return std::size_t(nx_ + 1) * std::size_t(ny_ + 1); }
    double h() const { return h_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double x(int i) const { return x0_ + i * h_; }
    double y(int j) const { return y0_ + j * h_; }
    Vec2 node(int i, int j) const { return {x(i), y(j)}; }
    std::size_t idx(int i, int j) const { return std::size_t(j) * std::size_t(nx_ + 1) + std::size_t(i); }
    Rect bounds() const { return {x0_, x(nx_), y0_, y(ny_)}; }

    // true when the rect's edges fall on grid lines (within 1e-9 h)
    bool aligned(const Rect& r) const;
    // index of the grid line nearest to coordinate; throws if not aligned
    int line_i(double x) const;
    int line_j(double y) const;
    // sub-grid covering an aligned rect
    Grid2D subgrid(const Rect& r) const;
    // node offset of an aligned sub-grid inside this grid
    void offset_of(const Grid2D& sub, int& di, int& dj) const;

    bool same_as(const Grid2D& o) const;

private:
    double x0_ = 0, y0_ = 0, h_ = 1;
    int nx_ = 0, ny_ = 0;
};

struct TimeGrid {
    double t0 = 0.0, t1 = 1.0;
    int n_steps = 64;
    TimeGrid() = default;
    TimeGrid(double a, double b, int n);
    double dt() const { return (t1 - t0) / n_steps; }
    double t(int k) const { return k == n_steps ? t1 : t0 + k * dt(); }
    // slab containing t (clamped to [0, n_steps-1])
    int slab_of(double t) const;
    // node index of an exact grid time; throws if t is not a node
    int node_of(double t) const;
};

} // namespace bouss

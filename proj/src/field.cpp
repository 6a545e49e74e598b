#include <bouss/field.hpp>
#include <bouss/errors.hpp>

#include <algorithm>
#include <cmath>

namespace bouss {

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}
double ScalarField::min() const { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }
double ScalarField::max() const { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

ScalarField VectorField::component(int c) const {
    ScalarField s(grid);
    s.v = c == 0 ? u : w;
    s.time = time;
    s.name = name + (c == 0 ? "_1" : "_2");
    return s;
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) m = std::max({m, std::abs(u[k]), std::abs(w[k])});
    return m;
}

namespace {

// first derivative along a line of n samples with stride
void diff1(const double* f, double* out, int n, std::size_t stride, double h) {
    auto F = [&](int k) { return f[std::size_t(k) * stride]; };
    auto O = [&](int k) -> double& { return out[std::size_t(k) * stride]; };
    if (n < 3) {
        const double d = n == 2 ? (F(1) - F(0)) / h : 0.0;
        for (int k = 0; k < n; ++k) O(k) = d;
        return;
    }
    const double inv2h = 1.0 / (2.0 * h);
    O(0) = (-3.0 * F(0) + 4.0 * F(1) - F(2)) * inv2h;
    for (int k = 1; k < n - 1; ++k) O(k) = (F(k + 1) - F(k - 1)) * inv2h;
    O(n - 1) = (3.0 * F(n - 1) - 4.0 * F(n - 2) + F(n - 3)) * inv2h;
}

void diff2(const double* f, double* out, int n, std::size_t stride, double h) {
    auto F = [&](int k) { return f[std::size_t(k) * stride]; };
    auto O = [&](int k) -> double& { return out[std::size_t(k) * stride]; };
    const double ih2 = 1.0 / (h * h);
    if (n < 3) {
        for (int k = 0; k < n; ++k) O(k) = 0.0;
        return;
    }
    for (int k = 1; k < n - 1; ++k) O(k) = (F(k + 1) - 2.0 * F(k) + F(k - 1)) * ih2;
    if (n < 4) {
        O(0) = O(1);
        O(n - 1) = O(n - 2);
        return;
    }
    O(0) = (2.0 * F(0) - 5.0 * F(1) + 4.0 * F(2) - F(3)) * ih2;
    O(n - 1) = (2.0 * F(n - 1) - 5.0 * F(n - 2) + 4.0 * F(n - 3) - F(n - 4)) * ih2;
}

template <class Op>
ScalarField along_x(const ScalarField& f, Op op) {
    ScalarField out(f.grid);
    out.time = f.time;
    const Grid2D& g = f.grid;
    for (int j = 0; j <= g.ny(); ++j) op(&f.v[g.idx(0, j)], &out.v[g.idx(0, j)], g.nxn(), 1, g.h());
    return out;
}

template <class Op>
ScalarField along_y(const ScalarField& f, Op op) {
    ScalarField out(f.grid);
    out.time = f.time;
    const Grid2D& g = f.grid;
    for (int i = 0; i <= g.nx(); ++i)
        op(&f.v[g.idx(i, 0)], &out.v[g.idx(i, 0)], g.nyn(), std::size_t(g.nxn()), g.h());
    return out;
}

void check_same(const Grid2D& a, const Grid2D& b) {
    if (!a.same_as(b)) throw ValidationError("fields live on different grids");
}

} // namespace

ScalarField d1(const ScalarField& f) { return along_x(f, diff1); }
ScalarField d2(const ScalarField& f) { return along_y(f, diff1); }
ScalarField d11(const ScalarField& f) { return along_x(f, diff2); }
ScalarField d22(const ScalarField& f) { return along_y(f, diff2); }
ScalarField d12(const ScalarField& f) { return d1(d2(f)); }

std::vector<ScalarField> derivatives_of_order(const ScalarField& f, int m) {
    switch (m) {
    case 0: return {f};
    case 1: return {d1(f), d2(f)};
    case 2: return {d11(f), d12(f), d22(f)};
    default: throw ValidationError("derivative order must be 0, 1 or 2");
    }
}

ScalarField curl(const VectorField& y) {
    ScalarField a = d1(y.component(1)), b = d2(y.component(0));
    for (std::size_t k = 0; k < a.v.size(); ++k) a.v[k] -= b.v[k];
    a.time = y.time;
    return a;
}

ScalarField divergence(const VectorField& y) {
    ScalarField a = d1(y.component(0)), b = d2(y.component(1));
    for (std::size_t k = 0; k < a.v.size(); ++k) a.v[k] += b.v[k];
    a.time = y.time;
    return a;
}

VectorField perp_grad(const ScalarField& psi) {
    VectorField y(psi.grid);
    y.time = psi.time;
    ScalarField a = d2(psi), b = d1(psi);
    y.u = std::move(a.v);
    y.w = std::move(b.v);
    for (double& x : y.w) x = -x;
    return y;
}

ScalarField restrict_to(const ScalarField& f, const Grid2D& sub) {
    int di, dj;
    f.grid.offset_of(sub, di, dj);
    ScalarField out(sub);
    out.time = f.time;
    out.name = f.name;
    for (int j = 0; j <= sub.ny(); ++j)
        for (int i = 0; i <= sub.nx(); ++i) out(i, j) = f(i + di, j + dj);
    return out;
}

VectorField restrict_to(const VectorField& f, const Grid2D& sub) {
    int di, dj;
    f.grid.offset_of(sub, di, dj);
    VectorField out(sub);
    out.time = f.time;
    out.name = f.name;
    for (int j = 0; j <= sub.ny(); ++j)
        for (int i = 0; i <= sub.nx(); ++i) {
            out.u[sub.idx(i, j)] = f.u[f.grid.idx(i + di, j + dj)];
            out.w[sub.idx(i, j)] = f.w[f.grid.idx(i + di, j + dj)];
        }
    return out;
}

ScalarField embed(const ScalarField& f, const Grid2D& big) {
    int di, dj;
    big.offset_of(f.grid, di, dj);
    ScalarField out(big);
    out.time = f.time;
    out.name = f.name;
    for (int j = 0; j <= f.grid.ny(); ++j)
        for (int i = 0; i <= f.grid.nx(); ++i) out(i + di, j + dj) = f(i, j);
    return out;
}

VectorField embed(const VectorField& f, const Grid2D& big) {
    int di, dj;
    big.offset_of(f.grid, di, dj);
    VectorField out(big);
    out.time = f.time;
    out.name = f.name;
    for (int j = 0; j <= f.grid.ny(); ++j)
        for (int i = 0; i <= f.grid.nx(); ++i) {
            out.u[big.idx(i + di, j + dj)] = f.u[f.grid.idx(i, j)];
            out.w[big.idx(i + di, j + dj)] = f.w[f.grid.idx(i, j)];
        }
    return out;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    check_same(a.grid, b.grid);
    ScalarField o = a;
    for (std::size_t k = 0; k < o.v.size(); ++k) o.v[k] += b.v[k];
    return o;
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    check_same(a.grid, b.grid);
    ScalarField o = a;
    for (std::size_t k = 0; k < o.v.size(); ++k) o.v[k] -= b.v[k];
    return o;
}
ScalarField operator*(double s, const ScalarField& a) {
    ScalarField o = a;
    for (double& x : o.v) x *= s;
    return o;
}
VectorField operator+(const VectorField& a, const VectorField& b) {
    check_same(a.grid, b.grid);
    VectorField o = a;
    for (std::size_t k = 0; k < o.u.size(); ++k) {
        o.u[k] += b.u[k];
        o.w[k] += b.w[k];
    }
    return o;
}
VectorField operator-(const VectorField& a, const VectorField& b) {
    check_same(a.grid, b.grid);
    VectorField o = a;
    for (std::size_t k = 0; k < o.u.size(); ++k) {
        o.u[k] -= b.u[k];
        o.w[k] -= b.w[k];
    }
    return o;
}
VectorField operator*(double s, const VectorField& a) {
    VectorField o = a;
    for (std::size_t k = 0; k < o.u.size(); ++k) {
        o.u[k] *= s;
        o.w[k] *= s;
    }
    return o;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    check_same(a.grid, b.grid);
    double m = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}
double max_abs_diff(const VectorField& a, const VectorField& b) {
    check_same(a.grid, b.grid);
    double m = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k)
        m = std::max({m, std::abs(a.u[k] - b.u[k]), std::abs(a.w[k] - b.w[k])});
    return m;
}

} // namespace bouss

#pragma once

#include <bouss/grid.hpp>

#include <string>
#include <vector>

namespace bouss {

struct ScalarField {
    Grid2D grid;
    std::vector<double> v;
    double time = 0.0;
    std::string name;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0, std::string nm = {})
        : grid(g), v(g.size(), fill), name(std::move(nm)) {}
    double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.idx(i, j)]; }
    double max_abs() const;
    double min() const;
    double max() const;
};

struct VectorField {
    Grid2D grid;
    std::vector<double> u, w;  // first and second component
    double time = 0.0;
    std::string name;

    VectorField() = default;
    explicit VectorField(const Grid2D& g, std::string nm = {})
        : grid(g), u(g.size(), 0.0), w(g.size(), 0.0), name(std::move(nm)) {}
    ScalarField component(int c) const;
    double max_abs() const;  // max over nodes of max(|u|,|w|)
};

template <class F>
ScalarField sample(const Grid2D& g, F&& f) {
    ScalarField out(g);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) out(i, j) = f(g.node(i, j));
    return out;
}

// Second-order differences: centered inside, one-sided at the grid edge.
ScalarField d1(const ScalarField& f);   // d/dx
ScalarField d2(const ScalarField& f);   // d/dy
ScalarField d11(const ScalarField& f);
ScalarField d22(const ScalarField& f);
ScalarField d12(const ScalarField& f);
// Derivatives of order |k| = m in the order (for m=2) d11, d12, d22.
std::vector<ScalarField> derivatives_of_order(const ScalarField& f, int m);

ScalarField curl(const VectorField& y);        // d1 y2 - d2 y1
ScalarField divergence(const VectorField& y);  // d1 y1 + d2 y2
VectorField perp_grad(const ScalarField& psi); // (d2 psi, -d1 psi)

ScalarField restrict_to(const ScalarField& f, const Grid2D& sub);
VectorField restrict_to(const VectorField& f, const Grid2D& sub);
// Embed a sub-grid field into a larger grid, zero elsewhere.
ScalarField embed(const ScalarField& f, const Grid2D& big);
VectorField embed(const VectorField& f, const Grid2D& big);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);

double max_abs_diff(const ScalarField& a, const ScalarField& b);
double max_abs_diff(const VectorField& a, const VectorField& b);

} // namespace bouss

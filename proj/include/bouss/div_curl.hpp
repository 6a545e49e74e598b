#pragma once

#include <bouss/field.hpp>
#include <bouss/geometry.hpp>

#include <memory>
#include <string>

namespace bouss {

// Dirichlet Poisson solver -lap(psi) = f, psi = 0 on the grid boundary, 5-point stencil.
// The factorization is computed once and reused.
class StreamSolver {
public:
    explicit StreamSolver(const Grid2D& g);
    ~StreamSolver();
    StreamSolver(StreamSolver&&) noexcept;
    StreamSolver& operator=(StreamSolver&&) noexcept;

    // residual receives max |(-lap_h psi) - f| over interior nodes
    ScalarField solve(const ScalarField& f, double* residual = nullptr) const;
    const Grid2D& grid() const { return grid_; }

private:
    struct Impl;
    Grid2D grid_;
    std::unique_ptr<Impl> impl_;
};

struct Recovery {
    ScalarField psi;
    VectorField y;
    double residual = 0.0;
};

// psi from -lap psi = zeta - mu curl(y0), then y = perp_grad(psi) + ybar + mu y0.
// curl_y0 may be passed to avoid recomputation.
Recovery recover_velocity(const StreamSolver& s, const ScalarField& zeta, const VectorField& y0, const VectorField& ybar,
                          double mu, const ScalarField* curl_y0 = nullptr);

struct FluxReport {
    double value = 0.0;      // trapezoidal integral of y.n over the control sides
    double tolerance = 0.0;  // 1e-8 x perimeter
    bool pass = false;
};

// Net flux through the control portion (left and right sides) of the physical domain.
FluxReport boundary_flux_audit(const VectorField& y, const StripGeometry& geo);

// Max over boundary nodes of |y.n - ref.n|.
double normal_trace_error(const VectorField& y, const VectorField& ref);

// Max |div y| and max |curl y - zeta| over nodes at least 'inset' nodes from the boundary.
double max_divergence(const VectorField& y, int inset = 0);
double max_curl_error(const VectorField& y, const ScalarField& zeta, int inset = 1);

} // namespace bouss

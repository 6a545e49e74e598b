#include <bouss/div_curl.hpp>
#include <bouss/errors.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>

namespace bouss {

struct StreamSolver::Impl {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::SparseMatrix<double> A;
};

StreamSolver::StreamSolver(const Grid2D& g) : grid_(g), impl_(std::make_unique<Impl>()) {
    const int mx = g.nx() - 1, my = g.ny() - 1;
    if (mx < 1 || my < 1) throw ValidationError("stream solver needs at least one interior node");
    const int n = mx * my;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(std::size_t(n) * 5);
    auto id = [mx](int i, int j) { return (j - 1) * mx + (i - 1); };
    for (int j = 1; j <= my; ++j)
        for (int i = 1; i <= mx; ++i) {
            const int r = id(i, j);
            t.emplace_back(r, r, 4.0);
            if (i > 1) t.emplace_back(r, id(i - 1, j), -1.0);
            if (i < mx) t.emplace_back(r, id(i + 1, j), -1.0);
            if (j > 1) t.emplace_back(r, id(i, j - 1), -1.0);
            if (j < my) t.emplace_back(r, id(i, j + 1), -1.0);
        }
    impl_->A.resize(n, n);
    impl_->A.setFromTriplets(t.begin(), t.end());
    impl_->ldlt.compute(impl_->A);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("stream-function factorization failed");
}

StreamSolver::~StreamSolver() = default;
StreamSolver::StreamSolver(StreamSolver&&) noexcept = default;
StreamSolver& StreamSolver::operator=(StreamSolver&&) noexcept = default;

ScalarField StreamSolver::solve(const ScalarField& f, double* residual) const {
    if (!f.grid.same_as(grid_)) throw ValidationError("stream solver: right-hand side on a different grid");
    const int mx = grid_.nx() - 1, my = grid_.ny() - 1;
    const double h2 = grid_.h() * grid_.h();
    Eigen::VectorXd b(mx * my);
    for (int j = 1; j <= my; ++j)
        for (int i = 1; i <= mx; ++i) {
            const double v = f(i, j);
            if (!std::isfinite(v)) throw ValidationError("stream solver: non-finite vorticity");
            b[(j - 1) * mx + (i - 1)] = h2 * v;
        }
    const Eigen::VectorXd x = impl_->ldlt.solve(b);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("stream-function solve failed");
    ScalarField psi(grid_, 0.0, "psi");
    psi.time = f.time;
    for (int j = 1; j <= my; ++j)
        for (int i = 1; i <= mx; ++i) psi(i, j) = x[(j - 1) * mx + (i - 1)];
    if (residual) {
        double r = 0.0;
        for (int j = 1; j <= my; ++j)
            for (int i = 1; i <= mx; ++i) {
                const double lap = (4.0 * psi(i, j) - psi(i - 1, j) - psi(i + 1, j) - psi(i, j - 1) - psi(i, j + 1)) / h2;
                r = std::max(r, std::abs(lap - f(i, j)));
            }
        *residual = r;
    }
    return psi;
}

Recovery recover_velocity(const StreamSolver& s, const ScalarField& zeta, const VectorField& y0, const VectorField& ybar,
                          double mu, const ScalarField* curl_y0) {
    const Grid2D& g = s.grid();
    if (!zeta.grid.same_as(g) || !y0.grid.same_as(g) || !ybar.grid.same_as(g))
        throw ValidationError("recover_velocity: fields on different grids");
    ScalarField rhs = zeta;
    if (mu != 0.0) {
        const ScalarField c = curl_y0 ? *curl_y0 : curl(y0);
        for (std::size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] -= mu * c.v[k];
    }
    Recovery r;
    r.psi = s.solve(rhs, &r.residual);
    r.y = perp_grad(r.psi);
    for (std::size_t k = 0; k < r.y.u.size(); ++k) {
        r.y.u[k] += ybar.u[k] + mu * y0.u[k];
        r.y.w[k] += ybar.w[k] + mu * y0.w[k];
    }
    r.y.time = zeta.time;
    r.y.name = "y";
    return r;
}

namespace {

double side_integral(const std::vector<double>& vals, double h) {
    double s = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k) s += (k == 0 || k + 1 == vals.size() ? 0.5 : 1.0) * vals[k];
    return s * h;
}

} // namespace

FluxReport boundary_flux_audit(const VectorField& y, const StripGeometry& geo) {
    const Grid2D& g = y.grid;
    if (!(g.bounds() == geo.omega)) throw ValidationError("flux audit expects a field on the physical domain");
    std::vector<double> left, right;
    for (int j = 0; j <= g.ny(); ++j) {
        left.push_back(-y.u[g.idx(0, j)]);
        right.push_back(y.u[g.idx(g.nx(), j)]);
    }
    FluxReport r;
    r.value = side_integral(left, g.h()) + side_integral(right, g.h());
    r.tolerance = 1e-8 * geo.omega.perimeter();
    r.pass = std::abs(r.value) <= r.tolerance;
    return r;
}

double normal_trace_error(const VectorField& y, const VectorField& ref) {
    const Grid2D& g = y.grid;
    double e = 0.0;
    for (int j = 0; j <= g.ny(); ++j) {
        e = std::max(e, std::abs(y.u[g.idx(0, j)] - ref.u[g.idx(0, j)]));
        e = std::max(e, std::abs(y.u[g.idx(g.nx(), j)] - ref.u[g.idx(g.nx(), j)]));
    }
    for (int i = 0; i <= g.nx(); ++i) {
        e = std::max(e, std::abs(y.w[g.idx(i, 0)] - ref.w[g.idx(i, 0)]));
        e = std::max(e, std::abs(y.w[g.idx(i, g.ny())] - ref.w[g.idx(i, g.ny())]));
    }
    return e;
}

double max_divergence(const VectorField& y, int inset) {
    const ScalarField d = divergence(y);
    const Grid2D& g = y.grid;
    double m = 0.0;
    for (int j = inset; j <= g.ny() - inset; ++j)
        for (int i = inset; i <= g.nx() - inset; ++i) m = std::max(m, std::abs(d(i, j)));
    return m;
}

double max_curl_error(const VectorField& y, const ScalarField& zeta, int inset) {
    const ScalarField c = curl(y);
    const Grid2D& g = y.grid;
    double m = 0.0;
    for (int j = inset; j <= g.ny() - inset; ++j)
        for (int i = inset; i <= g.nx() - inset; ++i) m = std::max(m, std::abs(c(i, j) - zeta(i, j)));
    return m;
}

} // namespace bouss

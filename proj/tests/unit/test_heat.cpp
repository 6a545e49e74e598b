#include <doctest.h>

#include <bouss/heat.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace bouss;

namespace {

constexpr double pi = std::numbers::pi;

// Thin strip: 31 nodes along x, one interior row; controls on interior nodes 6..12.
struct Strip {
    Grid2D g{0, 0, 1.0 / 30, 30, 2};
    TimeGrid tg{0, 0.25, 16};
    std::vector<std::uint8_t> mask = [this] {
        std::vector<std::uint8_t> m(g.size(), 0);
        for (int i = 6; i <= 12; ++i) m[g.idx(i, 1)] = 1;
        return m;
    }();
    AdvectionDiffusion op{g, 0.05, tg, {}, mask};
    ScalarField u0 = sample(g, [](Vec2 p) { return std::abs(p.y - 1.0 / 30) < 1e-12 ? std::sin(pi * p.x) : 0.0; });
};

} // namespace

TEST_CASE("first Dirichlet mode decays at the continuous rate") {
    const Rect r{0.5, 1.5, 0.25, 1.0};
    const Grid2D g = Grid2D::covering(r, 1.0 / 64);
    const double kappa = 0.1, L1 = r.width(), L2 = r.height();
    const TimeGrid tg(0, 0.5, 32);
    const ScalarField u0 = sample(g, [&](Vec2 p) { return std::sin(pi * (p.x - r.x0) / L1) * std::sin(pi * (p.y - r.y0) / L2); });
    const AdvectionDiffusion op(g, kappa, tg, {}, std::vector<std::uint8_t>(g.size(), 0));
    const ScalarField uT = op.terminal(u0);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        num += uT.v[k] * u0.v[k];
        den += u0.v[k] * u0.v[k];
    }
    const double lambda1 = pi * pi * (1 / (L1 * L1) + 1 / (L2 * L2));
    const double rate = -std::log(num / den) / tg.t1;
    CHECK(rate == doctest::Approx(kappa * lambda1).epsilon(0.02));
}

TEST_CASE("zero datum and zero control give the zero state") {
    Strip s;
    const auto u = s.op.forward(ScalarField(s.g));
    for (const auto& f : u) CHECK(f.max_abs() == 0.0);
    const HumSolution h = hum_null_control(s.op, ScalarField(s.g));
    CHECK(h.control_norm == 0.0);
}

TEST_CASE("adjoint is the exact transpose") {
    Strip s;
    CHECK(transpose_gap(s.op, 3) <= 1e-12);
    const Grid2D g = Grid2D::covering({0, 1, 0, 0.5}, 1.0 / 16);
    VectorField w(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        w.u[k] = 0.7;
        w.w[k] = -0.2;
    }
    std::vector<std::uint8_t> mask(g.size(), 0);
    for (int j = 2; j < 5; ++j)
        for (int i = 3; i < 9; ++i) mask[g.idx(i, j)] = 1;
    const AdvectionDiffusion op(g, 0.05, TimeGrid(0, 0.5, 8), {w}, mask);
    CHECK(transpose_gap(op, 9) <= 1e-12);
}

TEST_CASE("penalized HUM control equals the dense least-squares minimizer") {
    Strip s;
    const double eps = 1e-3;
    const int n = s.tg.n_steps;
    std::vector<std::size_t> patch;
    for (std::size_t k = 0; k < s.g.size(); ++k)
        if (s.mask[k]) patch.push_back(k);
    const int nc = int(patch.size()) * n, ns = int(s.g.size());
    // control-to-terminal-state matrix, one column per unit control value
    Eigen::MatrixXd L(ns, nc);
    for (int step = 1; step <= n; ++step)
        for (std::size_t p = 0; p < patch.size(); ++p) {
            std::vector<ScalarField> v(std::size_t(n + 1), ScalarField(s.g));
            v[std::size_t(step)].v[patch[p]] = 1.0;
            const ScalarField uT = s.op.terminal(ScalarField(s.g), &v);
            L.col((step - 1) * int(patch.size()) + int(p)) = Eigen::Map<const Eigen::VectorXd>(uT.v.data(), ns);
        }
    const ScalarField free = s.op.terminal(s.u0);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(free.v.data(), ns);
    // minimize (dt h^2 / 2)|v|^2 + (h^2 / (2 eps)) |b + L v|^2
    const double h2 = s.g.h() * s.g.h(), dt = s.tg.dt();
    const Eigen::MatrixXd A = dt * h2 * Eigen::MatrixXd::Identity(nc, nc) + (h2 / eps) * L.transpose() * L;
    const Eigen::VectorXd vref = A.ldlt().solve(-(h2 / eps) * L.transpose() * b);

    HumOptions opt;
    opt.eps_pen = eps;
    opt.cg_rtol = 1e-13;
    const HumSolution h = hum_null_control(s.op, s.u0, opt);
    Eigen::VectorXd v(nc);
    for (int step = 1; step <= n; ++step)
        for (std::size_t p = 0; p < patch.size(); ++p)
            v((step - 1) * int(patch.size()) + int(p)) = h.control[std::size_t(step)].v[patch[p]];
    CHECK((v - vref).norm() / vref.norm() <= 1e-6);
    CHECK(h.control_norm == doctest::Approx(std::sqrt(dt * h2) * vref.norm()).epsilon(1e-6));
    // off-patch controls are zero
    for (const auto& c : h.control)
        for (std::size_t k = 0; k < s.g.size(); ++k)
            if (!s.mask[k]) CHECK(c.v[k] == 0.0);
}

TEST_CASE("penalty sweep trades terminal size for control cost") {
    Strip s;
    double prev_t = INFINITY, prev_c = 0.0;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        HumOptions opt;
        opt.eps_pen = eps;
        const HumSolution h = hum_null_control(s.op, s.u0, opt);
        CHECK(h.terminal_norm < prev_t);
        CHECK(h.control_norm > prev_c);
        prev_t = h.terminal_norm;
        prev_c = h.control_norm;
    }
}

TEST_CASE("extended domain layout") {
    const StripGeometry geo = build_strip_geometry({});
    const ExtendedDomain d = ExtendedDomain::build(geo, 1.0 / 64);
    CHECK(d.omega_tilde == Rect{0.5, 1.5, 0.25, 1.0});
    CHECK(d.grid.nx() == 64);
    CHECK(d.grid.ny() == 48);
    CHECK(d.omega_tilde.contains_rect(d.patch));
    CHECK(d.patch.y0 > d.omega.y1);
    std::size_t on = 0;
    for (auto m : d.patch_mask) on += m;
    CHECK(on > 0);
}

TEST_CASE("zero temperature keeps the temperature phase trivial") {
    const StripGeometry geo = build_strip_geometry({});
    const ExtendedDomain d = ExtendedDomain::build(geo, 1.0 / 16);
    HeatConfig cfg;
    cfg.n_steps = 4;
    const ThetaPhaseResult r = theta_phase(geo, VectorField(d.omega_grid), ScalarField(d.omega_grid), cfg);
    CHECK(r.converged);
    for (const auto& t : r.theta) CHECK(t.max_abs() == 0.0);
    for (const auto& y : r.y) CHECK(y.max_abs() == 0.0);
}

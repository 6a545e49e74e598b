#include <doctest.h>

#include <bouss/errors.hpp>
#include <bouss/return_method.hpp>
#include <bouss/shapes.hpp>

#include <cmath>

using namespace bouss;

namespace {

std::shared_ptr<const ReturnInfra> coarse_infra() {
    static std::shared_ptr<const ReturnInfra> inf = [] {
        ReturnConfig c;
        c.nx = 32;
        c.n_steps = 32;
        return ReturnInfra::build(c);
    }();
    return inf;
}

} // namespace

TEST_CASE("dyadic scaling keeps the scaled data below delta") {
    const int j = choose_dyadic(1.0, 0.1, 1.0, 1.0, 0.5, 0.0);
    const double eps = 0.5 * std::ldexp(1.0, -j);
    CHECK(eps * 1.0 <= 0.1);
    CHECK(eps * eps * 1.0 <= 0.1);
    CHECK(2 * eps > 0.1);  // the next larger dyadic value fails
    CHECK(choose_dyadic(1.0, 0.5, 0.0, 0.0, 0.0, 0.0) == 1);
}

TEST_CASE("zero data is a fixed point after one iteration") {
    const auto inf = coarse_infra();
    const LocalResult r = local_null_control(*inf, VectorField(inf->omega_grid), ScalarField(inf->omega_grid));
    CHECK(r.report.converged);
    REQUIRE(r.report.iterations.size() == 1);
    CHECK(r.report.iterations[0].step <= 1e-10);
    CHECK(r.theta_tail == 0.0);
    CHECK(r.zeta_terminal == 0.0);
    CHECK(r.y_terminal <= 1e-10);
}

TEST_CASE("zero data global run is identically zero") {
    const auto inf = coarse_infra();
    const VectorField z(inf->omega_grid);
    const ScalarField t(inf->omega_grid);
    const GlobalResult g = global_exact_control(*inf, z, z, t, t, 1.0, 0.5, 1e-3);
    CHECK(g.pass);
    for (const auto& y : g.y) CHECK(y.max_abs() <= 1e-10);
    for (const auto& th : g.theta) CHECK(th.max_abs() == 0.0);
}

TEST_CASE("velocity data must respect the boundary contract") {
    const auto inf = coarse_infra();
    VectorField y(inf->omega_grid);
    for (auto& w : y.w) w = 1.0;  // crosses the top and bottom sides
    CHECK_THROWS_AS(check_velocity_contract(y, inf->geo), ValidationError);
    const VectorField ok = make_vector({"solenoidal", 1e-2, {1.0, 0.5}, 0.2}, inf->omega_grid);
    CHECK_NOTHROW(check_velocity_contract(ok, inf->geo));
}

TEST_CASE("random solenoidal perturbations are divergence-free with the requested size") {
    const auto inf = coarse_infra();
    const VectorField r = random_solenoidal(inf->omega_grid, 1e-3, 4);
    CHECK(r.max_abs() == doctest::Approx(1e-3));
    CHECK(max_divergence(r, 1) <= 1e-12);
    CHECK(random_solenoidal(inf->omega_grid, 1e-3, 4).u == r.u);
}

TEST_CASE("return field reverses cleanly") {
    const auto inf = coarse_infra();
    FlowMap fm(inf->outer, inf->geo.omega3, inf->tg);
    fm.with_return_field(inf->rp, inf->gamma, inf->M);
    CHECK(reversal_deviation(fm, closure_nodes(inf->outer, inf->geo.omega, 2), Exec::Parallel) <= 1e-6);
}

#include <doctest.h>

#include <bouss/potential.hpp>

#include <cmath>
#include <numbers>

using namespace bouss;

namespace {

double max_error(const PotentialSolution& s, double (*exact)(Vec2)) {
    double e = 0.0;
    for (int j = 0; j <= s.grid.ny(); ++j)
        for (int i = 0; i <= s.grid.nx(); ++i) {
            const std::size_t k = s.grid.idx(i, j);
            if (s.inside[k]) e = std::max(e, std::abs(s.phi[k] - exact(s.grid.node(i, j))));
        }
    return e;
}

double sector_exact(Vec2 p) { return -1.0 + 4.0 * std::atan2(p.y, p.x) / std::numbers::pi; }

} // namespace

TEST_CASE("rectangle potential is the linear profile") {
    const PotentialSolution s = solve_potential(PotentialDomain::rectangle({0, 2, 0, 1}, 1.0 / 64));
    CHECK(max_error(s, [](Vec2 p) { return p.x - 1.0; }) <= 1e-8);
    const GradientFloorReport r = verify_gradient_floor(s);
    CHECK(r.pass);
    CHECK(r.min_grad == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.phi_min == doctest::Approx(-1.0));
    CHECK(r.phi_max == doctest::Approx(1.0));
}

TEST_CASE("swapped ends negate the potential") {
    const PotentialSolution s = solve_potential(PotentialDomain::rectangle({0, 2, 0, 1}, 1.0 / 16, true));
    CHECK(max_error(s, [](Vec2 p) { return 1.0 - p.x; }) <= 1e-8);
}

TEST_CASE("annular sector converges to the angular potential") {
    const double e1 = max_error(solve_potential(PotentialDomain::annular_sector(1.0 / 16)), sector_exact);
    const double e2 = max_error(solve_potential(PotentialDomain::annular_sector(1.0 / 32)), sector_exact);
    CHECK(e2 < e1);
    CHECK(e2 <= 2e-2);
    const GradientFloorReport r = verify_gradient_floor(solve_potential(PotentialDomain::annular_sector(1.0 / 32)));
    CHECK(r.pass);
    // |grad phi| = 4/(pi r) is smallest on the outer arc
    CHECK(r.min_grad == doctest::Approx(2.0 / std::numbers::pi).epsilon(0.1));
}

TEST_CASE("L-shape gradient floor agrees with a 4x finer solve") {
    const GradientFloorReport c = verify_gradient_floor(solve_potential(PotentialDomain::l_shape(1.0 / 16)));
    const GradientFloorReport f = verify_gradient_floor(solve_potential(PotentialDomain::l_shape(1.0 / 64)));
    MESSAGE("L-shape min |grad phi|: coarse " << c.min_grad << " at (" << c.argmin_grad.x << "," << c.argmin_grad.y
                                              << "), fine " << f.min_grad);
    CHECK(std::abs(c.min_grad - f.min_grad) <= 0.05 * std::max(c.min_grad, f.min_grad) + 1e-12);
    // two zero-flux sides meet at the corner (1,2), where the gradient must vanish
    CHECK(f.min_grad <= 1e-12);
    CHECK((f.argmin_grad - Vec2{1.0, 2.0}).norm() <= 1e-12);
    CHECK_FALSE(f.pass);
}

TEST_CASE("shifted potential fails the range check") {
    PotentialSolution s = solve_potential(PotentialDomain::rectangle({0, 2, 0, 1}, 1.0 / 16));
    for (std::size_t k = 0; k < s.phi.size(); ++k)
        if (s.inside[k]) s.phi[k] += 2.0;
    const GradientFloorReport r = verify_gradient_floor(s);
    CHECK_FALSE(r.pass);
    CHECK(r.phi_max == doctest::Approx(3.0));
}

TEST_CASE("return potential extension") {
    const StripGeometry g = build_strip_geometry({});
    const Grid2D outer = make_outer_grid(g, 32);
    const ReturnPotential rp = solve_return_potential(g, outer);
    double inside_err = 0.0, outside = 0.0;
    for (int j = 0; j <= outer.ny(); ++j)
        for (int i = 0; i <= outer.nx(); ++i) {
            const Vec2 p = outer.node(i, j);
            const std::size_t k = outer.idx(i, j);
            if (g.omega1.contains(p, 1e-12)) inside_err = std::max(inside_err, std::abs(rp.phi.v[k] - (p.x - 1.0)));
            if (!g.omega3.strictly_contains(Rect{p.x, p.x, p.y, p.y}, outer.h() * 0.5))
                outside = std::max({outside, std::abs(rp.grad_phi.u[k]), std::abs(rp.grad_phi.w[k])});
        }
    CHECK(inside_err <= 1e-8);
    CHECK(outside == 0.0);
    // the drift is (1, 0) on the strip and points towards the outflow end on closure(omega2)
    double drift_err = 0.0, min_u = 1.0;
    for (int j = 0; j <= outer.ny(); ++j)
        for (int i = 0; i <= outer.nx(); ++i) {
            const Vec2 p = outer.node(i, j);
            const std::size_t k = outer.idx(i, j);
            if (g.omega1.contains(p, 1e-12))
                drift_err = std::max(drift_err, std::hypot(rp.grad_phi.u[k] - 1.0, rp.grad_phi.w[k]));
            if (g.omega2.contains(p, 1e-12)) min_u = std::min(min_u, rp.grad_phi.u[k]);
        }
    CHECK(drift_err <= 1e-8);
    CHECK(min_u > 0.0);
    CHECK(verify_return_gradient_floor(rp).pass);
}

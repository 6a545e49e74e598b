#include <doctest.h>

#include <bouss/flow_map.hpp>

#include <cmath>
#include <memory>

using namespace bouss;

namespace {

const Grid2D& unit_grid() {
    static const Grid2D g(-2, -2, 1.0 / 16, 64, 64);
    return g;
}

} // namespace

TEST_CASE("steady translation is exact") {
    FlowMap fm(unit_grid(), unit_grid().bounds(), TimeGrid(0, 1, 16));
    fm.with_function([](Vec2, double) { return Vec2{0.3, -0.2}; }, 0.4);
    const Vec2 p = fm.advect_point({0.1, 0.2}, 1.0, 0.0);
    CHECK(p.x == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(p.y == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    const Vec2 q = fm.advect_point({0.1, 0.2}, 0.0, 1.0);
    CHECK(q.x == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("rotation agrees with the exact flow") {
    FlowMap fm(unit_grid(), unit_grid().bounds(), TimeGrid(0, 1, 32));
    fm.with_function([](Vec2 x, double) { return Vec2{-x.y, x.x}; }, 3.0);
    const double a = 0.7;
    const Vec2 p = fm.advect_point({1.0, 0.0}, a, 0.0);
    CHECK(std::hypot(p.x - std::cos(a), p.y - std::sin(a)) <= 1e-6);
}

TEST_CASE("step refinement oracle for a non-constant field") {
    auto field = [](Vec2 x, double t) { return Vec2{std::sin(x.y) * (1 + t), std::cos(x.x)}; };
    FlowMap coarse(unit_grid(), unit_grid().bounds(), TimeGrid(0, 1, 16));
    coarse.with_function(field, 2.0);
    FlowMap fine(unit_grid(), unit_grid().bounds(), TimeGrid(0, 1, 160));
    fine.with_function(field, 2.0);
    for (Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.3, -0.4}, Vec2{-0.5, 0.5}}) {
        const Vec2 a = coarse.advect_point(x, 1.0, 0.0), b = fine.advect_point(x, 1.0, 0.0);
        CHECK((a - b).norm() <= 1e-6);
    }
}

TEST_CASE("identity, inverse and group properties with serial and parallel batches") {
    FlowMap fm(unit_grid(), unit_grid().bounds(), TimeGrid(0, 1, 16));
    fm.with_function([](Vec2 x, double t) { return Vec2{0.5 * std::sin(x.y + t), 0.4 * std::cos(x.x)}; }, 1.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({-0.5 + 0.02 * i, 0.3 - 0.01 * i});
    CHECK(fm.advect_point({0.2, 0.1}, 0.4, 0.4) == Vec2{0.2, 0.1});
    const auto s = fm.advect_batch(pts, 0.8, 0.1, Exec::Serial);
    const auto p = fm.advect_batch(pts, 0.8, 0.1, Exec::Parallel);
    CHECK(s == p);
    const auto back = fm.advect_batch(s, 0.1, 0.8, Exec::Serial);
    double inv = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) inv = std::max(inv, (back[i] - pts[i]).norm());
    CHECK(inv <= 1e-6);
    const FlowProperties fp = flow_properties(fm, pts, Exec::Serial);
    CHECK(fp.identity_error == 0.0);
    CHECK(fp.inverse_error <= 1e-6);
    CHECK(fp.group_error <= 1e-6);
}

TEST_CASE("return field flushes the second domain and matches the threshold") {
    const StripGeometry g = build_strip_geometry({});
    const Grid2D outer = make_outer_grid(g, 64);
    auto rp = std::make_shared<const ReturnPotential>(solve_return_potential(g, outer));
    const TimeProfile gamma = TimeProfile::gamma(0.2, 1.0);
    const TimeGrid tg(0, 1, 32);
    const FlushCertificate c = select_M(rp, gamma, tg);
    CHECK(c.ok);
    CHECK(c.clearance >= 2 * outer.h());
    // closed form: a particle moves M int gamma along x; exit needs M int gamma > width(omega2)
    const double predicted = g.omega2.width() / gamma.half_integral();
    CHECK(c.predicted_threshold == doctest::Approx(predicted));
    CHECK(c.M >= predicted / 2);
    CHECK(c.M <= 4 * predicted);

    FlowMap fm(outer, g.omega3, tg);
    fm.with_return_field(rp, gamma, c.M);
    const FlowProperties fp = flow_properties(fm, closure_nodes(outer, g.omega2, 2), Exec::Parallel);
    // the tight bound holds at the production resolution; this grid is 2x coarser
    CHECK(fp.min_phi_slope >= -1e-4);
    CHECK(fp.inverse_error <= 1e-6);
}

TEST_CASE("a narrow strip is flushed at M = 1") {
    GeometryConfig gc;
    gc.omega = {0.0625, 0.1875, 0.25, 0.75};
    gc.omega1 = {0.0, 0.25, 0.0, 1.0};
    gc.margin2 = 0.0625;
    gc.margin3 = 0.25;
    const StripGeometry g = build_strip_geometry(gc);
    const Grid2D outer = make_outer_grid(g, 16);
    auto rp = std::make_shared<const ReturnPotential>(solve_return_potential(g, outer));
    const FlushCertificate c = select_M(rp, TimeProfile::gamma(0.2, 1.0), TimeGrid(0, 1, 32));
    CHECK(c.ok);
    CHECK(c.M == 1.0);
    CHECK(c.history.size() == 1);
}

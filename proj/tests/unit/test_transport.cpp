#include <doctest.h>

#include <bouss/transport.hpp>

#include <algorithm>
#include <cmath>

using namespace bouss;

namespace {

double gauss(Vec2 p, Vec2 c) { return std::exp(-20.0 * ((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y))); }

struct Setup {
    Grid2D g{-1, -1, 1.0 / 64, 192, 128};
    TimeGrid tg{0, 1, 16};
    FlowMap fm{g, g.bounds(), tg};
};

} // namespace

TEST_CASE("zero velocity and zero source keep the datum") {
    Setup s;
    s.fm.with_function([](Vec2, double) { return Vec2{}; }, 0.0);
    const Characteristics ch(s.fm, 0, 16);
    TransportProblem p{&ch, sample(s.g, [](Vec2 x) { return gauss(x, {0.2, 0.1}); }), {}, 0, 16, true};
    const auto u = solve_transport(p);
    REQUIRE(u.size() == 17);
    for (const auto& f : u) CHECK(max_abs_diff(f, p.initial) == 0.0);
}

TEST_CASE("uniform translation matches the shifted datum") {
    Setup s;
    const Vec2 c{0.6, -0.3};
    s.fm.with_function([c](Vec2, double) { return c; }, c.norm());
    const Characteristics ch(s.fm, 0, 16);
    TransportProblem p{&ch, sample(s.g, [](Vec2 x) { return gauss(x, {0.0, 0.0}); }), {}, 0, 16, true};
    const auto u = solve_transport(p, Exec::Serial);
    double err = 0.0;
    for (int k : {4, 16}) {
        const double t = s.tg.t(k);
        const ScalarField exact = sample(s.g, [&](Vec2 x) { return gauss(x - t * c, {0.0, 0.0}); });
        err = std::max(err, max_abs_diff(u[std::size_t(k)], exact));
    }
    CHECK(err <= 1e-3);
}

TEST_CASE("source-free transport stays in the datum range and serial equals parallel") {
    Setup s;
    s.fm.with_function([](Vec2 x, double t) { return Vec2{-x.y * (1 + t), x.x}; }, 4.0);
    const Characteristics ch(s.fm, 0, 16, Exec::Serial);
    const Characteristics chp(s.fm, 0, 16, Exec::Parallel);
    CHECK(ch.foot(7) == chp.foot(7));
    // a sharp datum provokes cubic overshoot without the limiter
    TransportProblem p{&ch, sample(s.g, [](Vec2 x) { return std::abs(x.x - 0.1) < 0.2 && std::abs(x.y) < 0.2 ? 1.0 : 0.0; }),
                       {}, 0, 16, true};
    const auto a = solve_transport(p, Exec::Serial);
    const auto b = solve_transport(p, Exec::Parallel);
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].v == b[k].v);
        lo = std::min(lo, a[k].min());
        hi = std::max(hi, a[k].max());
    }
    CHECK(lo >= -1e-10);
    CHECK(hi <= 1.0 + 1e-10);
}

TEST_CASE("constant source with zero velocity grows linearly") {
    Setup s;
    s.fm.with_function([](Vec2, double) { return Vec2{}; }, 0.0);
    const Characteristics ch(s.fm, 0, 16);
    const ScalarField u0 = sample(s.g, [](Vec2 x) { return gauss(x, {0.0, 0.0}); });
    const ScalarField g = sample(s.g, [](Vec2 x) { return std::sin(x.x); });
    TransportProblem p{&ch, u0, std::vector<ScalarField>(17, g), 0, 16, false};
    const auto u = solve_transport(p);
    CHECK(max_abs_diff(u.back(), u0 + 1.0 * g) <= 1e-13);
    CHECK(max_abs_diff(u[8], u0 + 0.5 * g) <= 1e-13);
}

TEST_CASE("buoyancy source is the curl of k theta") {
    const Grid2D g(0, 0, 1.0 / 16, 16, 16);
    const ScalarField th = sample(g, [](Vec2 x) { return x.x * x.x + 3 * x.y; });
    const ScalarField up = buoyancy_source(th, {0.0, 1.0});
    const ScalarField side = buoyancy_source(th, {1.0, 0.0});
    for (int j = 1; j < 16; ++j)
        for (int i = 1; i < 16; ++i) {
            CHECK(up(i, j) == doctest::Approx(2 * g.x(i)));
            CHECK(side(i, j) == doctest::Approx(-3.0));
        }
}

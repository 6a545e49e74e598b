#include <doctest.h>

#include <bouss/extension.hpp>
#include <bouss/geometry.hpp>
#include <bouss/hoelder.hpp>

#include <cmath>

using namespace bouss;

namespace {

struct Setup {
    StripGeometry geo = build_strip_geometry({});
    Grid2D outer = make_outer_grid(geo, 64);
    Grid2D og = outer.subgrid(geo.omega);
    ExtensionOperator ext{geo.omega, outer, geo.omega2};
};

} // namespace

TEST_CASE("extension restricts to the datum and is supported in the target rectangle") {
    Setup s;
    const ScalarField f = sample(s.og, [](Vec2 p) { return std::sin(3 * p.x) + p.y * p.y; });
    const ScalarField e = s.ext.extend_scalar(f);
    CHECK(max_abs_diff(restrict_to(e, s.og), f) == 0.0);
    double outside = 0.0;
    for (int j = 0; j <= s.outer.ny(); ++j)
        for (int i = 0; i <= s.outer.nx(); ++i)
            if (!s.geo.omega2.contains(s.outer.node(i, j), -1e-12))
                outside = std::max(outside, std::abs(e(i, j)));
    CHECK(outside == 0.0);
}

TEST_CASE("zero datum extends to zero") {
    Setup s;
    const VectorField e = s.ext.extend_vector(VectorField(s.og));
    CHECK(e.max_abs() == 0.0);
}

TEST_CASE("one-sided slopes match across the boundary") {
    for (int n : {64, 128}) {
        const StripGeometry geo = build_strip_geometry({});
        const Grid2D outer = make_outer_grid(geo, n);
        const Grid2D og = outer.subgrid(geo.omega);
        const ExtensionOperator ext(geo.omega, outer, geo.omega2);
        const ScalarField f = sample(og, [](Vec2 p) { return std::cos(2 * p.x) * std::sin(3 * p.y); });
        const ScalarField e = ext.extend_scalar(f);
        const double h = outer.h();
        const int i = outer.line_i(geo.omega.x0);
        double worst = 0.0;
        for (int j = outer.line_j(geo.omega.y0); j <= outer.line_j(geo.omega.y1); ++j) {
            const double in = (e(i + 1, j) - e(i, j)) / h, out = (e(i, j) - e(i - 1, j)) / h;
            worst = std::max(worst, std::abs(in - out));
        }
        CHECK(worst <= 20 * h);
    }
}

TEST_CASE("extension of a smooth bump has a bounded norm ratio") {
    Setup s;
    const ScalarField f = sample(s.og, [](Vec2 p) { return std::exp(-10 * ((p.x - 1) * (p.x - 1) + (p.y - 0.5) * (p.y - 0.5))); });
    const ScalarField e = s.ext.extend_scalar(f);
    const double ratio = holder_norm(e, 1).total / holder_norm(f, 1).total;
    MESSAGE("extension norm ratio " << ratio);
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 10.0);
}

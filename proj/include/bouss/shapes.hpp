#pragma once

#include <bouss/field.hpp>

#include <string>

namespace bouss {

// Named analytic data. Kinds: "zero", "bump" (C-infinity compact bump), "gaussian",
// "solenoidal" (vector: perp_grad of a compact bump, scaled to the requested sup norm).
struct ShapeSpec {
    std::string kind = "zero";
    double amplitude = 0.0;
    Vec2 center{1.0, 0.5};
    double radius = 0.2;
};

// A exp(1 - 1/(1 - r^2)), r = |x - c| / R, zero for r >= 1.
double compact_bump(Vec2 x, Vec2 c, double R, double A);

ScalarField make_scalar(const ShapeSpec& s, const Grid2D& g);
VectorField make_vector(const ShapeSpec& s, const Grid2D& g);

} // namespace bouss

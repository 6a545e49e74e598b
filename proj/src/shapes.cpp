#include <bouss/shapes.hpp>
#include <bouss/errors.hpp>

#include <cmath>

namespace bouss {

double compact_bump(Vec2 x, Vec2 c, double R, double A) {
    const double r2 = ((x - c).x * (x - c).x + (x - c).y * (x - c).y) / (R * R);
    if (r2 >= 1.0) return 0.0;
    return A * std::exp(1.0 - 1.0 / (1.0 - r2));
}

namespace {

void check(const ShapeSpec& s) {
    if (!std::isfinite(s.amplitude)) throw ValidationError("shape amplitude must be finite");
    if (s.kind != "zero" && !(s.radius > 0.0)) throw ValidationError("shape radius must be positive");
}

} // namespace

ScalarField make_scalar(const ShapeSpec& s, const Grid2D& g) {
    check(s);
    if (s.kind == "zero") return ScalarField(g, 0.0, "zero");
    if (s.kind == "bump") {
        ScalarField f = sample(g, [&](Vec2 p) { return compact_bump(p, s.center, s.radius, s.amplitude); });
        f.name = "bump";
        return f;
    }
    if (s.kind == "gaussian") {
        const double k = 0.5 / (s.radius * s.radius);
        ScalarField f = sample(g, [&](Vec2 p) {
            const Vec2 d = p - s.center;
            return s.amplitude * std::exp(-k * (d.x * d.x + d.y * d.y));
        });
        f.name = "gaussian";
        return f;
    }
    throw ValidationError("unknown scalar shape '" + s.kind + "' (expected zero, bump or gaussian)");
}

VectorField make_vector(const ShapeSpec& s, const Grid2D& g) {
    check(s);
    if (s.kind == "zero") return VectorField(g, "zero");
    if (s.kind == "solenoidal") {
        const ScalarField b = sample(g, [&](Vec2 p) { return compact_bump(p, s.center, s.radius, 1.0); });
        VectorField v = perp_grad(b);
        const double m = v.max_abs();
        if (m > 0.0) v = (s.amplitude / m) * v;
        v.name = "solenoidal";
        return v;
    }
    throw ValidationError("unknown vector shape '" + s.kind + "' (expected zero or solenoidal)");
}

} // namespace bouss

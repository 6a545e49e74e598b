#pragma once

#include <bouss/grid.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bouss {

enum class Region : std::uint8_t {
    Exterior,
    Gamma,          // on the boundary of the physical domain
    InsideOmega,
    GammaMinus,     // inflow end of the strip
    GammaPlus,      // outflow end of the strip
    Sigma,          // lateral sides of the strip
    Omega1Ring,     // strip minus closure of the physical domain
    Omega2Boundary,
    Omega2Ring,
    Omega3Boundary,
    Omega3Ring,
};

const char* region_name(Region r);

struct Segment {
    Vec2 a, b;
    double length() const { return (b - a).norm(); }
    Vec2 outward_normal;  // unit normal pointing out of the domain the segment bounds
};

struct GeometryConfig {
    Rect omega{0.5, 1.5, 0.25, 0.75};
    Rect omega1{0.0, 2.0, 0.0, 1.0};
    double margin2 = 0.25;  // distance from the strip to the sides of the second domain
    double margin3 = 0.5;   // distance from the strip to the sides of the outer domain
    std::optional<Rect> omega2;  // explicit rects override the margins
    std::optional<Rect> omega3;
    bool swap_ends = false;  // put the inflow end at x = omega1.x1
    double heat_extension = 0.25;  // height of the extension above the top side (heat runs)
};

struct StripGeometry {
    Rect omega, omega1, omega2, omega3;
    Segment gamma_minus, gamma_plus;
    std::vector<Segment> sigma;   // bottom and top sides of the strip
    std::vector<Segment> gamma0;  // control portion of the boundary: left and right sides
    Segment gamma_heat;           // top side of the physical domain
    bool swap_ends = false;
    double heat_extension = 0.25;
};

StripGeometry build_strip_geometry(const GeometryConfig& cfg);

// Region tag of a point with boundary tolerance h/2.
Region classify_node(const StripGeometry& g, Vec2 p, double h);

std::vector<Region> build_mask(const StripGeometry& g, const Grid2D& grid);

// Uniform grid covering the outer domain with nx cells across the strip's width.
Grid2D make_outer_grid(const StripGeometry& g, int nx_strip);

} // namespace bouss

#pragma once

#include <bouss/field.hpp>
#include <bouss/geometry.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bouss {

// Continuation rule for a node just outside the domain: phi(g) = a + b * phi(image),
// with phi(image) interpolated bilinearly.
struct Ghost {
    Vec2 image;
    double a = 0.0, b = 1.0;
    bool neumann = true;  // mirror of a zero-flux side (true) or odd reflection of a Dirichlet side
    bool shared = false;  // independent of the requesting node: becomes an unknown of its own
};

// Mixed Dirichlet/Neumann Laplace problem on a masked node set.
struct PotentialDomain {
    Grid2D grid;
    std::function<bool(Vec2)> inside;                      // closed domain membership
    std::function<std::optional<double>(Vec2)> dirichlet;  // Dirichlet value at boundary nodes
    std::function<std::optional<Ghost>(Vec2 g, Vec2 from)> ghost;
    std::string name;

    // Rectangle with Dirichlet -1 on the left side and +1 on the right side (swapped if asked),
    // zero flux on top and bottom. grid must cover the rect exactly.
    static PotentialDomain rectangle(const Rect& r, double h, bool swap_ends = false);
    // Quarter annulus r in [1,2], theta in [0,pi/2]: -1 on theta=0, +1 on theta=pi/2, zero flux on arcs.
    static PotentialDomain annular_sector(double h);
    // [0,2]x[0,1] union [0,1]x[1,2]: -1 on x=0, +1 on x=2, zero flux elsewhere.
    static PotentialDomain l_shape(double h);
};

struct PotentialSolution {
    Grid2D grid;
    std::vector<std::uint8_t> inside;
    std::vector<double> phi;   // NaN outside the domain
    std::vector<double> g1, g2;  // gradient at inside nodes (NaN outside)
    double residual = 0.0;     // max 5-point Laplacian residual over nodes with all neighbours inside
    int unknowns = 0;
};

PotentialSolution solve_potential(const PotentialDomain& dom);

struct GradientFloorReport {
    double min_grad = 0.0;
    double phi_min = 0.0, phi_max = 0.0;
    Vec2 argmin_grad;
    double gradient_floor = 1e-3;
    bool pass = false;
    std::string detail;
};

GradientFloorReport verify_gradient_floor(const PotentialSolution& s, double gradient_floor = 1e-3);

// Return potential on the outer grid: solution on the strip plus its compactly supported extension.
struct ReturnPotential {
    StripGeometry geom;
    Grid2D grid;              // outer grid
    Grid2D strip_grid;        // aligned sub-grid covering the strip
    PotentialSolution strip;  // solution on the strip
    ScalarField phi;          // extended potential on the outer grid
    // Return drift direction: centred-difference gradient of the saturated continuation times
    // the cutoff. Equals grad phi on closure(omega2); compactly supported in omega3.
    VectorField grad_phi;
    std::vector<std::uint8_t> support_mask;  // nodes where the drift is non-zero
    double residual = 0.0;
    double sat_level = 0.0;   // potential level where saturation starts (max |phi| on the strip)
    double sat_band = 0.0;    // width of the saturation band in potential units
    double grad_sup = 0.0;    // max |drift| over the outer grid
};

ReturnPotential solve_return_potential(const StripGeometry& g, const Grid2D& outer);

GradientFloorReport verify_return_gradient_floor(const ReturnPotential& p, double gradient_floor = 1e-3);

struct ExtensionProfile {
    double sat_level = 0.0, sat_band = 0.0;
};

// Compactly supported extension of the strip potential to the outer grid. phi_strip lives on
// the strip sub-grid; min_grad is the gradient floor measured on the strip.
ScalarField extend_potential(const ScalarField& phi_strip, const StripGeometry& g, const Grid2D& outer,
                             double min_grad, ExtensionProfile* profile = nullptr);

} // namespace bouss

#pragma once

#include <bouss/heat.hpp>
#include <bouss/return_method.hpp>
#include <bouss/shapes.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace bouss {

// A datum is a named analytic shape or a field file.
struct DataSpec {
    ShapeSpec shape;
    std::string file;  // non-empty: load from this path instead
};

struct RunConfig {
    GeometryConfig geometry;
    // grid
    int nx = 128;
    int ny = 0;  // 0: implied by the geometry; otherwise checked against it
    int n_steps = 64;
    // profiles
    double gamma_width = 0.2, gamma_amplitude = 1.0;
    double M = 0.0, M_max = 65536.0;
    int base_substeps = 4;
    // tolerances
    double fp_tol = 1e-8, flush_tol = 1e-3, glue_tol = 1e-3, hum_tol = 1e-3, gradient_floor = 1e-3;
    double eps_pen = 1e-8;
    std::vector<double> eps_sweep{1e-2, 1e-4, 1e-6};
    std::vector<double> horizons{0.5, 0.25, 0.125};
    double nu = 1000.0;
    double delta = 600.0;  // largest admissible (2,alpha) size of the scaled data
    int K_max = 50;
    double cg_rtol = 1e-8;
    // physics
    double kappa = 0.1;
    Vec2 k{0.0, 1.0};
    double T = 1.0, T_star = 0.5;
    double alpha = 0.5;
    int heat_steps = 16;
    // data: small compactly supported bumps by default; y1 = y0, theta1 = 0
    DataSpec y0{{"solenoidal", 1e-2, {1.0, 0.5}, 0.2}, {}};
    DataSpec theta0{{"bump", 5e-3, {1.0, 0.5}, 0.2}, {}};
    DataSpec y1{{"solenoidal", 1e-2, {1.0, 0.5}, 0.2}, {}};
    DataSpec theta1;
    std::uint64_t seed = 11;
    int contraction_pairs = 0, contraction_m = 4;  // pairs = 0 skips the contraction study
    int workers = 0;  // 0: OpenMP default

    ReturnConfig return_config() const;
    HeatConfig heat_config() const;
    // canonical JSON (sorted keys, fixed number formatting)
    std::string to_json() const;
};

// Parses JSON text; unknown keys and invalid values raise ValidationError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

ScalarField resolve_scalar(const DataSpec& d, const Grid2D& g);
VectorField resolve_vector(const DataSpec& d, const Grid2D& g);

} // namespace bouss

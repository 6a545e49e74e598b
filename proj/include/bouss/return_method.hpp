#pragma once

#include <bouss/div_curl.hpp>
#include <bouss/exec.hpp>
#include <bouss/flow_map.hpp>
#include <bouss/geometry.hpp>
#include <bouss/hoelder.hpp>
#include <bouss/potential.hpp>
#include <bouss/time_profiles.hpp>
#include <bouss/transport.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace bouss {

struct ReturnConfig {
    GeometryConfig geometry;
    int nx = 128;  // cells across the strip width
    int n_steps = 64;
    double gamma_width = 0.2;
    double gamma_amplitude = 1.0;
    double M = 0.0;  // 0 selects M by doubling
    double M_max = 65536.0;
    FlowMapConfig flow;
    Vec2 k{0.0, 1.0};  // buoyancy direction
    double alpha = 0.5;
    double fp_tol = 1e-8;
    int K_max = 50;
    double flush_rel = 1e-3;
    double gradient_floor = 1e-3;
    double nu = 1000.0;  // ball radius for z - ybar in the (0,2,alpha) norm
    HolderOptions holder;
    Exec exec = Exec::Parallel;
};

// Everything that does not depend on the data: potential, profiles, M, extensions,
// stream solver and the reference field ybar on the physical domain.
struct ReturnInfra {
    ReturnConfig cfg;
    StripGeometry geo;
    Grid2D outer, omega_grid;
    TimeGrid tg;
    std::shared_ptr<const ReturnPotential> rp;
    TimeProfile gamma, mu;
    double M = 0.0;
    FlushCertificate cert;
    ExtensionPair ext;
    std::shared_ptr<const StreamSolver> stream;
    std::vector<VectorField> ybar;  // M gamma(t_k) grad phi on the physical domain
    std::vector<double> mu_s;       // mu(t_k)

    static std::shared_ptr<const ReturnInfra> build(const ReturnConfig& cfg);
};

// One application of the fixed-point map and everything it computed on the way.
struct FEvaluation {
    std::vector<VectorField> y;  // physical domain, nodes 0..n
    std::vector<ScalarField> theta, zeta, psi;
    double theta_flush = 0.0, theta_residual = 0.0, theta_datum = 0.0;
    double zeta_flush = 0.0, zeta_residual = 0.0, zeta_reference = 0.0;
    double stream_residual = 0.0;
    long clamps = 0;
    std::shared_ptr<const FlowMap> flow;  // characteristics of z*
};

// Checks the intake contract of initial velocities: discrete divergence-free and zero normal
// component on the top and bottom sides. Throws ValidationError.
void check_velocity_contract(const VectorField& y0, const StripGeometry& geo);

// z* = y* + pi2(z - ybar), then temperature, vorticity and velocity recovery.
FEvaluation apply_F(const ReturnInfra& inf, const std::vector<VectorField>& z, const VectorField& y0,
                    const ScalarField& theta0);

// z0 = ybar + mu y0.
std::vector<VectorField> initial_iterate(const ReturnInfra& inf, const VectorField& y0);

struct IterationRecord {
    int iteration = 0;
    double step = 0.0;  // ||y^{k+1} - y^k||_{0,1,alpha}
    double ball = 0.0;  // ||y^{k+1} - ybar||_{0,2,alpha}
    double theta_residual = 0.0, zeta_residual = 0.0;
};

struct FixedPointReport {
    std::vector<IterationRecord> iterations;
    bool converged = false;
    std::vector<std::string> warnings;
    std::string csv() const;
};

struct ControlSample {
    double t = 0.0;
    int side = 0;        // 0 left, 1 right
    double arc = 0.0;    // distance along the side from its lower end
    double yn = 0.0;
    bool inflow = false;
    double y1 = 0.0, y2 = 0.0, theta = 0.0;
};

struct ControlTrace {
    std::vector<ControlSample> samples;
    std::vector<double> times;
    std::vector<double> flux;  // net flux through the control sides per time node
    double max_flux = 0.0;
    double flux_tolerance = 0.0;
    double inflow_threshold = 0.0;
    bool flux_ok = true;
    std::string csv() const;
};

// Samples y.n on the control sides at every snapshot; inflow records where y.n < -threshold.
ControlTrace extract_controls(const std::vector<VectorField>& y, const std::vector<ScalarField>& theta,
                              const std::vector<double>& times, const StripGeometry& geo);

struct LocalResult {
    FEvaluation state;
    FixedPointReport report;
    ControlTrace trace;
    double theta0_max = 0.0, zeta0_max = 0.0;
    double theta_tail = 0.0;     // max over t >= 1/2 of ||theta|| on the domain, incl. the left limit at 1/2
    double zeta_terminal = 0.0;  // ||zeta(1)|| on the domain
    double y_terminal = 0.0;     // ||y(1)|| on the domain
    double zeta_scale = 0.0;     // max(||zeta0||, forced vorticity scale)
    bool residuals_ok = false;
};

LocalResult local_null_control(const ReturnInfra& inf, const VectorField& y0, const ScalarField& theta0);

struct ContractionReport {
    std::vector<std::vector<double>> ratios;  // per pair, m = 1..m_max
    std::vector<double> distances;            // ||z1 - z2||_{0,1,alpha} per pair
    bool decreasing = false;
    bool below_one = false;  // all ratios at m_max below one
    std::string csv() const;
};

// Random smooth divergence-free perturbation with zero normal trace, scaled to sup norm amplitude.
VectorField random_solenoidal(const Grid2D& g, double amplitude, std::uint64_t seed);

ContractionReport measure_contraction(const ReturnInfra& inf, const VectorField& y0, const ScalarField& theta0,
                                      int pairs = 5, int m_max = 4, double amplitude = 1e-3,
                                      std::uint64_t seed = 11);

struct GlobalResult {
    double eps = 0.0;
    int dyadic = 0;  // eps = (T/2) 2^-dyadic
    double T = 1.0;
    LocalResult forward, backward;
    std::vector<double> times;  // snapshots on [0,eps] and [T-eps,T]; zero state in between
    std::vector<VectorField> y;
    std::vector<ScalarField> theta;
    ControlTrace trace;
    double y_error = 0.0, theta_error = 0.0;  // terminal, relative
    double jump_first = 0.0, jump_second = 0.0;  // relative jumps at eps and T-eps
    double reversal_deviation = 0.0;
    bool pass = false;
    std::string detail;
};

// Largest dyadic eps = (T/2) 2^-j, j >= 1, with max(eps |y|, eps^2 |theta|) <= delta for both ends.
int choose_dyadic(double T, double delta, double y0n, double th0n, double y1n, double th1n);

GlobalResult global_exact_control(const ReturnInfra& inf, const VectorField& y0, const VectorField& y1,
                                  const ScalarField& theta0, const ScalarField& theta1, double T, double delta,
                                  double glue_tol);

// Particle-level check that negating and reversing the velocity of a flow map retraces it.
double reversal_deviation(const FlowMap& fm, const std::vector<Vec2>& pts, Exec exec);

} // namespace bouss

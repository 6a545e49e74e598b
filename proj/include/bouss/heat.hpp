#pragma once

#include <bouss/exec.hpp>
#include <bouss/field.hpp>
#include <bouss/geometry.hpp>
#include <bouss/hoelder.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bouss {

// Physical domain grown above its top side, with a distributed-control patch outside the
// closed physical domain. The top side of the physical domain is the controlled part of its
// boundary; every other side is shared with the grown domain.
struct ExtendedDomain {
    Rect omega, omega_tilde, patch;
    Grid2D grid;        // covers omega_tilde
    Grid2D omega_grid;  // aligned sub-grid covering omega
    std::vector<std::uint8_t> patch_mask;

    static ExtendedDomain build(const StripGeometry& geo, double h, std::optional<Rect> patch = {});
};

// u_t - kappa lap u + w.grad u = v 1_patch, u = 0 on the grid boundary, backward Euler in time with
// centred differences. The factorization of every distinct step matrix is cached.
class AdvectionDiffusion {
public:
    // w: velocity on g at the time nodes of tg (n+1 fields), a single steady field, or empty for w = 0.
    AdvectionDiffusion(const Grid2D& g, double kappa, const TimeGrid& tg, std::vector<VectorField> w,
                       std::vector<std::uint8_t> patch_mask);
    ~AdvectionDiffusion();
    AdvectionDiffusion(AdvectionDiffusion&&) noexcept;
    AdvectionDiffusion& operator=(AdvectionDiffusion&&) noexcept;

    // State at time nodes 0..n. v holds the control at nodes 0..n (node 0 unused) or is null.
    std::vector<ScalarField> forward(const ScalarField& u0, const std::vector<ScalarField>* v = nullptr) const;
    ScalarField terminal(const ScalarField& u0, const std::vector<ScalarField>* v = nullptr) const;

    struct Adjoint {
        ScalarField at_zero;                 // sensitivity of <u(T), g> to u0
        std::vector<ScalarField> control;    // sensitivity to v at nodes 0..n, zero off the patch
    };
    // Exact discrete transpose of the forward map with respect to the h^2 (state) and
    // dt h^2 (control) inner products.
    Adjoint adjoint(const ScalarField& gT) const;

    const Grid2D& grid() const { return grid_; }
    const TimeGrid& time_grid() const { return tg_; }
    double kappa() const { return kappa_; }
    double peclet() const { return peclet_; }  // h max|w| / kappa
    const std::vector<std::uint8_t>& patch_mask() const { return patch_; }

private:
    struct Impl;
    Grid2D grid_;
    TimeGrid tg_;
    double kappa_ = 0.0, peclet_ = 0.0;
    std::vector<std::uint8_t> patch_;
    std::unique_ptr<Impl> impl_;
};

double l2_norm(const ScalarField& f);                     // sqrt(h^2 sum f^2)
double control_norm(const std::vector<ScalarField>& v, double dt);  // sqrt(dt h^2 sum over nodes 1..n)

// Relative gap of <L(u0,v), g> = <u0, L*g(0)> + <v, L*g|patch> for random arguments.
double transpose_gap(const AdvectionDiffusion& op, std::uint64_t seed);

struct HumOptions {
    double eps_pen = 1e-8;
    int max_iter = 4000;
    double cg_rtol = 1e-10;  // relative residual of the dual system
};

struct HumSolution {
    std::vector<ScalarField> control;  // nodes 0..n, zero off the patch
    std::vector<ScalarField> state;    // nodes 0..n
    ScalarField dual;                  // terminal multiplier: u(T) = -eps_pen dual
    double terminal_norm = 0.0;        // ||u(T)||_2
    double terminal_sup = 0.0;
    double control_norm = 0.0;
    double eps_pen = 0.0;
    int cg_iterations = 0;
    double cg_residual = 0.0;
    std::string log_csv() const;
    std::vector<double> cg_log;  // relative residual per CG iteration
};

// Minimizes 1/2 ||v||^2 + 1/(2 eps_pen) ||u(T)||^2 by conjugate gradients on the dual system
// (L L* + eps_pen I) phi = -S u0 with v = L* phi. warm is an initial dual guess.
HumSolution hum_null_control(const AdvectionDiffusion& op, const ScalarField& u0, const HumOptions& opt = {},
                             const ScalarField* warm = nullptr);

struct SweepPoint {
    double parameter = 0.0;
    double terminal_norm = 0.0, control_norm = 0.0;
    int cg_iterations = 0;
};

struct HumStudy {
    double transpose_gap = 0.0;
    std::vector<SweepPoint> penalty;  // decreasing eps_pen
    std::vector<SweepPoint> horizon;  // decreasing horizon
    bool penalty_monotone = false;    // terminal strictly down, control strictly up
    bool horizon_monotone = false;    // control strictly up as the horizon shrinks
    double peclet = 0.0;
    std::string csv() const;
};

struct HumStudyConfig {
    double kappa = 0.1;
    int n_steps = 32;
    double horizon = 0.5;
    std::vector<double> eps_sweep{1e-2, 1e-4, 1e-6};
    std::vector<double> horizons{0.5, 0.25, 0.125};
    double eps_for_horizons = 1e-6;
    HumOptions hum;
};

// Penalty and horizon sweeps for a steady velocity w on the extended domain.
HumStudy hum_study(const ExtendedDomain& dom, const ScalarField& u0, const VectorField* w, const HumStudyConfig& cfg);

struct HeatConfig {
    double kappa = 0.1;
    Vec2 k{0.0, 1.0};
    double T_star = 0.5;
    int n_steps = 16;
    double damping = 1.0;  // theta <- (1-d) theta + d Lambda(theta)
    double fp_tol = 1e-8;
    int K_max = 80;
    double hum_tol = 1e-3;  // ||theta(T*)|| relative to ||theta0||
    double alpha = 0.5;
    HumOptions hum{1e-8, 4000, 1e-8};
    HolderOptions holder;
    std::optional<Rect> patch;
    Exec exec = Exec::Parallel;
};

struct LambdaRecord {
    int iteration = 0;
    double step = 0.0;  // ||theta_bar^{k+1} - theta_bar^k||_{0,1,alpha}
    double ball = 0.0;  // ||theta_bar^{k+1}||_{0,1,alpha}
    int cg_iterations = 0;
    double terminal_sup = 0.0;
};

struct ThetaPhaseResult {
    ExtendedDomain dom;
    TimeGrid tg;
    std::vector<ScalarField> theta;  // physical domain, nodes 0..n
    std::vector<VectorField> y;
    std::vector<ScalarField> zeta;
    HumSolution hum;                 // last HUM solve on the extended domain
    std::vector<LambdaRecord> records;
    bool converged = false;
    bool ball_ok = true;
    double ball_max = 0.0;
    double theta0_max = 0.0;
    double terminal_rel = 0.0;       // ||theta(T*)|| / ||theta0||
    double off_gamma_trace = 0.0;    // max |theta| on the uncontrolled sides over all times
    std::vector<std::string> warnings;
    std::string records_csv() const;
    std::string gamma_trace_csv() const;  // (t, x, theta) on the controlled side
};

// Temperature control to (nearly) zero at T* by penalized HUM on the extended domain, coupled to the
// buoyancy-forced Euler flow through a damped Picard iteration. y0 must vanish normally on every side.
ThetaPhaseResult theta_phase(const StripGeometry& geo, const VectorField& y0, const ScalarField& theta0,
                             const HeatConfig& cfg);

} // namespace bouss

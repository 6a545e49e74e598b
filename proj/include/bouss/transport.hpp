#pragma once

#include <bouss/exec.hpp>
#include <bouss/extension.hpp>
#include <bouss/field.hpp>
#include <bouss/flow_map.hpp>

#include <vector>

namespace bouss {

// Per-slab back-traced characteristics for every node of a flow map's grid: for the slab
// [t_k, t_{k+1}], mid = Y(x, t_k + dt/2, t_{k+1}) and foot = Y(x, t_k, t_{k+1}).
class Characteristics {
public:
    Characteristics(const FlowMap& fm, int k0, int k1, Exec exec = Exec::Parallel);

    const Grid2D& grid() const { return grid_; }
    const TimeGrid& time_grid() const { return tg_; }
    int first_slab() const { return k0_; }
    int last_slab() const { return k1_; }  // exclusive
    const std::vector<Vec2>& foot(int slab) const { return foot_[std::size_t(slab - k0_)]; }
    const std::vector<Vec2>& mid(int slab) const { return mid_[std::size_t(slab - k0_)]; }
    long clamp_events() const { return clamps_; }

private:
    Grid2D grid_;
    TimeGrid tg_;
    int k0_, k1_;
    std::vector<std::vector<Vec2>> foot_, mid_;
    long clamps_ = 0;
};

struct TransportProblem {
    const Characteristics* chars = nullptr;
    ScalarField initial;              // on the characteristics grid
    std::vector<ScalarField> source;  // at time nodes k0..k1 (linear in time); empty = none
    int k0 = 0, k1 = 0;               // time-node interval
    bool limit_range = true;          // clip to the datum range (source-free problems only)
};

// Semi-Lagrangian solve: u(x, t_{k+1}) = u(foot, t_k) + dt * g(mid, t_k + dt/2).
// Returns the solution at time nodes k0..k1.
std::vector<ScalarField> solve_transport(const TransportProblem& p, Exec exec = Exec::Parallel);

// Buoyancy source k2 d1 theta - k1 d2 theta (the curl of k theta).
ScalarField buoyancy_source(const ScalarField& theta, Vec2 k);

// Extension operators from the physical domain to the outer grid, supported in omega2.
struct ExtensionPair {
    ExtensionOperator scalar;
    ExtensionOperator vector;
};

struct TemperatureStage {
    std::vector<ScalarField> theta_star;  // outer grid, nodes 0..n/2
    std::vector<ScalarField> theta;       // physical domain, nodes 0..n (zero from n/2 on)
    double flush_max = 0.0;               // max |theta*(1/2)| on closure(omega2)
    double omega_residual = 0.0;          // max |theta*(1/2)| on the physical domain
    double datum_max = 0.0;
};

// Transports the extended temperature on [0,1/2] and glues it with zero on [1/2,1].
// flush_rel scales the allowed residual on closure(omega2) by the datum's sup norm.
TemperatureStage temperature_stage(const Characteristics& ch, const ScalarField& theta0, const ExtensionPair& ext,
                                   const Rect& omega2, double flush_rel, Exec exec = Exec::Parallel);

struct VorticityStage {
    std::vector<ScalarField> zeta_star;  // outer grid, nodes 0..n/2
    std::vector<ScalarField> zeta;       // physical domain, nodes 0..n
    double flush_max = 0.0;              // max |zeta**(1)| on closure(omega2)
    double omega_residual = 0.0;         // max |zeta**(1)| on the physical domain
    double reference = 0.0;              // max |zeta*| on closure(omega2) over [0,1/2]
};

// Vorticity with buoyancy forcing on [0,1/2] from curl of the extended y0, then a source-free
// restart from the extended restriction at 1/2.
VorticityStage vorticity_stage(const Characteristics& ch, const VectorField& y0, const std::vector<ScalarField>& theta_star,
                               Vec2 k, const ExtensionPair& ext, const Rect& omega2, double flush_rel,
                               Exec exec = Exec::Parallel);

} // namespace bouss

#pragma once

#include <bouss/exec.hpp>
#include <bouss/field.hpp>
#include <bouss/potential.hpp>
#include <bouss/time_profiles.hpp>

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bouss {

struct FlowMapConfig {
    int base_substeps = 4;           // RK4 sub-steps per time slab
    double cells_per_substep = 1.0;  // sub-steps are added until one moves at most this many cells
};

// Velocity samples at the time nodes of tg (or a single steady field), linear in time.
struct VelocityHistory {
    TimeGrid tg;
    std::vector<VectorField> fields;
    int i0 = 0, i1 = -1, j0 = 0, j1 = -1;  // node box outside which all fields vanish
    std::vector<double> sup;               // max |v| per field

    static VelocityHistory make(const TimeGrid& tg, std::vector<VectorField> fields);
    bool steady() const { return fields.size() == 1; }
    bool empty() const { return i1 < i0; }
};

// Characteristics of v(x,t) = M gamma(t) grad phi(x) + p(x,t) + f(x,t) on a grid, with bicubic
// spatial interpolation and classical RK4 in time.
class FlowMap {
public:
    FlowMap(const Grid2D& grid, const Rect& domain, const TimeGrid& tg, FlowMapConfig cfg = {});
    FlowMap(const FlowMap& o);

    FlowMap& with_return_field(std::shared_ptr<const ReturnPotential> rp, const TimeProfile& gamma, double M);
    FlowMap& with_perturbation(std::shared_ptr<const VelocityHistory> p);
    FlowMap& with_function(std::function<Vec2(Vec2, double)> f, double speed_bound);

    Vec2 velocity(Vec2 x, double t) const;
    // position at time t of the particle that sits at x at time s
    Vec2 advect_point(Vec2 x, double t, double s) const;
    std::vector<Vec2> advect_batch(const std::vector<Vec2>& xs, double t, double s, Exec exec) const;

    int substeps(int slab) const { return sub_[std::size_t(slab)]; }
    long clamp_events() const { return clamps_->load(); }
    void reset_clamp_events() const { clamps_->store(0); }

    const Grid2D& grid() const { return grid_; }
    const TimeGrid& time_grid() const { return tg_; }
    const Rect& domain() const { return domain_; }
    double M() const { return M_; }
    std::shared_ptr<const ReturnPotential> potential() const { return rp_; }
    const TimeProfile& gamma() const { return gamma_; }
    const FlowMapConfig& config() const { return cfg_; }
    // upper bound on |v| over the whole time interval
    double speed_bound() const { return vmax_; }

private:
    void rebuild_substeps();
    Vec2 rk4_piece(Vec2 x, double a, double b, int n) const;

    Grid2D grid_;
    Rect domain_;
    TimeGrid tg_;
    FlowMapConfig cfg_;
    std::shared_ptr<const ReturnPotential> rp_;
    TimeProfile gamma_;
    double M_ = 0.0;
    std::shared_ptr<const VelocityHistory> pert_;
    Rect pert_box_{};
    std::function<Vec2(Vec2, double)> fn_;
    double fn_bound_ = 0.0;
    std::vector<int> sub_;
    double vmax_ = 0.0;
    std::shared_ptr<std::atomic<long>> clamps_;
};

// Distance from p to the closed rectangle (0 inside).
double distance_to_rect(const Rect& r, Vec2 p);

struct FlushCertificate {
    double M = 0.0;
    bool ok = false;
    double clearance_first = 0.0;   // min distance to closure(omega2) of Y(x,1/2,0)
    double clearance_second = 0.0;  // min distance to closure(omega2) of Y(x,1,1/2)
    double clearance = 0.0;         // min of both
    double required = 0.0;          // 2h
    double predicted_threshold = 0.0;  // width(omega2) / int_0^{1/2} gamma
    std::vector<std::pair<double, double>> history;  // (M, clearance) per tried M
    std::string detail;
};

std::vector<Vec2> closure_nodes(const Grid2D& grid, const Rect& r, int stride = 1);

// Minimum clearance of the two flush checkpoints for a flow map.
void flush_clearances(const FlowMap& fm, const std::vector<Vec2>& pts, const Rect& omega2, Exec exec,
                      double& first, double& second);

FlushCertificate select_M(std::shared_ptr<const ReturnPotential> rp, const TimeProfile& gamma,
                          const TimeGrid& tg, FlowMapConfig cfg = {}, double M_max = 65536.0,
                          Exec exec = Exec::Parallel);

struct FlowProperties {
    double identity_error = 0.0;  // max |Y(x,s,s) - x|
    double inverse_error = 0.0;   // max |Y(Y(x,t,s),s,t) - x| over the tested (s,t) pairs
    double group_error = 0.0;     // max |Y(Y(x,r,s),t,r) - Y(x,t,s)|
    double min_phi_slope = 0.0;   // min over node slabs of d/dt phi(Y) while inside closure(omega2)
    std::size_t particles = 0;
};

// Identity, inverse and group checks on the given particles, plus monotonicity of the potential
// along the return field alone (rebuilt from the flow map's potential, profile and M).
FlowProperties flow_properties(const FlowMap& fm, const std::vector<Vec2>& pts, Exec exec);

struct NuLadderStep {
    double amplitude = 0.0;
    double worst_clearance = 0.0;
    bool pass = false;
};

struct NuEstimate {
    double nu = 0.0;          // largest passing amplitude (sup norm of the perturbation on omega)
    double nu_formula = 0.0;  // d / (2 C exp(M |grad phi| |gamma|))
    double clearance = 0.0;   // unperturbed clearance d
    std::vector<NuLadderStep> ladder;
};

struct NuOptions {
    int trials = 16;
    std::uint64_t seed = 7;
    int particles = 2000;
    double extension_bound = 10.0;
    Exec exec = Exec::Parallel;
};

// Random smooth velocity on the omega sub-grid with nodal sup equal to amplitude.
VectorField random_smooth_field(const Grid2D& omega_grid, double amplitude, std::uint64_t seed);

NuEstimate estimate_nu(std::shared_ptr<const ReturnPotential> rp, const TimeProfile& gamma, double M,
                       const TimeGrid& tg, const FlushCertificate& cert, FlowMapConfig cfg = {},
                       const NuOptions& opt = {});

} // namespace bouss

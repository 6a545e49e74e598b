#include <bouss/two_phase.hpp>
#include <bouss/errors.hpp>

#include <algorithm>
#include <sstream>

namespace bouss {

TwoPhaseResult two_phase_control(const ReturnInfra& inf, const HeatConfig& heat, const VectorField& y0,
                                 const VectorField& y1, const ScalarField& theta0, double T, double delta,
                                 double glue_tol) {
    if (!(heat.T_star > 0 && heat.T_star < T)) throw ValidationError("the temperature phase must end strictly before T");
    if (!y1.grid.same_as(inf.omega_grid)) throw ValidationError("target velocity must live on the physical-domain grid");
    TwoPhaseResult r;
    r.T = T;
    r.T_star = heat.T_star;
    r.first = theta_phase(inf.geo, y0, theta0, heat);
    r.theta_star_rel = r.first.terminal_rel;

    // the second phase starts from the velocity left by the first; its temperature is zero
    VectorField mid = r.first.y.back();
    mid.time = 0.0;
    const ScalarField zero(inf.omega_grid);
    r.second = global_exact_control(inf, mid, y1, zero, zero, T - heat.T_star, delta, glue_tol);
    for (const auto& f : r.second.theta) r.max_theta_second = std::max(r.max_theta_second, f.max_abs());
    r.theta_terminal = r.second.theta.back().max_abs();
    r.y_error = r.second.y_error;

    std::ostringstream os;
    bool ok = true;
    auto need = [&](bool c, const std::string& what) {
        if (!c) {
            ok = false;
            os << what << "; ";
        }
    };
    need(r.first.converged, "temperature fixed point did not converge");
    need(r.first.ball_ok, "temperature iterate left the unit ball");
    need(r.theta_star_rel <= heat.hum_tol, "temperature at T* above hum_tol");
    need(r.first.off_gamma_trace <= 1e-10, "temperature trace off the controlled side");
    need(r.second.pass, "velocity phase: " + r.second.detail);
    need(r.max_theta_second == 0.0, "temperature non-zero in the velocity phase");
    r.pass = ok;
    r.detail = ok ? "all two-phase audits passed" : os.str();
    return r;
}

} // namespace bouss

#pragma once

#include <bouss/heat.hpp>
#include <bouss/return_method.hpp>

namespace bouss {

struct TwoPhaseResult {
    ThetaPhaseResult first;   // temperature control on [0, T*]
    GlobalResult second;      // velocity control on [T*, T] with zero temperature
    double T = 1.0, T_star = 0.5;
    double y_error = 0.0;           // ||y(T) - y1|| relative
    double theta_terminal = 0.0;    // ||theta(T)||, exactly zero by construction
    double theta_star_rel = 0.0;    // ||theta(T*)|| / ||theta0||
    double max_theta_second = 0.0;  // max |theta| over [T*, T]
    bool pass = false;
    std::string detail;
};

// Temperature to zero at T* through the heat phase, then the return-method glue steers the
// velocity from y(T*) to y1 on [T*, T] with theta = 0. inf is built for the horizon T - T*.
TwoPhaseResult two_phase_control(const ReturnInfra& inf, const HeatConfig& heat, const VectorField& y0,
                                 const VectorField& y1, const ScalarField& theta0, double T, double delta,
                                 double glue_tol);

} // namespace bouss

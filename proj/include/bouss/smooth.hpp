#pragma once

#include <algorithm>

namespace bouss {

// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 clamped to [0,1].
inline double smoothstep5(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

// int_0^v smoothstep5 for v in [0,1] (clamped).
inline double smoothstep5_integral(double v) {
    v = std::clamp(v, 0.0, 1.0);
    const double v4 = v * v * v * v;
    return v4 * (v * (v - 3.0) + 2.5);
}

// 1 for s <= 0, 0 for s >= w, C2 quintic blend in between.
inline double cutoff(double s, double w) { return 1.0 - smoothstep5(s / w); }

// Cutoff in one coordinate: 1 on [lo, hi], zero beyond lo - wl and hi + wr.
inline double interval_cutoff(double x, double lo, double hi, double wl, double wr) {
    if (x < lo) return cutoff(lo - x, wl);
    if (x > hi) return cutoff(x - hi, wr);
    return 1.0;
}

} // namespace bouss

#pragma once

#include <bouss/grid.hpp>

#include <algorithm>
#include <cmath>

namespace bouss {

// Catmull-Rom (Keys, a = -1/2) cubic weights for fractional offset t in [0,1).
inline void cubic_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

// 4x4 bicubic stencil with clamped indices, shared across fields on one grid.
struct Stencil {
    int ix[4], jy[4];
    double wx[4], wy[4];
    int ci, cj;  // lower-left node of the containing cell
};

inline Stencil make_stencil(const Grid2D& g, Vec2 p) {
    Stencil s;
    const double fx = (p.x - g.x0()) / g.h();
    const double fy = (p.y - g.y0()) / g.h();
    int i = int(std::floor(fx)), j = int(std::floor(fy));
    i = std::clamp(i, 0, g.nx() - 1);
    j = std::clamp(j, 0, g.ny() - 1);
    const double tx = std::clamp(fx - i, 0.0, 1.0);
    const double ty = std::clamp(fy - j, 0.0, 1.0);
    cubic_weights(tx, s.wx);
    cubic_weights(ty, s.wy);
    for (int k = 0; k < 4; ++k) {
        s.ix[k] = std::clamp(i - 1 + k, 0, g.nx());
        s.jy[k] = std::clamp(j - 1 + k, 0, g.ny());
    }
    s.ci = i;
    s.cj = j;
    return s;
}

inline double apply_stencil(const Stencil& s, const double* f, int nxn) {
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        const double* row = f + std::size_t(s.jy[b]) * nxn;
        const double r = s.wx[0] * row[s.ix[0]] + s.wx[1] * row[s.ix[1]] +
                         s.wx[2] * row[s.ix[2]] + s.wx[3] * row[s.ix[3]];
        acc += s.wy[b] * r;
    }
    return acc;
}

inline double bicubic(const Grid2D& g, const double* f, Vec2 p) {
    return apply_stencil(make_stencil(g, p), f, g.nxn());
}

} // namespace bouss

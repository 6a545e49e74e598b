#include <bouss/transport.hpp>
#include <bouss/errors.hpp>
#include <bouss/interp.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bouss {

Characteristics::Characteristics(const FlowMap& fm, int k0, int k1, Exec exec)
    : grid_(fm.grid()), tg_(fm.time_grid()), k0_(k0), k1_(k1) {
    if (k0 < 0 || k1 > tg_.n_steps || k1 < k0) throw ValidationError("characteristics: slab range outside the time grid");
    std::vector<Vec2> nodes(grid_.size());
    for (int j = 0; j <= grid_.ny(); ++j)
        for (int i = 0; i <= grid_.nx(); ++i) nodes[grid_.idx(i, j)] = grid_.node(i, j);
    fm.reset_clamp_events();
    for (int k = k0; k < k1; ++k) {
        const double ta = tg_.t(k), tb = tg_.t(k + 1), tm = 0.5 * (ta + tb);
        mid_.push_back(fm.advect_batch(nodes, tm, tb, exec));
        foot_.push_back(fm.advect_batch(mid_.back(), ta, tm, exec));
    }
    clamps_ = fm.clamp_events();
}

namespace {

void check_finite(const ScalarField& f, int slab) {
    for (double v : f.v)
        if (!std::isfinite(v)) throw SolverError("transport produced a non-finite value in slab " + std::to_string(slab));
}

double max_abs_on(const ScalarField& f, const Rect& r) {
    const Grid2D& g = f.grid;
    const double tol = 1e-9 * g.h();
    double m = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            if (r.contains(g.node(i, j), tol)) m = std::max(m, std::abs(f(i, j)));
    return m;
}

} // namespace

std::vector<ScalarField> solve_transport(const TransportProblem& p, Exec exec) {
    if (!p.chars) throw ValidationError("transport problem has no characteristics");
    const Characteristics& ch = *p.chars;
    const Grid2D& g = ch.grid();
    if (!p.initial.grid.same_as(g)) throw ValidationError("transport datum lives on a different grid");
    if (p.k0 < ch.first_slab() || p.k1 > ch.last_slab() || p.k1 < p.k0)
        throw ValidationError("transport interval not covered by the characteristics");
    const bool has_src = !p.source.empty();
    if (has_src) {
        if (p.source.size() != std::size_t(p.k1 - p.k0 + 1))
            throw ValidationError("transport source must be sampled at every time node of the interval");
        for (const auto& s : p.source)
            if (!s.grid.same_as(g)) throw ValidationError("transport source lives on a different grid");
    }
    const bool clip = p.limit_range && !has_src;
    const double lo = p.initial.min(), hi = p.initial.max();
    const double dt = ch.time_grid().dt();
    const std::ptrdiff_t n = std::ptrdiff_t(g.size());

    std::vector<ScalarField> out;
    out.reserve(std::size_t(p.k1 - p.k0 + 1));
    out.push_back(p.initial);
    out.back().time = ch.time_grid().t(p.k0);
    std::vector<double> gm;
    for (int k = p.k0; k < p.k1; ++k) {
        const ScalarField& u = out.back();
        ScalarField next(g, 0.0, u.name);
        next.time = ch.time_grid().t(k + 1);
        const auto& foot = ch.foot(k);
        const auto& mid = ch.mid(k);
        const double* src0 = nullptr;
        if (has_src) {
            const auto& a = p.source[std::size_t(k - p.k0)].v;
            const auto& b = p.source[std::size_t(k - p.k0 + 1)].v;
            gm.resize(a.size());
            for (std::size_t q = 0; q < a.size(); ++q) gm[q] = 0.5 * (a[q] + b[q]);
            src0 = gm.data();
        }
        const double* uv = u.v.data();
        auto step = [&](std::ptrdiff_t q) {
            double v = bicubic(g, uv, foot[q]);
            if (src0) v += dt * bicubic(g, src0, mid[q]);
            if (clip) v = std::clamp(v, lo, hi);
            next.v[q] = v;
        };
        if (exec == Exec::Serial) {
            for (std::ptrdiff_t q = 0; q < n; ++q) step(q);
        } else {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t q = 0; q < n; ++q) step(q);
        }
        check_finite(next, k);
        out.push_back(std::move(next));
    }
    return out;
}

ScalarField buoyancy_source(const ScalarField& theta, Vec2 k) {
    ScalarField s(theta.grid, 0.0, "buoyancy");
    if (k.x == 0.0 && k.y == 0.0) throw ValidationError("buoyancy vector must be non-zero");
    const ScalarField a = d1(theta), b = d2(theta);
    for (std::size_t q = 0; q < s.v.size(); ++q) s.v[q] = k.y * a.v[q] - k.x * b.v[q];
    s.time = theta.time;
    return s;
}

TemperatureStage temperature_stage(const Characteristics& ch, const ScalarField& theta0, const ExtensionPair& ext,
                                   const Rect& omega2, double flush_rel, Exec exec) {
    const TimeGrid& tg = ch.time_grid();
    if (tg.n_steps % 2) throw ValidationError("the time grid needs an even number of slabs");
    const int half = tg.n_steps / 2;
    const Grid2D& og = ext.scalar.source_grid();
    if (!theta0.grid.same_as(og)) throw ValidationError("initial temperature is not on the physical-domain grid");

    TemperatureStage r;
    TransportProblem p;
    p.chars = &ch;
    p.initial = ext.scalar.extend_scalar(theta0);
    p.initial.name = "theta_star";
    p.k0 = 0;
    p.k1 = half;
    r.datum_max = p.initial.max_abs();
    r.theta_star = solve_transport(p, exec);

    const ScalarField& last = r.theta_star.back();
    r.flush_max = max_abs_on(last, omega2);
    const ScalarField last_omega = restrict_to(last, og);
    r.omega_residual = last_omega.max_abs();

    r.theta.reserve(std::size_t(tg.n_steps) + 1);
    for (int k = 0; k <= tg.n_steps; ++k) {
        ScalarField f = k < half ? restrict_to(r.theta_star[std::size_t(k)], og) : ScalarField(og, 0.0);
        f.name = "theta";
        f.time = tg.t(k);
        r.theta.push_back(std::move(f));
    }
    if (r.flush_max > flush_rel * r.datum_max) {
        std::ostringstream os;
        os << "max |theta*(1/2)| on closure(omega2) = " << r.flush_max << " exceeds " << flush_rel << " x datum "
           << r.datum_max;
        throw AuditFailure("transport", "temperature flush at t=1/2", os.str());
    }
    return r;
}

VorticityStage vorticity_stage(const Characteristics& ch, const VectorField& y0, const std::vector<ScalarField>& theta_star,
                               Vec2 k, const ExtensionPair& ext, const Rect& omega2, double flush_rel, Exec exec) {
    const TimeGrid& tg = ch.time_grid();
    if (tg.n_steps % 2) throw ValidationError("the time grid needs an even number of slabs");
    const int half = tg.n_steps / 2;
    if (theta_star.size() != std::size_t(half) + 1) throw ValidationError("temperature history does not cover [0,1/2]");
    const Grid2D& og = ext.vector.source_grid();
    if (!y0.grid.same_as(og)) throw ValidationError("initial velocity is not on the physical-domain grid");

    VorticityStage r;
    TransportProblem p1;
    p1.chars = &ch;
    p1.initial = curl(ext.vector.extend_vector(y0));
    p1.initial.name = "zeta_star";
    p1.k0 = 0;
    p1.k1 = half;
    bool forced = false;
    for (const auto& th : theta_star) forced = forced || th.max_abs() > 0.0;
    if (forced) {
        p1.source.reserve(theta_star.size());
        for (const auto& th : theta_star) p1.source.push_back(buoyancy_source(th, k));
    }
    r.zeta_star = solve_transport(p1, exec);
    for (const auto& z : r.zeta_star) r.reference = std::max(r.reference, max_abs_on(z, omega2));

    TransportProblem p2;
    p2.chars = &ch;
    p2.initial = ext.scalar.extend_scalar(restrict_to(r.zeta_star.back(), og));
    p2.initial.name = "zeta_star_star";
    p2.k0 = half;
    p2.k1 = tg.n_steps;
    const auto second = solve_transport(p2, exec);

    r.zeta.reserve(std::size_t(tg.n_steps) + 1);
    for (int q = 0; q <= tg.n_steps; ++q) {
        ScalarField f = q <= half ? restrict_to(r.zeta_star[std::size_t(q)], og) : restrict_to(second[std::size_t(q - half)], og);
        f.name = "zeta";
        f.time = tg.t(q);
        r.zeta.push_back(std::move(f));
    }
    r.flush_max = max_abs_on(second.back(), omega2);
    r.omega_residual = r.zeta.back().max_abs();
    if (r.flush_max > flush_rel * r.reference) {
        std::ostringstream os;
        os << "max |zeta**(1)| on closure(omega2) = " << r.flush_max << " exceeds " << flush_rel << " x reference "
           << r.reference;
        throw AuditFailure("transport", "vorticity flush at t=1", os.str());
    }
    return r;
}

} // namespace bouss

#include <bouss/flow_map.hpp>
#include <bouss/errors.hpp>
#include <bouss/extension.hpp>
#include <bouss/interp.hpp>

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>
#include <sstream>

namespace bouss {

VelocityHistory VelocityHistory::make(const TimeGrid& tg, std::vector<VectorField> fields) {
    if (fields.empty()) throw ValidationError("velocity history needs at least one field");
    if (fields.size() != 1 && fields.size() != std::size_t(tg.n_steps) + 1)
        throw ValidationError("velocity history length does not match the time grid");
    VelocityHistory h;
    h.tg = tg;
    const Grid2D& g = fields[0].grid;
    h.i0 = g.nx() + 1;
    h.j0 = g.ny() + 1;
    h.i1 = -1;
    h.j1 = -1;
    for (const auto& f : fields) {
        if (!f.grid.same_as(g)) throw ValidationError("velocity history fields live on different grids");
        double s = 0.0;
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) {
                const std::size_t k = g.idx(i, j);
                const double m = std::max(std::abs(f.u[k]), std::abs(f.w[k]));
                if (!std::isfinite(m)) throw SolverError("velocity history contains non-finite values");
                if (m != 0.0) {
                    h.i0 = std::min(h.i0, i);
                    h.i1 = std::max(h.i1, i);
                    h.j0 = std::min(h.j0, j);
                    h.j1 = std::max(h.j1, j);
                }
                s = std::max(s, std::hypot(f.u[k], f.w[k]));
            }
        h.sup.push_back(s);
    }
    h.fields = std::move(fields);
    return h;
}

FlowMap::FlowMap(const Grid2D& grid, const Rect& domain, const TimeGrid& tg, FlowMapConfig cfg)
    : grid_(grid), domain_(domain), tg_(tg), cfg_(cfg), clamps_(std::make_shared<std::atomic<long>>(0)) {
    if (cfg.base_substeps < 1) throw ValidationError("flow map needs at least one sub-step per slab");
    if (!(cfg.cells_per_substep > 0)) throw ValidationError("cells_per_substep must be positive");
    rebuild_substeps();
}

FlowMap::FlowMap(const FlowMap& o)
    : grid_(o.grid_), domain_(o.domain_), tg_(o.tg_), cfg_(o.cfg_), rp_(o.rp_), gamma_(o.gamma_), M_(o.M_),
      pert_(o.pert_), pert_box_(o.pert_box_), fn_(o.fn_), fn_bound_(o.fn_bound_), sub_(o.sub_), vmax_(o.vmax_),
      clamps_(std::make_shared<std::atomic<long>>(0)) {}

FlowMap& FlowMap::with_return_field(std::shared_ptr<const ReturnPotential> rp, const TimeProfile& gamma, double M) {
    if (!rp->grid.same_as(grid_)) throw ValidationError("return potential lives on a different grid");
    if (!std::isfinite(M) || M < 0) throw ValidationError("flow map scale M must be finite and non-negative");
    rp_ = std::move(rp);
    gamma_ = gamma;
    M_ = M;
    rebuild_substeps();
    return *this;
}

FlowMap& FlowMap::with_perturbation(std::shared_ptr<const VelocityHistory> p) {
    if (p && !p->fields[0].grid.same_as(grid_)) throw ValidationError("perturbation lives on a different grid");
    if (p && !p->steady() && p->tg.n_steps != tg_.n_steps) throw ValidationError("perturbation time grid mismatch");
    pert_ = std::move(p);
    if (pert_ && !pert_->empty()) {
        // points whose bicubic stencil can touch a non-zero node
        const double h = grid_.h();
        pert_box_ = Rect{grid_.x(pert_->i0) - 2 * h, grid_.x(pert_->i1) + 2 * h, grid_.y(pert_->j0) - 2 * h,
                         grid_.y(pert_->j1) + 2 * h};
    }
    rebuild_substeps();
    return *this;
}

FlowMap& FlowMap::with_function(std::function<Vec2(Vec2, double)> f, double speed_bound) {
    fn_ = std::move(f);
    fn_bound_ = speed_bound;
    rebuild_substeps();
    return *this;
}

void FlowMap::rebuild_substeps() {
    sub_.assign(std::size_t(tg_.n_steps), cfg_.base_substeps);
    const double dt = tg_.dt(), h = grid_.h();
    vmax_ = 0.0;
    for (int k = 0; k < tg_.n_steps; ++k) {
        double vmax = fn_bound_;
        if (rp_ && M_ > 0) vmax += M_ * gamma_.sup_on(tg_.t(k), tg_.t(k + 1)) * rp_->grad_sup;
        if (pert_ && !pert_->empty())
            vmax += pert_->steady() ? pert_->sup[0] : std::max(pert_->sup[k], pert_->sup[k + 1]);
        vmax_ = std::max(vmax_, vmax);
        const double need = std::ceil(dt * vmax / (cfg_.cells_per_substep * h) - 1e-9);
        sub_[k] = std::max(cfg_.base_substeps, int(std::min(need, 1e6)));
    }
}

Vec2 FlowMap::velocity(Vec2 x, double t) const {
    Vec2 v{0.0, 0.0};
    const bool need_ret = rp_ && M_ > 0;
    const bool need_pert = pert_ && !pert_->empty() && pert_box_.contains(x);
    if (need_ret || need_pert) {
        const Stencil st = make_stencil(grid_, x);
        const int nxn = grid_.nxn();
        if (need_ret) {
            const double a = M_ * gamma_(t);
            if (a != 0.0) {
                v.x += a * apply_stencil(st, rp_->grad_phi.u.data(), nxn);
                v.y += a * apply_stencil(st, rp_->grad_phi.w.data(), nxn);
            }
        }
        if (need_pert) {
            if (pert_->steady()) {
                v.x += apply_stencil(st, pert_->fields[0].u.data(), nxn);
                v.y += apply_stencil(st, pert_->fields[0].w.data(), nxn);
            } else {
                const int k = tg_.slab_of(t);
                const double th = std::clamp((t - tg_.t(k)) / tg_.dt(), 0.0, 1.0);
                const VectorField& f0 = pert_->fields[std::size_t(k)];
                const VectorField& f1 = pert_->fields[std::size_t(k) + 1];
                if (th < 1.0) {
                    v.x += (1.0 - th) * apply_stencil(st, f0.u.data(), nxn);
                    v.y += (1.0 - th) * apply_stencil(st, f0.w.data(), nxn);
                }
                if (th > 0.0) {
                    v.x += th * apply_stencil(st, f1.u.data(), nxn);
                    v.y += th * apply_stencil(st, f1.w.data(), nxn);
                }
            }
        }
    }
    if (fn_) v += fn_(x, t);
    return v;
}

Vec2 FlowMap::rk4_piece(Vec2 x, double a, double b, int n) const {
    const double dt = (b - a) / n;
    for (int s = 0; s < n; ++s) {
        const double t = a + s * dt;
        const Vec2 k1 = velocity(x, t);
        const Vec2 k2 = velocity(x + (0.5 * dt) * k1, t + 0.5 * dt);
        const Vec2 k3 = velocity(x + (0.5 * dt) * k2, t + 0.5 * dt);
        const Vec2 k4 = velocity(x + dt * k3, t + dt);
        Vec2 y = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(y.x) || !std::isfinite(y.y)) throw SolverError("flow map: non-finite velocity");
        const Vec2 c{std::clamp(y.x, domain_.x0, domain_.x1), std::clamp(y.y, domain_.y0, domain_.y1)};
        if (!(c == y)) clamps_->fetch_add(1, std::memory_order_relaxed);
        x = c;
    }
    return x;
}

Vec2 FlowMap::advect_point(Vec2 x, double t, double s) const {
    if (t == s) return x;
    const double dt = tg_.dt();
    const double dir = t > s ? 1.0 : -1.0;
    double a = s;
    while ((t - a) * dir > 0) {
        // next slab boundary in the direction of travel
        const double f = (a - tg_.t0) / dt;
        double kb = dir > 0 ? std::floor(f + 1e-12) + 1.0 : std::ceil(f - 1e-12) - 1.0;
        double b = tg_.t0 + kb * dt;
        if ((b - t) * dir > 0) b = t;
        const int slab = tg_.slab_of(0.5 * (a + b));
        const int n = std::max(1, int(std::ceil(sub_[std::size_t(slab)] * std::abs(b - a) / dt - 1e-9)));
        x = rk4_piece(x, a, b, n);
        a = b;
    }
    return x;
}

std::vector<Vec2> FlowMap::advect_batch(const std::vector<Vec2>& xs, double t, double s, Exec exec) const {
    std::vector<Vec2> out(xs.size());
    const std::ptrdiff_t n = std::ptrdiff_t(xs.size());
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = advect_point(xs[k], t, s);
        return out;
    }
    bool bad = false;
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            out[k] = advect_point(xs[k], t, s);
        } catch (...) {
#pragma omp atomic write
            bad = true;
        }
    }
    if (bad) throw SolverError("flow map: non-finite velocity during batch advection");
    return out;
}

double distance_to_rect(const Rect& r, Vec2 p) {
    const double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
    const double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
    return std::hypot(dx, dy);
}

std::vector<Vec2> closure_nodes(const Grid2D& grid, const Rect& r, int stride) {
    const int i0 = grid.line_i(r.x0), i1 = grid.line_i(r.x1), j0 = grid.line_j(r.y0), j1 = grid.line_j(r.y1);
    std::vector<Vec2> pts;
    for (int j = j0; j <= j1; j += stride)
        for (int i = i0; i <= i1; i += stride) pts.push_back(grid.node(i, j));
    return pts;
}

void flush_clearances(const FlowMap& fm, const std::vector<Vec2>& pts, const Rect& omega2, Exec exec,
                      double& first, double& second) {
    const double t0 = fm.time_grid().t0, t1 = fm.time_grid().t1, th = 0.5 * (t0 + t1);
    const auto a = fm.advect_batch(pts, th, t0, exec);
    const auto b = fm.advect_batch(pts, t1, th, exec);
    first = second = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        first = std::min(first, distance_to_rect(omega2, a[k]));
        second = std::min(second, distance_to_rect(omega2, b[k]));
    }
}

FlushCertificate select_M(std::shared_ptr<const ReturnPotential> rp, const TimeProfile& gamma, const TimeGrid& tg,
                          FlowMapConfig cfg, double M_max, Exec exec) {
    if (gamma.half_integral() <= 0.0 || gamma.integral(0.5, 1.0) <= 0.0)
        throw ValidationError("gamma must have positive mass on both halves of [0,1]");
    const Rect& o2 = rp->geom.omega2;
    const double h = rp->grid.h();
    FlushCertificate c;
    c.required = 2.0 * h;
    c.predicted_threshold = o2.width() / gamma.half_integral();
    const auto pts = closure_nodes(rp->grid, o2);
    for (double M = 1.0; M <= M_max; M *= 2.0) {
        FlowMap fm(rp->grid, rp->geom.omega3, tg, cfg);
        fm.with_return_field(rp, gamma, M);
        double a, b;
        flush_clearances(fm, pts, o2, exec, a, b);
        c.history.emplace_back(M, std::min(a, b));
        if (a >= c.required && b >= c.required) {
            c.M = M;
            c.ok = true;
            c.clearance_first = a;
            c.clearance_second = b;
            c.clearance = std::min(a, b);
            std::ostringstream os;
            os << "M=" << M << " flushes closure(omega2) with clearance " << c.clearance << " >= " << c.required;
            c.detail = os.str();
            return c;
        }
    }
    std::ostringstream os;
    os << "no M <= " << M_max << " flushes closure(omega2); geometry and profile cannot flush";
    c.detail = os.str();
    throw AuditFailure("flow_map", "flushing of the second domain", c.detail);
}

FlowProperties flow_properties(const FlowMap& fm, const std::vector<Vec2>& pts, Exec exec) {
    FlowProperties r;
    r.particles = pts.size();
    const TimeGrid& tg = fm.time_grid();
    const double t0 = tg.t0, t1 = tg.t1, len = t1 - t0;
    for (const Vec2& p : pts) r.identity_error = std::max(r.identity_error, (fm.advect_point(p, 0.37, 0.37) - p).norm());

    const std::pair<double, double> spans[] = {{t0, t0 + 0.5 * len}, {t0 + 0.5 * len, t1}, {t0 + 0.13 * len, t0 + 0.71 * len}};
    for (auto [s, t] : spans) {
        const auto fwd = fm.advect_batch(pts, t, s, exec);
        const auto back = fm.advect_batch(fwd, s, t, exec);
        for (std::size_t k = 0; k < pts.size(); ++k) r.inverse_error = std::max(r.inverse_error, (back[k] - pts[k]).norm());
    }
    const double rr = t0 + 0.3 * len;
    const auto direct = fm.advect_batch(pts, t1, t0, exec);
    const auto a = fm.advect_batch(pts, rr, t0, exec);
    const auto b = fm.advect_batch(a, t1, rr, exec);
    for (std::size_t k = 0; k < pts.size(); ++k) r.group_error = std::max(r.group_error, (b[k] - direct[k]).norm());

    r.min_phi_slope = std::numeric_limits<double>::infinity();
    const auto rp = fm.potential();
    if (!rp) {
        r.min_phi_slope = 0.0;
        return r;
    }
    FlowMap ret(fm.grid(), fm.domain(), tg, fm.config());
    ret.with_return_field(rp, fm.gamma(), fm.M());
    const Rect& o2 = rp->geom.omega2;
    const double* phi = rp->phi.v.data();
    std::vector<Vec2> cur = pts;
    std::vector<double> val(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) val[k] = bicubic(rp->grid, phi, cur[k]);
    for (int q = 0; q < tg.n_steps; ++q) {
        const auto next = ret.advect_batch(cur, tg.t(q + 1), tg.t(q), exec);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const double v = bicubic(rp->grid, phi, next[k]);
            if (o2.contains(cur[k]) && o2.contains(next[k]))
                r.min_phi_slope = std::min(r.min_phi_slope, (v - val[k]) / tg.dt());
            val[k] = v;
        }
        cur = next;
    }
    if (!std::isfinite(r.min_phi_slope)) r.min_phi_slope = 0.0;
    return r;
}

VectorField random_smooth_field(const Grid2D& g, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    constexpr int K = 3;
    double a[2][K][K];
    for (auto& c : a)
        for (auto& r : c)
            for (double& x : r) x = nd(rng);
    VectorField f(g, "random_smooth");
    const Rect b = g.bounds();
    const double pi = 3.14159265358979323846;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const double X = (g.x(i) - b.x0) / b.width(), Y = (g.y(j) - b.y0) / b.height();
            double s[2] = {0.0, 0.0};
            for (int c = 0; c < 2; ++c)
                for (int p = 0; p < K; ++p)
                    for (int q = 0; q < K; ++q) s[c] += a[c][p][q] * std::cos(pi * p * X) * std::cos(pi * q * Y) / (1.0 + p * p + q * q);
            f.u[g.idx(i, j)] = s[0];
            f.w[g.idx(i, j)] = s[1];
        }
    const double m = f.max_abs();
    if (m > 0)
        for (std::size_t k = 0; k < f.u.size(); ++k) {
            f.u[k] *= amplitude / m;
            f.w[k] *= amplitude / m;
        }
    return f;
}

NuEstimate estimate_nu(std::shared_ptr<const ReturnPotential> rp, const TimeProfile& gamma, double M,
                       const TimeGrid& tg, const FlushCertificate& cert, FlowMapConfig cfg, const NuOptions& opt) {
    const double d = cert.clearance;
    if (!(d > 0.0)) throw ValidationError("estimate_nu needs a flush certificate with positive clearance");
    NuEstimate est;
    est.clearance = d;
    const StripGeometry& geo = rp->geom;
    const Grid2D omega_grid = rp->grid.subgrid(geo.omega);
    ExtensionOperator pi2(geo.omega, rp->grid, geo.omega2);
    const Rect& o2 = geo.omega2;
    auto all = closure_nodes(rp->grid, o2);
    const int stride = std::max(1, int(std::sqrt(double(all.size()) / std::max(1, opt.particles))));
    const auto pts = closure_nodes(rp->grid, o2, stride);

    std::vector<double> amps;
    for (double f = 4.0; f >= 1.0 / 1024.0; f *= 0.5) amps.push_back(f * d);
    est.nu = 0.0;
    for (double amp : amps) {
        NuLadderStep step;
        step.amplitude = amp;
        step.worst_clearance = std::numeric_limits<double>::infinity();
        for (int tr = 0; tr < opt.trials; ++tr) {
            VectorField w = random_smooth_field(omega_grid, amp, opt.seed * 1000003ULL + std::uint64_t(tr));
            auto hist = std::make_shared<VelocityHistory>(VelocityHistory::make(tg, {pi2.extend_vector(w)}));
            FlowMap fm(rp->grid, geo.omega3, tg, cfg);
            fm.with_return_field(rp, gamma, M).with_perturbation(hist);
            double a, b;
            flush_clearances(fm, pts, o2, opt.exec, a, b);
            step.worst_clearance = std::min({step.worst_clearance, a, b});
        }
        step.pass = step.worst_clearance >= 0.5 * d;
        est.ladder.push_back(step);
        if (step.pass && est.nu == 0.0) est.nu = amp;
    }
    double gsup = 0.0;
    for (int k = 0; k <= 1000; ++k) gsup = std::max(gsup, std::abs(gamma(k / 1000.0)));
    est.nu_formula = d / (2.0 * opt.extension_bound * std::exp(M * rp->grad_sup * gsup));
    return est;
}

} // namespace bouss

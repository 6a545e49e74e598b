#include <bouss/return_method.hpp>
#include <bouss/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace bouss {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

std::vector<VectorField> diff(const std::vector<VectorField>& a, const std::vector<VectorField>& b) {
    std::vector<VectorField> d;
    d.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) d.push_back(a[k] - b[k]);
    return d;
}

double norm01(const ReturnInfra& inf, const std::vector<VectorField>& d) {
    return time_sup_norm(d, 1, inf.cfg.alpha, inf.cfg.holder);
}

double norm02(const ReturnInfra& inf, const std::vector<VectorField>& d) {
    return time_sup_norm(d, 2, inf.cfg.alpha, inf.cfg.holder);
}

} // namespace

std::shared_ptr<const ReturnInfra> ReturnInfra::build(const ReturnConfig& cfg) {
    if (cfg.n_steps < 2 || cfg.n_steps % 2) throw ValidationError("n_steps must be even and at least 2");
    if (!(cfg.fp_tol > 0) || !(cfg.flush_rel > 0) || !(cfg.nu > 0))
        throw ValidationError("fp_tol, flush_rel and nu must be positive");
    if (cfg.K_max < 1) throw ValidationError("K_max must be at least 1");
    if (cfg.k.x == 0.0 && cfg.k.y == 0.0) throw ValidationError("buoyancy vector k must be non-zero");
    auto inf = std::make_shared<ReturnInfra>();
    inf->cfg = cfg;
    inf->geo = build_strip_geometry(cfg.geometry);
    inf->outer = make_outer_grid(inf->geo, cfg.nx);
    inf->omega_grid = inf->outer.subgrid(inf->geo.omega);
    inf->tg = TimeGrid(0.0, 1.0, cfg.n_steps);
    inf->rp = std::make_shared<ReturnPotential>(solve_return_potential(inf->geo, inf->outer));
    const GradientFloorReport gf = verify_return_gradient_floor(*inf->rp, cfg.gradient_floor);
    if (!gf.pass) throw AuditFailure("harmonic_potential", "non-vanishing gradient and range of the potential", gf.detail);
    inf->gamma = TimeProfile::gamma(cfg.gamma_width, cfg.gamma_amplitude);
    inf->mu = TimeProfile::mu();

    if (cfg.M > 0.0) {
        FlowMap fm(inf->outer, inf->geo.omega3, inf->tg, cfg.flow);
        fm.with_return_field(inf->rp, inf->gamma, cfg.M);
        FlushCertificate c;
        c.M = cfg.M;
        c.required = 2.0 * inf->outer.h();
        c.predicted_threshold = inf->geo.omega2.width() / inf->gamma.half_integral();
        flush_clearances(fm, closure_nodes(inf->outer, inf->geo.omega2), inf->geo.omega2, cfg.exec, c.clearance_first,
                         c.clearance_second);
        c.clearance = std::min(c.clearance_first, c.clearance_second);
        c.history.emplace_back(cfg.M, c.clearance);
        c.ok = c.clearance >= c.required;
        if (!c.ok)
            throw AuditFailure("flow_map", "flushing of the second domain",
                               "configured M=" + fmt(cfg.M) + " leaves clearance " + fmt(c.clearance));
        inf->cert = c;
    } else {
        inf->cert = select_M(inf->rp, inf->gamma, inf->tg, cfg.flow, cfg.M_max, cfg.exec);
    }
    inf->M = inf->cert.M;

    inf->ext.scalar = ExtensionOperator(inf->geo.omega, inf->outer, inf->geo.omega2);
    inf->ext.vector = inf->ext.scalar;
    inf->stream = std::make_shared<StreamSolver>(inf->omega_grid);

    const VectorField gp = restrict_to(inf->rp->grad_phi, inf->omega_grid);
    for (int k = 0; k <= inf->tg.n_steps; ++k) {
        const double t = inf->tg.t(k);
        VectorField yb = (inf->M * inf->gamma(t)) * gp;
        yb.time = t;
        yb.name = "ybar";
        inf->ybar.push_back(std::move(yb));
        inf->mu_s.push_back(inf->mu(t));
    }
    return inf;
}

void check_velocity_contract(const VectorField& y0, const StripGeometry& geo) {
    const Grid2D& g = y0.grid;
    if (!(g.bounds() == geo.omega)) throw ValidationError("initial velocity must live on the physical-domain grid");
    const double m = y0.max_abs();
    if (!std::isfinite(m)) throw ValidationError("initial velocity has non-finite values");
    if (m == 0.0) return;
    const double div = max_divergence(y0);
    if (div > 1e-6 * m / g.h())
        throw ValidationError("initial velocity is not divergence-free: max |div| = " + fmt(div));
    double wn = 0.0;
    for (int i = 0; i <= g.nx(); ++i)
        wn = std::max({wn, std::abs(y0.w[g.idx(i, 0)]), std::abs(y0.w[g.idx(i, g.ny())])});
    if (wn > 1e-10 * m)
        throw ValidationError("initial velocity has a normal component on the uncontrolled sides: " + fmt(wn));
}

std::vector<VectorField> initial_iterate(const ReturnInfra& inf, const VectorField& y0) {
    std::vector<VectorField> z;
    for (int k = 0; k <= inf.tg.n_steps; ++k) {
        VectorField f = inf.ybar[std::size_t(k)] + inf.mu_s[std::size_t(k)] * y0;
        f.time = inf.tg.t(k);
        f.name = "z";
        z.push_back(std::move(f));
    }
    return z;
}

FEvaluation apply_F(const ReturnInfra& inf, const std::vector<VectorField>& z, const VectorField& y0,
                    const ScalarField& theta0) {
    const int n = inf.tg.n_steps;
    if (z.size() != std::size_t(n) + 1) throw ValidationError("iterate does not cover the time grid");
    for (const auto& f : z)
        if (!f.grid.same_as(inf.omega_grid)) throw ValidationError("iterate is not on the physical-domain grid");
    if (!theta0.grid.same_as(inf.omega_grid) || !y0.grid.same_as(inf.omega_grid))
        throw ValidationError("data are not on the physical-domain grid");

    std::vector<VectorField> pert;
    pert.reserve(z.size());
    for (int k = 0; k <= n; ++k) pert.push_back(inf.ext.vector.extend_vector(z[std::size_t(k)] - inf.ybar[std::size_t(k)]));
    auto hist = std::make_shared<VelocityHistory>(VelocityHistory::make(inf.tg, std::move(pert)));
    auto fm = std::make_shared<FlowMap>(inf.outer, inf.geo.omega3, inf.tg, inf.cfg.flow);
    fm->with_return_field(inf.rp, inf.gamma, inf.M).with_perturbation(hist);

    const Characteristics ch(*fm, 0, n, inf.cfg.exec);
    FEvaluation r;
    r.clamps = ch.clamp_events();
    TemperatureStage ts = temperature_stage(ch, theta0, inf.ext, inf.geo.omega2, inf.cfg.flush_rel, inf.cfg.exec);
    r.theta_flush = ts.flush_max;
    r.theta_residual = ts.omega_residual;
    r.theta_datum = ts.datum_max;
    VorticityStage vs =
        vorticity_stage(ch, y0, ts.theta_star, inf.cfg.k, inf.ext, inf.geo.omega2, inf.cfg.flush_rel, inf.cfg.exec);
    r.zeta_flush = vs.flush_max;
    r.zeta_residual = vs.omega_residual;
    r.zeta_reference = vs.reference;

    const ScalarField cy0 = curl(y0);
    r.y.reserve(std::size_t(n) + 1);
    for (int k = 0; k <= n; ++k) {
        Recovery rec = recover_velocity(*inf.stream, vs.zeta[std::size_t(k)], y0, inf.ybar[std::size_t(k)],
                                        inf.mu_s[std::size_t(k)], &cy0);
        r.stream_residual = std::max(r.stream_residual, rec.residual);
        rec.y.time = inf.tg.t(k);
        r.y.push_back(std::move(rec.y));
        r.psi.push_back(std::move(rec.psi));
    }
    r.theta = std::move(ts.theta);
    r.zeta = std::move(vs.zeta);
    r.flow = fm;
    return r;
}

std::string FixedPointReport::csv() const {
    std::ostringstream os;
    os << "iteration,step_01a,ball_02a,theta_residual,zeta_residual\n";
    for (const auto& r : iterations)
        os << r.iteration << ',' << fmt(r.step) << ',' << fmt(r.ball) << ',' << fmt(r.theta_residual) << ','
           << fmt(r.zeta_residual) << '\n';
    return os.str();
}

std::string ControlTrace::csv() const {
    std::ostringstream os;
    os << "t,side,arc,yn,inflow,y1,y2,theta\n";
    for (const auto& s : samples)
        os << fmt(s.t) << ',' << (s.side == 0 ? "left" : "right") << ',' << fmt(s.arc) << ',' << fmt(s.yn) << ','
           << (s.inflow ? 1 : 0) << ',' << fmt(s.y1) << ',' << fmt(s.y2) << ',' << fmt(s.theta) << '\n';
    return os.str();
}

ControlTrace extract_controls(const std::vector<VectorField>& y, const std::vector<ScalarField>& theta,
                              const std::vector<double>& times, const StripGeometry& geo) {
    if (y.size() != times.size() || theta.size() != times.size())
        throw ValidationError("control extraction: history lengths differ");
    ControlTrace tr;
    tr.times = times;
    double ymax = 0.0;
    for (const auto& f : y) ymax = std::max(ymax, f.max_abs());
    tr.inflow_threshold = 1e-10 * ymax;
    for (std::size_t q = 0; q < y.size(); ++q) {
        const Grid2D& g = y[q].grid;
        const FluxReport fr = boundary_flux_audit(y[q], geo);
        tr.flux.push_back(fr.value);
        tr.flux_tolerance = fr.tolerance;
        tr.max_flux = std::max(tr.max_flux, std::abs(fr.value));
        tr.flux_ok = tr.flux_ok && fr.pass;
        for (int side = 0; side < 2; ++side) {
            const int i = side == 0 ? 0 : g.nx();
            const double nx = side == 0 ? -1.0 : 1.0;
            for (int j = 0; j <= g.ny(); ++j) {
                ControlSample s;
                s.t = times[q];
                s.side = side;
                s.arc = j * g.h();
                s.y1 = y[q].u[g.idx(i, j)];
                s.y2 = y[q].w[g.idx(i, j)];
                s.yn = nx * s.y1;
                s.inflow = s.yn < -tr.inflow_threshold;
                s.theta = theta[q](i, j);
                tr.samples.push_back(s);
            }
        }
    }
    return tr;
}

LocalResult local_null_control(const ReturnInfra& inf, const VectorField& y0, const ScalarField& theta0) {
    check_velocity_contract(y0, inf.geo);
    if (!theta0.grid.same_as(inf.omega_grid)) throw ValidationError("initial temperature must live on the physical-domain grid");
    for (double v : theta0.v)
        if (!std::isfinite(v)) throw ValidationError("initial temperature has non-finite values");

    LocalResult res;
    res.theta0_max = theta0.max_abs();
    res.zeta0_max = curl(y0).max_abs();
    std::vector<VectorField> z = initial_iterate(inf, y0);
    const double nu = inf.cfg.nu;
    for (int it = 1; it <= inf.cfg.K_max; ++it) {
        FEvaluation F = apply_F(inf, z, y0, theta0);
        IterationRecord rec;
        rec.iteration = it;
        rec.step = norm01(inf, diff(F.y, z));
        rec.ball = norm02(inf, diff(F.y, inf.ybar));
        rec.theta_residual = F.theta_residual;
        rec.zeta_residual = F.zeta_residual;
        res.report.iterations.push_back(rec);
        if (rec.ball > 2.0 * nu) {
            std::ostringstream os;
            os << "||F(z) - ybar||_{0,2,alpha} = " << rec.ball << " > 2 nu = " << 2.0 * nu << " at iteration " << it
               << "; the data are too large for the ball";
            throw AuditFailure("return_method_control", "ball invariance of the fixed-point map", os.str());
        }
        if (rec.ball > nu)
            res.report.warnings.push_back("iteration " + std::to_string(it) + ": ball norm " + fmt(rec.ball) +
                                          " exceeds nu " + fmt(nu));
        const auto& its = res.report.iterations;
        if (its.size() >= 4 && rec.step > its[its.size() - 2].step)
            res.report.warnings.push_back("iteration " + std::to_string(it) + ": fixed-point step increased");
        z = F.y;
        res.state = std::move(F);
        if (rec.step <= inf.cfg.fp_tol) {
            res.report.converged = true;
            break;
        }
    }
    const FEvaluation& s = res.state;
    const int n = inf.tg.n_steps;
    res.theta_tail = s.theta_residual;
    for (int k = n / 2; k <= n; ++k) res.theta_tail = std::max(res.theta_tail, s.theta[std::size_t(k)].max_abs());
    res.zeta_terminal = s.zeta.back().max_abs();
    res.y_terminal = s.y.back().max_abs();
    res.zeta_scale = std::max(res.zeta0_max, s.zeta_reference);
    const double rel = inf.cfg.flush_rel;
    res.residuals_ok = res.theta_tail <= rel * res.theta0_max && res.zeta_terminal <= rel * res.zeta_scale;

    std::vector<double> times;
    for (int k = 0; k <= n; ++k) times.push_back(inf.tg.t(k));
    res.trace = extract_controls(s.y, s.theta, times, inf.geo);
    return res;
}

VectorField random_solenoidal(const Grid2D& g, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    constexpr int K = 3;
    double a[K][K];
    for (auto& r : a)
        for (double& x : r) x = nd(rng);
    const Rect b = g.bounds();
    const double pi = 3.14159265358979323846;
    const ScalarField psi = sample(g, [&](Vec2 p) {
        const double X = (p.x - b.x0) / b.width(), Y = (p.y - b.y0) / b.height();
        double s = 0.0;
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) s += a[i][j] * std::cos(pi * i * X) * std::cos(pi * j * Y) / (1.0 + i * i + j * j);
        return std::sin(pi * X) * std::sin(pi * Y) * s;
    });
    VectorField v = perp_grad(psi);
    const double m = v.max_abs();
    if (m > 0.0) v = (amplitude / m) * v;
    v.name = "random_solenoidal";
    return v;
}

std::string ContractionReport::csv() const {
    std::ostringstream os;
    os << "pair,distance";
    const std::size_t mm = ratios.empty() ? 0 : ratios[0].size();
    for (std::size_t m = 1; m <= mm; ++m) os << ",ratio_m" << m;
    os << '\n';
    for (std::size_t p = 0; p < ratios.size(); ++p) {
        os << p << ',' << fmt(distances[p]);
        for (double r : ratios[p]) os << ',' << fmt(r);
        os << '\n';
    }
    return os.str();
}

ContractionReport measure_contraction(const ReturnInfra& inf, const VectorField& y0, const ScalarField& theta0, int pairs,
                                      int m_max, double amplitude, std::uint64_t seed) {
    if (pairs < 1 || m_max < 1) throw ValidationError("contraction needs at least one pair and one power");
    const std::vector<VectorField> base = initial_iterate(inf, y0);
    auto perturbed = [&](std::uint64_t s) {
        const VectorField xi = random_solenoidal(inf.omega_grid, amplitude, s);
        std::vector<VectorField> z = base;
        for (auto& f : z) f = f + xi;
        return z;
    };
    // all pairs share the first member
    std::vector<std::vector<VectorField>> ref_chain{perturbed(seed)};
    for (int m = 1; m <= m_max; ++m) ref_chain.push_back(apply_F(inf, ref_chain.back(), y0, theta0).y);

    ContractionReport rep;
    rep.decreasing = true;
    rep.below_one = true;
    for (int p = 0; p < pairs; ++p) {
        std::vector<VectorField> b = perturbed(seed + 1 + std::uint64_t(p));
        const double d0 = norm01(inf, diff(ref_chain[0], b));
        std::vector<double> ratios;
        for (int m = 1; m <= m_max; ++m) {
            b = apply_F(inf, b, y0, theta0).y;
            ratios.push_back(norm01(inf, diff(ref_chain[std::size_t(m)], b)) / d0);
            if (m > 1 && !(ratios[std::size_t(m - 1)] < ratios[std::size_t(m - 2)])) rep.decreasing = false;
        }
        if (!(ratios.back() < 1.0)) rep.below_one = false;
        rep.ratios.push_back(std::move(ratios));
        rep.distances.push_back(d0);
    }
    return rep;
}

int choose_dyadic(double T, double delta, double y0n, double th0n, double y1n, double th1n) {
    if (!(T > 0) || !(delta > 0)) throw ValidationError("T and delta must be positive");
    for (int j = 1; j <= 60; ++j) {
        const double eps = 0.5 * T * std::ldexp(1.0, -j);
        const double a = std::max(eps * y0n, eps * eps * th0n);
        const double b = std::max(eps * y1n, eps * eps * th1n);
        if (a <= delta && b <= delta) return j;
    }
    std::ostringstream os;
    os << "no admissible eps: max(eps |y|, eps^2 |theta|) <= delta = " << delta << " fails down to eps = (T/2) 2^-60";
    throw ValidationError(os.str());
}

double reversal_deviation(const FlowMap& fm, const std::vector<Vec2>& pts, Exec exec) {
    const TimeGrid& tg = fm.time_grid();
    const double t0 = tg.t0, t1 = tg.t1;
    // both directions integrate the same sampled velocity with 4x finer sub-steps, so the
    // deviation measures reversibility rather than the step error of the production integrator
    FlowMapConfig fine = fm.config();
    fine.base_substeps *= 4;
    fine.cells_per_substep /= 4.0;
    FlowMap fwd_map(fm.grid(), fm.domain(), tg, fine);
    fwd_map.with_function([&fm](Vec2 x, double s) { return fm.velocity(x, s); }, fm.speed_bound());
    const auto fwd = fwd_map.advect_batch(pts, t1, t0, exec);
    FlowMap rev(fm.grid(), fm.domain(), tg, fine);
    rev.with_function([&fm, t0, t1](Vec2 x, double s) { return -1.0 * fm.velocity(x, t0 + t1 - s); }, fm.speed_bound());
    const auto back = rev.advect_batch(fwd, t1, t0, exec);
    double e = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) e = std::max(e, (back[k] - pts[k]).norm());
    return e;
}

GlobalResult global_exact_control(const ReturnInfra& inf, const VectorField& y0, const VectorField& y1,
                                  const ScalarField& theta0, const ScalarField& theta1, double T, double delta,
                                  double glue_tol) {
    const double a = inf.cfg.alpha;
    const HolderOptions& ho = inf.cfg.holder;
    const int j = choose_dyadic(T, delta, holder_norm(y0, 2, a, ho).total, holder_norm(theta0, 2, a, ho).total,
                                holder_norm(y1, 2, a, ho).total, holder_norm(theta1, 2, a, ho).total);
    GlobalResult g;
    g.T = T;
    g.dyadic = j;
    g.eps = 0.5 * T * std::ldexp(1.0, -j);
    const double e = g.eps;
    if (y0.max_abs() == 0.0 && y1.max_abs() == 0.0 && theta0.max_abs() == 0.0 && theta1.max_abs() == 0.0) {
        // the zero trajectory is an exact solution
        g.forward.report.converged = g.backward.report.converged = true;
        g.forward.residuals_ok = g.backward.residuals_ok = true;
        g.times = {0.0, T};
        g.y.assign(2, VectorField(inf.omega_grid, "y"));
        g.theta.assign(2, ScalarField(inf.omega_grid, 0.0, "theta"));
        g.y[1].time = g.theta[1].time = T;
        g.trace = extract_controls(g.y, g.theta, g.times, inf.geo);
        g.pass = g.trace.flux_ok;
        g.detail = "zero data: zero trajectory";
        return g;
    }
    g.forward = local_null_control(inf, e * y0, (e * e) * theta0);
    g.backward = local_null_control(inf, (-e) * y1, (e * e) * theta1);

    const int n = inf.tg.n_steps;
    for (int k = 0; k <= n; ++k) {
        g.times.push_back(e * inf.tg.t(k));
        g.y.push_back((1.0 / e) * g.forward.state.y[std::size_t(k)]);
        g.theta.push_back((1.0 / (e * e)) * g.forward.state.theta[std::size_t(k)]);
    }
    for (int k = n; k >= 0; --k) {
        g.times.push_back(T - e * inf.tg.t(k));
        g.y.push_back((-1.0 / e) * g.backward.state.y[std::size_t(k)]);
        g.theta.push_back((1.0 / (e * e)) * g.backward.state.theta[std::size_t(k)]);
    }
    for (std::size_t q = 0; q < g.times.size(); ++q) {
        g.y[q].time = g.theta[q].time = g.times[q];
    }

    const double yref = std::max({y1.max_abs(), y0.max_abs(), 1e-300});
    const double tref = std::max({theta1.max_abs(), theta0.max_abs(), 1e-300});
    g.y_error = max_abs_diff(g.y.back(), y1) / yref;
    g.theta_error = max_abs_diff(g.theta.back(), theta1) / tref;
    const double vscale = std::max({y0.max_abs(), y1.max_abs(), 1e-300});
    const double tscale = std::max({theta0.max_abs(), theta1.max_abs(), 1e-300});
    g.jump_first = std::max(g.y[std::size_t(n)].max_abs() / vscale, g.theta[std::size_t(n)].max_abs() / tscale);
    g.jump_second = std::max(g.y[std::size_t(n) + 1].max_abs() / vscale, g.theta[std::size_t(n) + 1].max_abs() / tscale);
    if (g.forward.state.flow)
        g.reversal_deviation =
            reversal_deviation(*g.forward.state.flow, closure_nodes(inf.outer, inf.geo.omega2, 4), inf.cfg.exec);
    g.trace = extract_controls(g.y, g.theta, g.times, inf.geo);

    std::ostringstream os;
    bool ok = true;
    auto need = [&](bool c, const std::string& what) {
        if (!c) {
            ok = false;
            os << what << "; ";
        }
    };
    need(g.forward.report.converged && g.backward.report.converged, "a local leg did not converge");
    need(g.forward.residuals_ok && g.backward.residuals_ok, "a local leg left flush residuals above tolerance");
    need(g.y_error <= glue_tol, "terminal velocity error " + fmt(g.y_error));
    need(g.theta_error <= glue_tol, "terminal temperature error " + fmt(g.theta_error));
    need(g.jump_first <= inf.cfg.flush_rel && g.jump_second <= inf.cfg.flush_rel, "gluing jump above flush tolerance");
    need(g.trace.flux_ok, "zero-mean flux audit failed (max " + fmt(g.trace.max_flux) + ")");
    need(g.reversal_deviation <= 1e-6, "time-reversal deviation " + fmt(g.reversal_deviation));
    g.pass = ok;
    g.detail = ok ? "all global audits passed" : os.str();
    return g;
}

} // namespace bouss

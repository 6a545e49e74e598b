#include <bouss/heat.hpp>
#include <bouss/div_curl.hpp>
#include <bouss/errors.hpp>
#include <bouss/extension.hpp>
#include <bouss/flow_map.hpp>
#include <bouss/transport.hpp>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

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

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using LU = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

} // namespace

ExtendedDomain ExtendedDomain::build(const StripGeometry& geo, double h, std::optional<Rect> patch) {
    ExtendedDomain d;
    d.omega = geo.omega;
    d.omega_tilde = {geo.omega.x0, geo.omega.x1, geo.omega.y0, geo.omega.y1 + geo.heat_extension};
    if (!(geo.heat_extension > 0)) throw ValidationError("heat extension height must be positive");
    d.grid = Grid2D::covering(d.omega_tilde, h);
    d.omega_grid = d.grid.subgrid(d.omega);
    const double e = geo.heat_extension;
    d.patch = patch ? *patch
                    : Rect{geo.omega.x0 + 0.1 * geo.omega.width(), geo.omega.x1 - 0.1 * geo.omega.width(),
                           geo.omega.y1 + 0.2 * e, geo.omega.y1 + 0.8 * e};
    if (!(d.patch.x0 < d.patch.x1 && d.patch.y0 < d.patch.y1)) throw ValidationError("control patch is empty");
    if (!d.omega_tilde.contains_rect(d.patch)) throw ValidationError("control patch leaves the extended domain");
    if (!(d.patch.y0 > d.omega.y1 || d.patch.y1 < d.omega.y0 || d.patch.x0 > d.omega.x1 || d.patch.x1 < d.omega.x0))
        throw ValidationError("control patch must be disjoint from the closed physical domain");
    d.patch_mask.assign(d.grid.size(), 0);
    int count = 0;
    for (int j = 1; j < d.grid.ny(); ++j)
        for (int i = 1; i < d.grid.nx(); ++i) {
            const Vec2 p = d.grid.node(i, j);
            // open patch: strict inequalities
            if (p.x > d.patch.x0 && p.x < d.patch.x1 && p.y > d.patch.y0 && p.y < d.patch.y1) {
                d.patch_mask[d.grid.idx(i, j)] = 1;
                ++count;
            }
        }
    if (count == 0) throw ValidationError("control patch contains no grid node");
    return d;
}

struct AdvectionDiffusion::Impl {
    int mx = 0, my = 0;  // interior nodes per direction
    std::vector<std::unique_ptr<LU>> lu;  // one per step, or a single shared one
    std::vector<int> which;               // step -> factorization index

    int n() const { return mx * my; }
    int id(int i, int j) const { return (j - 1) * mx + (i - 1); }
};

AdvectionDiffusion::AdvectionDiffusion(const Grid2D& g, double kappa, const TimeGrid& tg, std::vector<VectorField> w,
                                       std::vector<std::uint8_t> patch_mask)
    : grid_(g), tg_(tg), kappa_(kappa), patch_(std::move(patch_mask)), impl_(std::make_unique<Impl>()) {
    if (!(kappa > 0)) throw ValidationError("diffusivity must be positive");
    if (g.nx() < 2 || g.ny() < 2) throw ValidationError("advection-diffusion grid needs interior nodes");
    if (patch_.size() != g.size()) throw ValidationError("patch mask does not match the grid");
    const int nsteps = tg.n_steps;
    if (!w.empty() && w.size() != 1 && w.size() != std::size_t(nsteps) + 1)
        throw ValidationError("advecting velocity must be steady or sampled at every time node");
    double wmax = 0.0;
    for (const auto& f : w) {
        if (!f.grid.same_as(g)) throw ValidationError("advecting velocity lives on a different grid");
        const double m = f.max_abs();
        if (!std::isfinite(m)) throw ValidationError("advecting velocity has non-finite values");
        wmax = std::max(wmax, m);
    }
    peclet_ = g.h() * wmax / kappa;

    Impl& im = *impl_;
    im.mx = g.nx() - 1;
    im.my = g.ny() - 1;
    const double h = g.h(), dt = tg.dt();
    const double dif = dt * kappa / (h * h), adv = dt / (2.0 * h);
    auto assemble = [&](const VectorField* wf) {
        std::vector<Eigen::Triplet<double>> tr;
        tr.reserve(std::size_t(im.n()) * 5);
        for (int j = 1; j < g.ny(); ++j)
            for (int i = 1; i < g.nx(); ++i) {
                const int r = im.id(i, j);
                const double a = wf ? wf->u[g.idx(i, j)] : 0.0, b = wf ? wf->w[g.idx(i, j)] : 0.0;
                tr.emplace_back(r, r, 1.0 + 4.0 * dif);
                auto nb = [&](int ii, int jj, double c) {
                    if (ii >= 1 && ii < g.nx() && jj >= 1 && jj < g.ny()) tr.emplace_back(r, im.id(ii, jj), c);
                };
                nb(i - 1, j, -dif - adv * a);
                nb(i + 1, j, -dif + adv * a);
                nb(i, j - 1, -dif - adv * b);
                nb(i, j + 1, -dif + adv * b);
            }
        SpMat A(im.n(), im.n());
        A.setFromTriplets(tr.begin(), tr.end());
        A.makeCompressed();
        auto lu = std::make_unique<LU>();
        lu->compute(A);
        if (lu->info() != Eigen::Success) throw SolverError("advection-diffusion step matrix factorization failed");
        return lu;
    };
    im.which.assign(std::size_t(nsteps), 0);
    if (w.size() <= 1) {
        im.lu.push_back(assemble(w.empty() ? nullptr : &w[0]));
    } else {
        for (int s = 0; s < nsteps; ++s) {
            im.lu.push_back(assemble(&w[std::size_t(s) + 1]));
            im.which[std::size_t(s)] = s;
        }
    }
}

AdvectionDiffusion::~AdvectionDiffusion() = default;
AdvectionDiffusion::AdvectionDiffusion(AdvectionDiffusion&&) noexcept = default;
AdvectionDiffusion& AdvectionDiffusion::operator=(AdvectionDiffusion&&) noexcept = default;

namespace {

Vec gather(const Grid2D& g, const ScalarField& f, int mx, int my) {
    Vec x(mx * my);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) x[(j - 1) * mx + (i - 1)] = f(i, j);
    return x;
}

ScalarField scatter(const Grid2D& g, const Vec& x, int mx, double t, const char* name) {
    ScalarField f(g, 0.0, name);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) f(i, j) = x[(j - 1) * mx + (i - 1)];
    f.time = t;
    return f;
}

void check_history(const std::vector<ScalarField>* v, const Grid2D& g, int n) {
    if (!v) return;
    if (v->size() != std::size_t(n) + 1) throw ValidationError("control must be sampled at every time node");
    for (const auto& f : *v)
        if (!f.grid.same_as(g)) throw ValidationError("control lives on a different grid");
}

} // namespace

std::vector<ScalarField> AdvectionDiffusion::forward(const ScalarField& u0, const std::vector<ScalarField>* v) const {
    if (!u0.grid.same_as(grid_)) throw ValidationError("initial state lives on a different grid");
    const int n = tg_.n_steps;
    check_history(v, grid_, n);
    const Impl& im = *impl_;
    const double dt = tg_.dt();
    std::vector<ScalarField> out;
    out.reserve(std::size_t(n) + 1);
    out.push_back(u0);
    out.back().time = tg_.t(0);
    Vec x = gather(grid_, u0, im.mx, im.my);
    for (int s = 0; s < n; ++s) {
        if (v) {
            const ScalarField& c = (*v)[std::size_t(s) + 1];
            for (int j = 1; j < grid_.ny(); ++j)
                for (int i = 1; i < grid_.nx(); ++i)
                    if (patch_[grid_.idx(i, j)]) x[im.id(i, j)] += dt * c(i, j);
        }
        x = im.lu[std::size_t(im.which[std::size_t(s)])]->solve(x);
        if (!x.allFinite()) throw SolverError("advection-diffusion produced a non-finite state at step " + std::to_string(s));
        out.push_back(scatter(grid_, x, im.mx, tg_.t(s + 1), "u"));
    }
    return out;
}

ScalarField AdvectionDiffusion::terminal(const ScalarField& u0, const std::vector<ScalarField>* v) const {
    return forward(u0, v).back();
}

AdvectionDiffusion::Adjoint AdvectionDiffusion::adjoint(const ScalarField& gT) const {
    if (!gT.grid.same_as(grid_)) throw ValidationError("terminal weight lives on a different grid");
    const Impl& im = *impl_;
    const int n = tg_.n_steps;
    Adjoint a;
    a.control.assign(std::size_t(n) + 1, ScalarField(grid_, 0.0, "adjoint_control"));
    Vec lam = gather(grid_, gT, im.mx, im.my);
    for (int s = n - 1; s >= 0; --s) {
        lam = im.lu[std::size_t(im.which[std::size_t(s)])]->transpose().solve(lam);
        ScalarField& c = a.control[std::size_t(s) + 1];
        c.time = tg_.t(s + 1);
        for (int j = 1; j < grid_.ny(); ++j)
            for (int i = 1; i < grid_.nx(); ++i)
                if (patch_[grid_.idx(i, j)]) c(i, j) = lam[im.id(i, j)];
    }
    a.at_zero = scatter(grid_, lam, im.mx, tg_.t(0), "adjoint");
    return a;
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s) * f.grid.h();
}

double control_norm(const std::vector<ScalarField>& v, double dt) {
    double s = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double n = l2_norm(v[k]);
        s += n * n;
    }
    return std::sqrt(dt * s);
}

namespace {

double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return s * a.grid.h() * a.grid.h();
}

} // namespace

double transpose_gap(const AdvectionDiffusion& op, std::uint64_t seed) {
    const Grid2D& g = op.grid();
    const int n = op.time_grid().n_steps;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto random_field = [&](bool interior_only) {
        ScalarField f(g);
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) {
                const bool inner = i > 0 && j > 0 && i < g.nx() && j < g.ny();
                f(i, j) = (!interior_only || inner) ? U(rng) : 0.0;
            }
        return f;
    };
    const ScalarField u0 = random_field(true), gT = random_field(true);
    std::vector<ScalarField> v(std::size_t(n) + 1, ScalarField(g));
    for (int k = 1; k <= n; ++k) {
        v[std::size_t(k)] = random_field(true);
        for (std::size_t q = 0; q < g.size(); ++q)
            if (!op.patch_mask()[q]) v[std::size_t(k)].v[q] = 0.0;
    }
    const double lhs = dot(op.terminal(u0, &v), gT);
    const auto adj = op.adjoint(gT);
    double rhs = dot(u0, adj.at_zero);
    const double dt = op.time_grid().dt();
    for (int k = 1; k <= n; ++k) rhs += dt * dot(v[std::size_t(k)], adj.control[std::size_t(k)]);
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

std::string HumSolution::log_csv() const {
    std::ostringstream os;
    os << "iteration,relative_residual\n";
    for (std::size_t k = 0; k < cg_log.size(); ++k) os << k << ',' << fmt(cg_log[k]) << '\n';
    return os.str();
}

HumSolution hum_null_control(const AdvectionDiffusion& op, const ScalarField& u0, const HumOptions& opt,
                             const ScalarField* warm) {
    if (!(opt.eps_pen > 0)) throw ValidationError("penalization parameter must be positive");
    if (opt.max_iter < 1) throw ValidationError("CG needs at least one iteration");
    const Grid2D& g = op.grid();
    const double eps = opt.eps_pen;

    // G phi = L L* phi + eps phi
    auto apply = [&](const ScalarField& phi) {
        const auto adj = op.adjoint(phi);
        ScalarField out = op.terminal(ScalarField(g), &adj.control);
        for (std::size_t q = 0; q < out.v.size(); ++q) out.v[q] += eps * phi.v[q];
        return out;
    };

    HumSolution s;
    s.eps_pen = eps;
    const ScalarField b = -1.0 * op.terminal(u0);
    const double bn = std::sqrt(dot(b, b));
    ScalarField x = warm ? *warm : ScalarField(g);
    if (!x.grid.same_as(g)) throw ValidationError("warm start lives on a different grid");
    if (bn > 0.0) {
        ScalarField r = b - apply(x);
        ScalarField p = r;
        double rr = dot(r, r);
        s.cg_log.push_back(std::sqrt(rr) / bn);
        int it = 0;
        while (std::sqrt(rr) > opt.cg_rtol * bn && it < opt.max_iter) {
            const ScalarField Ap = apply(p);
            const double pAp = dot(p, Ap);
            if (!(pAp > 0)) throw SolverError("HUM dual operator lost positive definiteness");
            const double a = rr / pAp;
            for (std::size_t q = 0; q < x.v.size(); ++q) {
                x.v[q] += a * p.v[q];
                r.v[q] -= a * Ap.v[q];
            }
            const double rr2 = dot(r, r);
            for (std::size_t q = 0; q < p.v.size(); ++q) p.v[q] = r.v[q] + (rr2 / rr) * p.v[q];
            rr = rr2;
            ++it;
            s.cg_log.push_back(std::sqrt(rr) / bn);
        }
        s.cg_iterations = it;
        s.cg_residual = std::sqrt(rr) / bn;
        if (s.cg_residual > opt.cg_rtol) {
            std::ostringstream os;
            os << "HUM conjugate gradients stagnated after " << it << " iterations at relative residual "
               << s.cg_residual;
            throw SolverError(os.str());
        }
    } else {
        x = ScalarField(g);
    }
    s.dual = x;
    s.dual.name = "hum_dual";
    s.control = op.adjoint(x).control;
    for (auto& c : s.control) c.name = "control";
    s.state = op.forward(u0, &s.control);
    s.terminal_norm = l2_norm(s.state.back());
    s.terminal_sup = s.state.back().max_abs();
    s.control_norm = control_norm(s.control, op.time_grid().dt());
    return s;
}

std::string HumStudy::csv() const {
    std::ostringstream os;
    os << "sweep,parameter,terminal_norm,control_norm,cg_iterations\n";
    for (const auto& p : penalty)
        os << "eps_pen," << fmt(p.parameter) << ',' << fmt(p.terminal_norm) << ',' << fmt(p.control_norm) << ','
           << p.cg_iterations << '\n';
    for (const auto& p : horizon)
        os << "horizon," << fmt(p.parameter) << ',' << fmt(p.terminal_norm) << ',' << fmt(p.control_norm) << ','
           << p.cg_iterations << '\n';
    return os.str();
}

HumStudy hum_study(const ExtendedDomain& dom, const ScalarField& u0, const VectorField* w, const HumStudyConfig& cfg) {
    if (cfg.eps_sweep.size() < 2 || cfg.horizons.size() < 2) throw ValidationError("sweeps need at least two points");
    std::vector<VectorField> wv;
    if (w) wv.push_back(*w);
    HumStudy st;
    {
        const AdvectionDiffusion op(dom.grid, cfg.kappa, TimeGrid(0.0, cfg.horizon, cfg.n_steps), wv, dom.patch_mask);
        st.peclet = op.peclet();
        st.transpose_gap = transpose_gap(op, 5);
        ScalarField warm(dom.grid);
        for (double e : cfg.eps_sweep) {
            HumOptions o = cfg.hum;
            o.eps_pen = e;
            const HumSolution s = hum_null_control(op, u0, o, &warm);
            warm = s.dual;
            st.penalty.push_back({e, s.terminal_norm, s.control_norm, s.cg_iterations});
        }
    }
    for (double T : cfg.horizons) {
        const AdvectionDiffusion op(dom.grid, cfg.kappa, TimeGrid(0.0, T, cfg.n_steps), wv, dom.patch_mask);
        HumOptions o = cfg.hum;
        o.eps_pen = cfg.eps_for_horizons;
        const HumSolution s = hum_null_control(op, u0, o);
        st.horizon.push_back({T, s.terminal_norm, s.control_norm, s.cg_iterations});
    }
    st.penalty_monotone = true;
    for (std::size_t k = 1; k < st.penalty.size(); ++k)
        st.penalty_monotone = st.penalty_monotone && st.penalty[k].parameter < st.penalty[k - 1].parameter &&
                              st.penalty[k].terminal_norm < st.penalty[k - 1].terminal_norm &&
                              st.penalty[k].control_norm > st.penalty[k - 1].control_norm;
    st.horizon_monotone = true;
    for (std::size_t k = 1; k < st.horizon.size(); ++k)
        st.horizon_monotone = st.horizon_monotone && st.horizon[k].parameter < st.horizon[k - 1].parameter &&
                              st.horizon[k].control_norm > st.horizon[k - 1].control_norm;
    return st;
}

std::string ThetaPhaseResult::records_csv() const {
    std::ostringstream os;
    os << "iteration,step_01a,ball_01a,cg_iterations,terminal_sup\n";
    for (const auto& r : records)
        os << r.iteration << ',' << fmt(r.step) << ',' << fmt(r.ball) << ',' << r.cg_iterations << ','
           << fmt(r.terminal_sup) << '\n';
    return os.str();
}

std::string ThetaPhaseResult::gamma_trace_csv() const {
    std::ostringstream os;
    os << "t,x,theta\n";
    const Grid2D& g = dom.omega_grid;
    for (const auto& f : theta)
        for (int i = 0; i <= g.nx(); ++i) os << fmt(f.time) << ',' << fmt(g.x(i)) << ',' << fmt(f(i, g.ny())) << '\n';
    return os.str();
}

namespace {

double off_gamma_max(const ScalarField& f) {
    const Grid2D& g = f.grid;
    double m = 0.0;
    for (int i = 0; i <= g.nx(); ++i) m = std::max(m, std::abs(f(i, 0)));
    for (int j = 0; j <= g.ny(); ++j) m = std::max({m, std::abs(f(0, j)), std::abs(f(g.nx(), j))});
    return m;
}

void check_heat_data(const ExtendedDomain& dom, const VectorField& y0, const ScalarField& theta0) {
    const Grid2D& g = dom.omega_grid;
    if (!y0.grid.same_as(g) || !theta0.grid.same_as(g)) throw ValidationError("heat data must live on the physical-domain grid");
    const double ym = y0.max_abs(), tm = theta0.max_abs();
    if (!std::isfinite(ym) || !std::isfinite(tm)) throw ValidationError("heat data have non-finite values");
    if (ym > 0.0) {
        double n = 0.0;
        for (int i = 0; i <= g.nx(); ++i)
            n = std::max({n, std::abs(y0.w[g.idx(i, 0)]), std::abs(y0.w[g.idx(i, g.ny())])});
        for (int j = 0; j <= g.ny(); ++j)
            n = std::max({n, std::abs(y0.u[g.idx(0, j)]), std::abs(y0.u[g.idx(g.nx(), j)])});
        if (n > 1e-10 * ym) throw ValidationError("initial velocity must have zero normal component on every side: " + fmt(n));
        const double div = max_divergence(y0);
        if (div > 1e-6 * ym / g.h()) throw ValidationError("initial velocity is not divergence-free: " + fmt(div));
    }
    if (off_gamma_max(theta0) > 1e-12 * std::max(tm, 1e-300))
        throw ValidationError("initial temperature must vanish on the uncontrolled sides");
}

} // namespace

ThetaPhaseResult theta_phase(const StripGeometry& geo, const VectorField& y0, const ScalarField& theta0,
                             const HeatConfig& cfg) {
    if (!(cfg.T_star > 0) || cfg.n_steps < 1) throw ValidationError("theta phase needs a positive horizon and steps");
    if (!(cfg.damping > 0 && cfg.damping <= 1)) throw ValidationError("damping must lie in (0,1]");
    if (!(cfg.fp_tol > 0) || cfg.K_max < 1 || !(cfg.hum_tol > 0)) throw ValidationError("invalid heat tolerances");
    if (cfg.k.x == 0.0 && cfg.k.y == 0.0) throw ValidationError("buoyancy vector k must be non-zero");

    ThetaPhaseResult res;
    res.dom = ExtendedDomain::build(geo, y0.grid.h(), cfg.patch);
    const ExtendedDomain& dom = res.dom;
    check_heat_data(dom, y0, theta0);
    res.tg = TimeGrid(0.0, cfg.T_star, cfg.n_steps);
    const TimeGrid& tg = res.tg;
    const int n = tg.n_steps;
    const Grid2D& og = dom.omega_grid;
    res.theta0_max = theta0.max_abs();

    const ExtensionOperator ext(dom.omega, dom.grid, dom.omega_tilde);
    const ScalarField theta0_t = ext.extend_scalar(theta0);
    const StreamSolver stream(og);
    const ScalarField cy0 = curl(y0);
    const VectorField zero_v(og);

    std::vector<ScalarField> bar(std::size_t(n) + 1, theta0);
    std::vector<VectorField> z(std::size_t(n) + 1, y0);
    for (int k = 0; k <= n; ++k) {
        bar[std::size_t(k)].time = z[std::size_t(k)].time = tg.t(k);
    }
    ScalarField warm(dom.grid);

    for (int it = 1; it <= cfg.K_max; ++it) {
        // buoyancy-forced Euler along the previous velocity iterate, no-flux on every side
        FlowMap fm(og, dom.omega, tg);
        fm.with_perturbation(std::make_shared<VelocityHistory>(VelocityHistory::make(tg, z)));
        const Characteristics ch(fm, 0, n, cfg.exec);
        TransportProblem tp;
        tp.chars = &ch;
        tp.initial = cy0;
        tp.initial.name = "zeta";
        tp.k0 = 0;
        tp.k1 = n;
        bool forced = false;
        for (const auto& b : bar) forced = forced || b.max_abs() > 0.0;
        if (forced)
            for (const auto& b : bar) tp.source.push_back(buoyancy_source(b, cfg.k));
        res.zeta = solve_transport(tp, cfg.exec);
        res.y.clear();
        std::vector<VectorField> w;
        for (int k = 0; k <= n; ++k) {
            Recovery rec = recover_velocity(stream, res.zeta[std::size_t(k)], y0, zero_v, 1.0, &cy0);
            rec.y.time = tg.t(k);
            w.push_back(ext.extend_vector(rec.y));
            res.y.push_back(std::move(rec.y));
        }

        const AdvectionDiffusion op(dom.grid, cfg.kappa, tg, std::move(w), dom.patch_mask);
        if (it == 1 && op.peclet() > 2.0)
            res.warnings.push_back("cell Peclet number " + fmt(op.peclet()) + " exceeds 2");
        res.hum = hum_null_control(op, theta0_t, cfg.hum, &warm);
        warm = res.hum.dual;

        std::vector<ScalarField> fresh, delta;
        for (int k = 0; k <= n; ++k) {
            ScalarField f = restrict_to(res.hum.state[std::size_t(k)], og);
            f.name = "theta";
            f.time = tg.t(k);
            ScalarField next = (1.0 - cfg.damping) * bar[std::size_t(k)] + cfg.damping * f;
            next.time = tg.t(k);
            delta.push_back(next - bar[std::size_t(k)]);
            bar[std::size_t(k)] = std::move(next);
            fresh.push_back(std::move(f));
        }
        LambdaRecord rec;
        rec.iteration = it;
        rec.step = time_sup_norm(delta, 1, cfg.alpha, cfg.holder);
        rec.ball = time_sup_norm(bar, 1, cfg.alpha, cfg.holder);
        rec.cg_iterations = res.hum.cg_iterations;
        rec.terminal_sup = res.hum.terminal_sup;
        res.records.push_back(rec);
        res.ball_max = std::max(res.ball_max, rec.ball);
        if (rec.ball > 1.0) res.ball_ok = false;
        res.theta = std::move(fresh);
        z = res.y;
        if (rec.step <= cfg.fp_tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged)
        res.warnings.push_back("temperature fixed point did not converge in " + std::to_string(cfg.K_max) + " iterations");
    if (!res.ball_ok) res.warnings.push_back("temperature iterate left the unit ball: " + fmt(res.ball_max));
    res.terminal_rel = res.theta0_max > 0.0 ? res.theta.back().max_abs() / res.theta0_max : res.theta.back().max_abs();
    for (const auto& f : res.theta) res.off_gamma_trace = std::max(res.off_gamma_trace, off_gamma_max(f));
    return res;
}

} // namespace bouss

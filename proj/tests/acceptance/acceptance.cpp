// Acceptance run: one pass/fail line per criterion, exit status 0 only if all pass.

#include <bouss/config.hpp>
#include <bouss/errors.hpp>
#include <bouss/heat.hpp>
#include <bouss/return_method.hpp>
#include <bouss/scenario.hpp>
#include <bouss/shapes.hpp>
#include <bouss/two_phase.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace bouss;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", v);
    return b;
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    void need(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (ok ? "" : "[FAILED] ") << what << "; ";
    }
};

constexpr double pi = std::numbers::pi;

std::shared_ptr<const ReturnInfra> infra(int nx) {
    ReturnConfig c;
    c.nx = nx;
    return ReturnInfra::build(c);
}

// ---------------------------------------------------------------------------------------------

void potential_oracle(Verdict& v) {
    const auto t0 = Clock::now();
    const PotentialSolution s = solve_potential(PotentialDomain::rectangle({0, 2, 0, 1}, 1.0 / 64));
    double err = 0.0;
    for (int j = 0; j <= s.grid.ny(); ++j)
        for (int i = 0; i <= s.grid.nx(); ++i) err = std::max(err, std::abs(s.phi[s.grid.idx(i, j)] - (s.grid.x(i) - 1.0)));
    const GradientFloorReport r = verify_gradient_floor(s);
    const double dt = seconds_since(t0);
    v.need(s.grid.nx() == 128 && s.grid.ny() == 64, "grid 128x64");
    v.need(err <= 1e-8, "max |phi_h - (x1 - 1)| = " + num(err) + " <= 1e-8");
    v.need(std::abs(r.min_grad - 1.0) <= 1e-8, "min |grad phi| = 1 + " + num(r.min_grad - 1.0) + " within 1e-8");
    v.need(r.pass, "gradient floor and range audit");
    v.need(dt < 5.0, "runtime " + num(dt) + " s < 5 s");
}

void flushing(Verdict& v, const ReturnInfra& inf128) {
    const auto t0 = Clock::now();
    const StripGeometry g = build_strip_geometry({});
    const Grid2D outer = make_outer_grid(g, 128);
    auto rp = std::make_shared<const ReturnPotential>(solve_return_potential(g, outer));
    const TimeProfile gamma = TimeProfile::gamma(0.2, 1.0);
    const FlushCertificate c = select_M(rp, gamma, TimeGrid(0, 1, 64));
    const double dt = seconds_since(t0);
    const double predicted = g.omega2.width() / gamma.half_integral();
    v.need(c.ok, "select_M terminated with M = " + num(c.M));
    v.need(c.clearance_first >= 2 * outer.h() && c.clearance_second >= 2 * outer.h(),
           "clearances " + num(c.clearance_first) + ", " + num(c.clearance_second) + " >= 2h = " + num(2 * outer.h()));
    v.need(c.M >= predicted / 2 && c.M <= 2 * predicted,
           "selected M within one doubling of the closed-form threshold " + num(predicted));
    v.need(c.M == inf128.M, "same M as the shared infrastructure");
    v.need(dt < 30.0, "runtime " + num(dt) + " s < 30 s");
}

void flow_props(Verdict& v, const ReturnInfra& inf) {
    FlowMap fm(inf.outer, inf.geo.omega3, inf.tg, inf.cfg.flow);
    fm.with_return_field(inf.rp, inf.gamma, inf.M);
    const FlowProperties p = flow_properties(fm, closure_nodes(inf.outer, inf.geo.omega2, 4), Exec::Parallel);
    v.need(p.identity_error == 0.0, "identity error " + num(p.identity_error) + " == 0");
    v.need(p.inverse_error <= 1e-6, "inverse error " + num(p.inverse_error) + " <= 1e-6");
    v.need(p.group_error <= 1e-6, "group error " + num(p.group_error) + " <= 1e-6");
    v.need(p.min_phi_slope >= -1e-8, "min d/dt phi(Y) = " + num(p.min_phi_slope) + " >= -1e-8");
}

struct BumpRun {
    LocalResult r;
    double seconds = 0.0;
};

BumpRun bump_local(const ReturnInfra& inf) {
    const auto t0 = Clock::now();
    const VectorField y0 = make_vector({"solenoidal", 1e-2, {1.0, 0.5}, 0.2}, inf.omega_grid);
    const ScalarField th0 = make_scalar({"bump", 1e-2, {1.0, 0.5}, 0.2}, inf.omega_grid);
    BumpRun b{local_null_control(inf, y0, th0), 0.0};
    b.seconds = seconds_since(t0);
    return b;
}

void local_control(Verdict& v, const ReturnInfra& inf128, double infra_seconds) {
    const LocalResult z = local_null_control(inf128, VectorField(inf128.omega_grid), ScalarField(inf128.omega_grid));
    const auto& zi = z.report.iterations;
    v.need(z.report.converged && zi.size() == 1, "zero data: " + std::to_string(zi.size()) + " iteration(s)");
    if (!zi.empty())
        v.need(zi[0].step <= 1e-10 && zi[0].theta_residual <= 1e-10 && zi[0].zeta_residual <= 1e-10 &&
                   z.y_terminal <= 1e-10,
               "zero data residuals " + num(std::max({zi[0].step, zi[0].theta_residual, zi[0].zeta_residual})) +
                   " <= 1e-10");

    const BumpRun a = bump_local(inf128);
    const auto& it = a.r.report.iterations;
    v.need(a.r.report.converged && it.size() <= 10, "128^2 bump: " + std::to_string(it.size()) + " Picard iterations <= 10");
    const double th = a.r.theta_tail / a.r.theta0_max, ze = a.r.zeta_terminal / a.r.zeta0_max;
    v.need(th <= 1e-3, "sup_{t>=1/2} |theta| / |theta0| = " + num(th) + " <= 1e-3");
    v.need(ze <= 1e-3, "|zeta(1)| / |zeta0| = " + num(ze) + " <= 1e-3");
    const double total = a.seconds + infra_seconds;
    v.need(total < 300.0, "runtime at 128^2 " + num(total) + " s < 300 s");

    const auto inf256 = infra(256);
    const BumpRun b = bump_local(*inf256);
    const double th2 = b.r.theta_tail / b.r.theta0_max, ze2 = b.r.zeta_terminal / b.r.zeta0_max;
    // exact zeros cannot halve; both at rounding level counts as shrinking
    auto shrinks = [](double coarse, double fine) { return fine <= 0.5 * coarse || (coarse <= 1e-14 && fine <= 1e-14); };
    v.need(b.r.report.converged, "256^2 bump converged in " + std::to_string(b.r.report.iterations.size()) + " iterations");
    v.need(shrinks(th, th2), "temperature residual " + num(th) + " -> " + num(th2) + " at 256^2");
    v.need(shrinks(ze, ze2), "vorticity residual " + num(ze) + " -> " + num(ze2) + " at 256^2");
}

void contraction(Verdict& v, const ReturnInfra& inf) {
    RunConfig def;
    const VectorField y0 = resolve_vector(def.y0, inf.omega_grid);
    const ScalarField th0 = resolve_scalar(def.theta0, inf.omega_grid);
    const ContractionReport c = measure_contraction(inf, y0, th0, 5, 4, 1e-3, def.seed);
    std::ostringstream os;
    for (std::size_t p = 0; p < c.ratios.size(); ++p) {
        os << "pair " << p << ":";
        for (double r : c.ratios[p]) os << ' ' << num(r);
        os << ' ';
    }
    v.need(c.ratios.size() >= 5, std::to_string(c.ratios.size()) + " pairs");
    v.need(c.decreasing, "factor decreasing in m (" + os.str() + ")");
    v.need(c.below_one, "factor < 1 at m = 4");
}

void global_control(Verdict& v, const ReturnInfra& inf) {
    RunConfig def;
    const Grid2D& og = inf.omega_grid;
    const VectorField y0 = resolve_vector(def.y0, og), y1 = resolve_vector(def.y1, og);
    const ScalarField t0 = resolve_scalar(def.theta0, og), t1 = resolve_scalar(def.theta1, og);
    const GlobalResult g = global_exact_control(inf, y0, y1, t0, t1, 1.0, def.delta, def.glue_tol);
    v.need(g.y_error <= 1e-3, "relative |y(T) - y1| = " + num(g.y_error) + " <= 1e-3");
    v.need(g.theta_error <= 1e-3, "|theta(T) - theta1| = " + num(g.theta_error) + " <= 1e-3");
    v.need(g.trace.max_flux <= 1e-8, "max slab flux " + num(g.trace.max_flux) + " <= 1e-8");
    v.need(g.jump_first <= def.flush_tol && g.jump_second <= def.flush_tol,
           "gluing jumps " + num(g.jump_first) + ", " + num(g.jump_second) + " <= flush_tol");
    v.need(g.pass, "all glue audits (" + g.detail + ")");
}

// Transport by the return field alone on an outer grid with nx cells across the strip.
struct ShiftRun {
    double shift_error = 0.0, range_excess = 0.0, K = 0.0;
};

ShiftRun shift_run(int nx) {
    ReturnConfig cfg;
    cfg.nx = nx;
    cfg.M = 16.0;
    const StripGeometry geo = build_strip_geometry(cfg.geometry);
    const Grid2D outer = make_outer_grid(geo, nx);
    auto rp = std::make_shared<const ReturnPotential>(solve_return_potential(geo, outer));
    const TimeProfile gamma = TimeProfile::gamma(cfg.gamma_width, cfg.gamma_amplitude);
    const TimeGrid tg(0, 1, cfg.n_steps);
    FlowMap fm(outer, geo.omega3, tg, cfg.flow);
    fm.with_return_field(rp, gamma, cfg.M);
    const int half = tg.n_steps / 2;
    const Characteristics ch(fm, 0, half);
    const Vec2 c{0.6, 0.5};
    auto datum = [c](Vec2 p) { return std::exp(-((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y)) / (2 * 0.08 * 0.08)); };
    TransportProblem tp{&ch, sample(outer, datum), {}, 0, half, true};
    const auto u = solve_transport(tp);
    ShiftRun r;
    const double lo = tp.initial.min(), hi = tp.initial.max();
    for (int k = 0; k <= half; ++k) {
        const double s = cfg.M * gamma.integral(0.0, tg.t(k));
        const ScalarField& f = u[std::size_t(k)];
        r.range_excess = std::max({r.range_excess, lo - f.min(), f.max() - hi});
        for (int j = 0; j <= outer.ny(); ++j)
            for (int i = 0; i <= outer.nx(); ++i) {
                const Vec2 p = outer.node(i, j);
                // the drift is e1 on the strip: compare where the straight back-trace stays inside it
                if (!geo.omega1.contains(p) || !geo.omega1.contains(p - Vec2{s, 0.0})) continue;
                r.shift_error = std::max(r.shift_error, std::abs(f(i, j) - datum(p - Vec2{s, 0.0})));
            }
    }
    std::vector<VectorField> vel;
    for (int k = 0; k <= half; ++k) vel.push_back((cfg.M * gamma(tg.t(k))) * rp->grad_phi);
    const TimeGrid tg_half(0, 0.5, half);
    const GronwallVerdict gv = check_gronwall_bound(u, {}, vel, tg_half, 1, cfg.alpha, 1.0, cfg.holder);
    r.K = gv.K_min;
    return r;
}

void transport(Verdict& v) {
    const ShiftRun a = shift_run(128), b = shift_run(256);
    v.need(b.shift_error <= 1e-3, "analytic shift error at 256^2 " + num(b.shift_error) + " <= 1e-3 (128^2: " +
                                      num(a.shift_error) + ")");
    v.need(std::max(a.range_excess, b.range_excess) <= 1e-10,
           "range excess " + num(std::max(a.range_excess, b.range_excess)) + " <= 1e-10");
    const bool finite = std::isfinite(a.K) && std::isfinite(b.K);
    const double rel = std::abs(a.K - b.K) / std::max({a.K, b.K, 1e-300});
    v.need(finite && (rel <= 0.2 || (a.K == 0.0 && b.K == 0.0)),
           "empirical Gronwall K " + num(a.K) + " (128^2), " + num(b.K) + " (256^2), relative change " + num(rel));
}

void div_curl(Verdict& v) {
    std::vector<double> err, div;
    for (int n : {32, 64, 128}) {
        const Grid2D g(0, 0, 1.0 / n, n, n);
        const StreamSolver s(g);
        const ScalarField zeta = sample(g, [](Vec2 p) { return 2 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y); });
        const ScalarField b = sample(g, [](Vec2 p) {
            const double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
            return sx * sx * sy * sy;
        });
        const VectorField y0 = perp_grad(b);
        // vorticity of the target velocity perp_grad(sin sin) + y0
        const Recovery r = recover_velocity(s, zeta + curl(y0), y0, VectorField(g), 1.0);
        VectorField exact(g);
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                const Vec2 p = g.node(i, j);
                exact.u[g.idx(i, j)] = pi * std::sin(pi * p.x) * std::cos(pi * p.y);
                exact.w[g.idx(i, j)] = -pi * std::cos(pi * p.x) * std::sin(pi * p.y);
            }
        err.push_back(max_abs_diff(r.y - y0, exact));
        div.push_back(max_divergence(r.y, 0));
    }
    for (std::size_t k = 1; k < err.size(); ++k)
        v.need(err[k - 1] / err[k] >= 3.0, "velocity error " + num(err[k - 1]) + " -> " + num(err[k]) + " factor " +
                                                num(err[k - 1] / err[k]) + " >= 3");
    for (std::size_t k = 1; k < div.size(); ++k)
        v.need(div[k] <= div[k - 1] / 3.0 || div[k] <= 1e-12,
               "max |div y| " + num(div[k - 1]) + " -> " + num(div[k]) + " (second order or rounding level)");
}

double dense_oracle_gap() {
    const Grid2D g(0, 0, 1.0 / 30, 30, 2);
    const TimeGrid tg(0, 0.25, 16);
    std::vector<std::uint8_t> mask(g.size(), 0);
    for (int i = 6; i <= 12; ++i) mask[g.idx(i, 1)] = 1;
    const AdvectionDiffusion op(g, 0.05, tg, {}, mask);
    const ScalarField u0 = sample(g, [](Vec2 p) { return std::abs(p.y - 1.0 / 30) < 1e-12 ? std::sin(pi * p.x) : 0.0; });
    const double eps = 1e-3, h2 = g.h() * g.h(), dt = tg.dt();
    std::vector<std::size_t> patch;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mask[k]) patch.push_back(k);
    const int n = tg.n_steps, np = int(patch.size()), nc = np * n, ns = int(g.size());
    Eigen::MatrixXd L(ns, nc);
    for (int step = 1; step <= n; ++step)
        for (int p = 0; p < np; ++p) {
            std::vector<ScalarField> vv(std::size_t(n + 1), ScalarField(g));
            vv[std::size_t(step)].v[patch[std::size_t(p)]] = 1.0;
            const ScalarField uT = op.terminal(ScalarField(g), &vv);
            L.col((step - 1) * np + p) = Eigen::Map<const Eigen::VectorXd>(uT.v.data(), ns);
        }
    const ScalarField free = op.terminal(u0);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(free.v.data(), ns);
    const Eigen::MatrixXd A = dt * h2 * Eigen::MatrixXd::Identity(nc, nc) + (h2 / eps) * L.transpose() * L;
    const Eigen::VectorXd ref = A.ldlt().solve(-(h2 / eps) * L.transpose() * b);
    HumOptions opt;
    opt.eps_pen = eps;
    opt.cg_rtol = 1e-13;
    const HumSolution h = hum_null_control(op, u0, opt);
    Eigen::VectorXd got(nc);
    for (int step = 1; step <= n; ++step)
        for (int p = 0; p < np; ++p) got((step - 1) * np + p) = h.control[std::size_t(step)].v[patch[std::size_t(p)]];
    return (got - ref).norm() / ref.norm();
}

void hum(Verdict& v) {
    const auto t0 = Clock::now();
    RunConfig def;
    const StripGeometry geo = build_strip_geometry(def.geometry);
    const ExtendedDomain dom = ExtendedDomain::build(geo, make_outer_grid(geo, def.nx).h());
    const ExtensionOperator ext(dom.omega, dom.grid, dom.omega_tilde);
    const ScalarField u0 = ext.extend_scalar(resolve_scalar(def.theta0, dom.omega_grid));
    const VectorField w = ext.extend_vector(resolve_vector(def.y0, dom.omega_grid));
    HumStudyConfig sc;
    sc.hum.cg_rtol = def.cg_rtol;
    const HumStudy st = hum_study(dom, u0, &w, sc);
    const double gap = dense_oracle_gap();
    const double dt = seconds_since(t0);
    v.need(st.transpose_gap <= 1e-10, "adjoint transpose gap " + num(st.transpose_gap) + " <= 1e-10");
    v.need(gap <= 1e-6, "dense least-squares oracle relative gap " + num(gap) + " <= 1e-6");
    std::ostringstream ps, hs;
    for (const auto& p : st.penalty) ps << num(p.terminal_norm) << '/' << num(p.control_norm) << ' ';
    for (const auto& p : st.horizon) hs << num(p.control_norm) << ' ';
    v.need(st.penalty_monotone, "penalty sweep terminal/control " + ps.str());
    v.need(st.horizon_monotone, "control cost for shrinking T* " + hs.str());
    v.need(dt < 120.0, "runtime " + num(dt) + " s < 120 s");
}

void two_phase(Verdict& v) {
    const auto t0 = Clock::now();
    RunConfig def;
    const auto inf = ReturnInfra::build(def.return_config());
    const Grid2D& og = inf->omega_grid;
    const TwoPhaseResult r = two_phase_control(*inf, def.heat_config(), resolve_vector(def.y0, og),
                                               resolve_vector(def.y1, og), resolve_scalar(def.theta0, og), def.T,
                                               def.delta, def.glue_tol);
    const double dt = seconds_since(t0);
    v.need(r.theta_terminal <= def.hum_tol, "|theta(T)| = " + num(r.theta_terminal) + " <= hum_tol");
    v.need(r.theta_star_rel <= def.hum_tol, "|theta(T*)| / |theta0| = " + num(r.theta_star_rel) + " <= hum_tol");
    v.need(r.y_error <= def.glue_tol, "relative |y(T) - y1| = " + num(r.y_error) + " <= glue_tol");
    v.need(r.first.off_gamma_trace <= 1e-10, "temperature trace off the controlled side " + num(r.first.off_gamma_trace));
    v.need(r.pass, "all two-phase audits (" + r.detail + ")");
    v.need(dt < 600.0, "runtime " + num(dt) + " s < 600 s");
}

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism(Verdict& v, const std::string& root) {
    RunConfig c = parse_run_config(R"({"grid": {"nx": 64, "n_steps": 32}})");
    const std::string a = root + "/determinism_a", b = root + "/determinism_b";
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    const ScenarioOutcome oa = run_scenario("local", c, a), ob = run_scenario("local", c, b);
    v.need(oa.exit_code == ob.exit_code, "exit codes " + std::to_string(oa.exit_code) + ", " + std::to_string(ob.exit_code));
    for (const char* f : {"log.txt", "manifest.json", "fixed_point.csv", "controls.csv", "y_final.field"}) {
        const std::string x = slurp(a + "/" + f), y = slurp(b + "/" + f);
        v.need(!x.empty() && x == y, std::string(f) + " byte-identical (" + std::to_string(x.size()) + " bytes)");
    }
}

} // namespace

// usage: acceptance [run_dir] [--known-fail=7,...]
// Criteria listed as known failures still print FAIL; they only stop affecting the exit code.
int main(int argc, char** argv) {
    std::string root = (std::filesystem::temp_directory_path() / "bouss_acceptance").string();
    std::set<int> known;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        const std::string flag = "--known-fail=";
        if (arg.rfind(flag, 0) == 0) {
            std::stringstream ss(arg.substr(flag.size()));
            for (std::string item; std::getline(ss, item, ',');) known.insert(std::stoi(item));
        } else {
            root = arg;
        }
    }
    std::filesystem::create_directories(root);

    const auto ti = Clock::now();
    const auto inf128 = infra(128);
    const double infra_seconds = seconds_since(ti);

    const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
        {"return-potential oracle", potential_oracle},
        {"flushing certificate", [&](Verdict& v) { flushing(v, *inf128); }},
        {"flow-map properties", [&](Verdict& v) { flow_props(v, *inf128); }},
        {"local null control", [&](Verdict& v) { local_control(v, *inf128, infra_seconds); }},
        {"contraction trend", [&](Verdict& v) { contraction(v, *inf128); }},
        {"global exact control", [&](Verdict& v) { global_control(v, *inf128); }},
        {"transport solver", transport},
        {"div-curl recovery", div_curl},
        {"penalized HUM", hum},
        {"two-phase run with diffusion", two_phase},
        {"determinism", [&](Verdict& v) { determinism(v, root); }},
    };

    int failed = 0, unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto t0 = Clock::now();
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.need(false, std::string("exception: ") + e.what());
        }
        if (!v.pass) {
            ++failed;
            if (!known.count(int(i + 1))) ++unexpected;
        }
        std::cout << "criterion " << (i + 1) << " (" << criteria[i].first << "): " << (v.pass ? "PASS" : "FAIL") << "  ["
                  << num(seconds_since(t0)) << " s] " << v.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - std::size_t(failed)) << " of " << criteria.size() << " criteria passed";
    if (failed > unexpected) std::cout << " (" << (failed - unexpected) << " listed as known failures)";
    std::cout << std::endl;
    return unexpected == 0 ? 0 : 1;
}

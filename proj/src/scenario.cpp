#include <bouss/scenario.hpp>
#include <bouss/errors.hpp>
#include <bouss/field_io.hpp>
#include <bouss/two_phase.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bouss {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

class Run {
public:
    Run(std::string dir, const ScenarioOptions& opt) : dir_(std::move(dir)), opt_(opt) {}

    void log(const std::string& line) {
        log_ += line;
        log_ += '\n';
        if (opt_.progress) *opt_.progress << line << std::endl;
    }
    void audit(const std::string& module, const std::string& name, bool pass, double value, double tol,
               const std::string& detail = {}) {
        out.audits.push_back({module, name, pass, value, tol, detail});
        log(std::string(pass ? "PASS " : "FAIL ") + module + ": " + name + " value=" + fmt(value) + " tol=" + fmt(tol) +
            (detail.empty() ? "" : " (" + detail + ")"));
    }
    void write(const std::string& rel, const std::string& text) {
        write_text(dir_ + "/" + rel, text);
        out.artifacts.push_back(rel);
    }
    void field(const std::string& rel, const ScalarField& f) { write(rel, format_field(f)); }
    void field(const std::string& rel, const VectorField& f) { write(rel, format_field(f)); }
    const std::string& log_text() const { return log_; }

    ScenarioOutcome out;

private:
    std::string dir_;
    const ScenarioOptions& opt_;
    std::string log_;
};

std::string warnings_text(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) s += "warning: " + x + "\n";
    return s;
}

// ---------------------------------------------------------------- potential

void run_potential(Run& r, const RunConfig& cfg) {
    const StripGeometry geo = build_strip_geometry(cfg.geometry);
    const Grid2D outer = make_outer_grid(geo, cfg.nx);
    const ReturnPotential rp = solve_return_potential(geo, outer);
    const GradientFloorReport gf = verify_return_gradient_floor(rp, cfg.gradient_floor);
    r.log("potential: strip grid " + std::to_string(rp.strip_grid.nx()) + "x" + std::to_string(rp.strip_grid.ny()) +
          ", unknowns " + std::to_string(rp.strip.unknowns));

    // on a rectangular strip the exact discrete solution is the linear profile between the ends
    const Rect& o1 = geo.omega1;
    const double sign = geo.swap_ends ? -1.0 : 1.0;
    double err = 0.0;
    ScalarField phi_strip(rp.strip_grid, 0.0, "phi");
    const Grid2D& sg = rp.strip_grid;
    for (int j = 0; j <= sg.ny(); ++j)
        for (int i = 0; i <= sg.nx(); ++i) {
            const double v = rp.strip.phi[sg.idx(i, j)];
            phi_strip(i, j) = v;
            const double exact = sign * (-1.0 + 2.0 * (sg.x(i) - o1.x0) / o1.width());
            err = std::max(err, std::abs(v - exact));
        }
    const double grad_exact = 2.0 / o1.width();
    r.audit("harmonic_potential", "linear profile on the strip", err <= 1e-8, err, 1e-8);
    r.audit("harmonic_potential", "gradient modulus equals the linear slope", std::abs(gf.min_grad - grad_exact) <= 1e-8,
            std::abs(gf.min_grad - grad_exact), 1e-8, "min|grad phi| = " + fmt(gf.min_grad));
    r.audit("harmonic_potential", "non-vanishing gradient and range of the potential", gf.pass, gf.min_grad,
            cfg.gradient_floor, gf.detail);
    r.audit("harmonic_potential", "discrete Laplacian residual", rp.residual <= 1e-8, rp.residual, 1e-8);

    std::ostringstream os;
    os << "quantity,value\n"
       << "linear_profile_error," << fmt(err) << "\nmin_grad," << fmt(gf.min_grad) << "\nphi_min," << fmt(gf.phi_min)
       << "\nphi_max," << fmt(gf.phi_max) << "\nresidual," << fmt(rp.residual) << "\nsat_level," << fmt(rp.sat_level)
       << "\nsat_band," << fmt(rp.sat_band) << "\ndrift_sup," << fmt(rp.grad_sup) << '\n';
    r.write("potential.csv", os.str());
    r.field("phi_strip.field", phi_strip);
    r.field("phi_outer.field", rp.phi);
    r.field("drift.field", rp.grad_phi);
}

// ---------------------------------------------------------------- flow

void run_flow(Run& r, const RunConfig& cfg) {
    const auto inf = ReturnInfra::build(cfg.return_config());
    const FlushCertificate& c = inf->cert;
    std::ostringstream fl;
    fl << "M,clearance\n";
    for (auto [M, cl] : c.history) fl << fmt(M) << ',' << fmt(cl) << '\n';
    r.write("flush.csv", fl.str());
    r.log("flow: selected M = " + fmt(inf->M) + ", predicted threshold " + fmt(c.predicted_threshold));
    r.audit("flow_map", "flushing of the second domain at t=1/2 and t=1", c.ok, c.clearance, c.required, c.detail);
    // the first flushing power of two is at most one doubling away from the predicted one
    const double predicted = std::exp2(std::ceil(std::log2(c.predicted_threshold)));
    const double ratio = inf->M / predicted;
    r.audit("flow_map", "selected M within one doubling of the rectangle threshold", ratio >= 0.5 && ratio <= 2.0, ratio,
            2.0, "predicted power of two " + fmt(predicted));

    FlowMap fm(inf->outer, inf->geo.omega3, inf->tg, inf->cfg.flow);
    fm.with_return_field(inf->rp, inf->gamma, inf->M);
    const FlowProperties p = flow_properties(fm, closure_nodes(inf->outer, inf->geo.omega2, 4), inf->cfg.exec);
    r.audit("flow_map", "identity at equal times", p.identity_error == 0.0, p.identity_error, 0.0);
    r.audit("flow_map", "inverse property", p.inverse_error <= 1e-6, p.inverse_error, 1e-6);
    r.audit("flow_map", "group property", p.group_error <= 1e-6, p.group_error, 1e-6);
    r.audit("flow_map", "potential non-decreasing along return trajectories", p.min_phi_slope >= -1e-8,
            p.min_phi_slope, -1e-8);
    std::ostringstream pp;
    pp << "quantity,value\nparticles," << p.particles << "\nidentity_error," << fmt(p.identity_error)
       << "\ninverse_error," << fmt(p.inverse_error) << "\ngroup_error," << fmt(p.group_error) << "\nmin_phi_slope,"
       << fmt(p.min_phi_slope) << '\n';
    r.write("flow_properties.csv", pp.str());

    NuOptions no;
    no.seed = cfg.seed;
    const NuEstimate nu = estimate_nu(inf->rp, inf->gamma, inf->M, inf->tg, c, inf->cfg.flow, no);
    std::ostringstream nl;
    nl << "amplitude,worst_clearance,pass\n";
    for (const auto& s : nu.ladder) nl << fmt(s.amplitude) << ',' << fmt(s.worst_clearance) << ',' << (s.pass ? 1 : 0) << '\n';
    r.write("nu_ladder.csv", nl.str());
    r.log("flow: perturbation radius keeping the flush " + fmt(nu.nu) + " (formula " + fmt(nu.nu_formula) + ")");
    r.write("gamma.csv", inf->gamma.csv(inf->tg));
}

// ---------------------------------------------------------------- local

void local_audits(Run& r, const LocalResult& L, double flush_tol, const std::string& tag) {
    const auto& its = L.report.iterations;
    r.audit("return_method_control", tag + "fixed-point convergence", L.report.converged,
            its.empty() ? 0.0 : its.back().step, 0.0, std::to_string(its.size()) + " iterations");
    r.audit("transport", tag + "temperature vanishes on the domain for t >= 1/2", L.theta_tail <= flush_tol * L.theta0_max,
            L.theta_tail, flush_tol * L.theta0_max);
    r.audit("transport", tag + "vorticity vanishes on the domain at t = 1", L.zeta_terminal <= flush_tol * L.zeta_scale,
            L.zeta_terminal, flush_tol * L.zeta_scale);
    r.audit("div_curl_recovery", tag + "zero-mean flux through the control sides", L.trace.flux_ok, L.trace.max_flux,
            L.trace.flux_tolerance);
}

void run_local(Run& r, const RunConfig& cfg) {
    const auto inf = ReturnInfra::build(cfg.return_config());
    const VectorField y0 = resolve_vector(cfg.y0, inf->omega_grid);
    const ScalarField th0 = resolve_scalar(cfg.theta0, inf->omega_grid);
    r.log("local: M = " + fmt(inf->M) + ", grid " + std::to_string(inf->outer.nx()) + "x" +
          std::to_string(inf->outer.ny()) + ", steps " + std::to_string(inf->tg.n_steps));
    const LocalResult L = local_null_control(*inf, y0, th0);
    for (const auto& it : L.report.iterations)
        r.log("local: iteration " + std::to_string(it.iteration) + " step " + fmt(it.step) + " ball " + fmt(it.ball));
    local_audits(r, L, cfg.flush_tol, "");
    const double ytol = cfg.flush_tol * y0.max_abs() + 1e-10;
    r.audit("return_method_control", "velocity vanishes at t = 1", L.y_terminal <= ytol, L.y_terminal, ytol);
    r.write("fixed_point.csv", L.report.csv());
    r.write("controls.csv", L.trace.csv());
    r.write("warnings.txt", warnings_text(L.report.warnings));
    r.field("y_final.field", L.state.y.back());
    r.field("theta_half.field", L.state.theta[L.state.theta.size() / 2]);
    r.field("zeta_final.field", L.state.zeta.back());

    if (cfg.contraction_pairs > 0) {
        const ContractionReport c =
            measure_contraction(*inf, y0, th0, cfg.contraction_pairs, cfg.contraction_m, 1e-3, cfg.seed);
        r.write("contraction.csv", c.csv());
        r.audit("return_method_control", "m-step contraction factor decreasing in m", c.decreasing,
                c.ratios.empty() ? 0.0 : c.ratios[0].back(), 1.0);
        r.audit("return_method_control", "m-step contraction factor below one", c.below_one,
                c.ratios.empty() ? 0.0 : c.ratios[0].back(), 1.0);
    }
}

// ---------------------------------------------------------------- global

void global_audits(Run& r, const GlobalResult& g, double glue_tol, double flush_tol) {
    local_audits(r, g.forward, flush_tol, "forward leg: ");
    local_audits(r, g.backward, flush_tol, "reverse leg: ");
    r.audit("return_method_control", "terminal velocity error", g.y_error <= glue_tol, g.y_error, glue_tol);
    r.audit("return_method_control", "terminal temperature error", g.theta_error <= glue_tol, g.theta_error, glue_tol);
    r.audit("return_method_control", "continuity at t = eps", g.jump_first <= flush_tol, g.jump_first, flush_tol);
    r.audit("return_method_control", "continuity at t = T - eps", g.jump_second <= flush_tol, g.jump_second, flush_tol);
    r.audit("return_method_control", "zero-mean flux on every slab", g.trace.flux_ok, g.trace.max_flux,
            g.trace.flux_tolerance);
    r.audit("return_method_control", "time reversal of the first leg", g.reversal_deviation <= 1e-6,
            g.reversal_deviation, 1e-6);
}

void run_global(Run& r, const RunConfig& cfg) {
    const auto inf = ReturnInfra::build(cfg.return_config());
    const Grid2D& og = inf->omega_grid;
    const VectorField y0 = resolve_vector(cfg.y0, og), y1 = resolve_vector(cfg.y1, og);
    const ScalarField t0 = resolve_scalar(cfg.theta0, og), t1 = resolve_scalar(cfg.theta1, og);
    const GlobalResult g = global_exact_control(*inf, y0, y1, t0, t1, cfg.T, cfg.delta, cfg.glue_tol);
    r.log("global: eps = " + fmt(g.eps) + " (dyadic level " + std::to_string(g.dyadic) + ")");
    global_audits(r, g, cfg.glue_tol, cfg.flush_tol);
    r.write("forward_fixed_point.csv", g.forward.report.csv());
    r.write("reverse_fixed_point.csv", g.backward.report.csv());
    r.write("controls.csv", g.trace.csv());
    r.write("warnings.txt", warnings_text(g.forward.report.warnings) + warnings_text(g.backward.report.warnings));
    r.field("y_terminal.field", g.y.back());
    r.field("theta_terminal.field", g.theta.back());
}

// ---------------------------------------------------------------- heat

void run_heat(Run& r, const RunConfig& cfg) {
    const auto inf = ReturnInfra::build(cfg.return_config());
    const Grid2D& og = inf->omega_grid;
    const VectorField y0 = resolve_vector(cfg.y0, og), y1 = resolve_vector(cfg.y1, og);
    const ScalarField th0 = resolve_scalar(cfg.theta0, og);
    const TwoPhaseResult tp = two_phase_control(*inf, cfg.heat_config(), y0, y1, th0, cfg.T, cfg.delta, cfg.glue_tol);
    const ThetaPhaseResult& f = tp.first;
    for (const auto& rec : f.records)
        r.log("heat: iteration " + std::to_string(rec.iteration) + " step " + fmt(rec.step) + " ball " + fmt(rec.ball) +
              " cg " + std::to_string(rec.cg_iterations));
    r.audit("parabolic_hum", "temperature fixed point converged", f.converged,
            f.records.empty() ? 0.0 : f.records.back().step, cfg.fp_tol);
    r.audit("parabolic_hum", "temperature iterates stay in the unit ball", f.ball_ok, f.ball_max, 1.0);
    r.audit("parabolic_hum", "temperature at T* (relative)", tp.theta_star_rel <= cfg.hum_tol, tp.theta_star_rel,
            cfg.hum_tol);
    r.audit("parabolic_hum", "temperature trace off the controlled side", f.off_gamma_trace <= 1e-10, f.off_gamma_trace,
            1e-10);
    r.audit("parabolic_hum", "temperature zero during the velocity phase", tp.max_theta_second == 0.0,
            tp.max_theta_second, 0.0);
    r.audit("parabolic_hum", "terminal temperature", tp.theta_terminal <= cfg.hum_tol * f.theta0_max,
            tp.theta_terminal, cfg.hum_tol * f.theta0_max);
    global_audits(r, tp.second, cfg.glue_tol, cfg.flush_tol);
    r.write("lambda.csv", f.records_csv());
    r.write("gamma_trace.csv", f.gamma_trace_csv());
    r.write("hum_cg.csv", f.hum.log_csv());
    r.write("controls.csv", tp.second.trace.csv());
    r.write("warnings.txt", warnings_text(f.warnings) + warnings_text(tp.second.forward.report.warnings) +
                                warnings_text(tp.second.backward.report.warnings));
    r.field("theta_tstar.field", f.theta.back());
    r.field("y_tstar.field", f.y.back());
    r.field("y_terminal.field", tp.second.y.back());
}

// ---------------------------------------------------------------- hum

void run_hum(Run& r, const RunConfig& cfg) {
    const StripGeometry geo = build_strip_geometry(cfg.geometry);
    const Grid2D outer = make_outer_grid(geo, cfg.nx);
    const ExtendedDomain dom = ExtendedDomain::build(geo, outer.h());
    const ScalarField th0 = resolve_scalar(cfg.theta0, dom.omega_grid);
    const VectorField y0 = resolve_vector(cfg.y0, dom.omega_grid);
    const ExtensionOperator ext(dom.omega, dom.grid, dom.omega_tilde);
    const ScalarField u0 = ext.extend_scalar(th0);
    const VectorField w = ext.extend_vector(y0);
    HumStudyConfig sc;
    sc.kappa = cfg.kappa;
    sc.horizon = cfg.T_star;
    sc.eps_sweep = cfg.eps_sweep;
    sc.horizons = cfg.horizons;
    sc.eps_for_horizons = cfg.eps_sweep.back();
    sc.hum.cg_rtol = cfg.cg_rtol;
    const HumStudy st = hum_study(dom, u0, &w, sc);
    r.log("hum: cell Peclet number " + fmt(st.peclet));
    r.audit("parabolic_hum", "adjoint transpose identity", st.transpose_gap <= 1e-10, st.transpose_gap, 1e-10);
    r.audit("parabolic_hum", "penalty sweep: terminal norm down, control norm up", st.penalty_monotone,
            st.penalty.back().terminal_norm, st.penalty.front().terminal_norm);
    r.audit("parabolic_hum", "control cost grows as the horizon shrinks", st.horizon_monotone,
            st.horizon.back().control_norm, st.horizon.front().control_norm);
    r.write("hum_sweeps.csv", st.csv());
}

// ---------------------------------------------------------------- norms

void run_norms(Run& r, const RunConfig& cfg, const std::string& path) {
    if (path.empty()) throw ValidationError("norms needs a field dump (--field)");
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open field file " + path);
    std::string magic, kind;
    std::getline(in, magic);
    in >> kind >> kind;
    HolderOptions ho;
    ho.seed = cfg.seed;
    std::ostringstream os;
    os << HolderReport::csv_header() << '\n';
    for (int m = 0; m <= 2; ++m) {
        const HolderReport h = kind == "vector" ? holder_norm(load_vector(path), m, cfg.alpha, ho)
                                                : holder_norm(load_scalar(path), m, cfg.alpha, ho);
        os << h.csv_row("norms", 0) << '\n';
        r.log("norms: m=" + std::to_string(m) + " total " + fmt(h.total));
    }
    r.write("norms.csv", os.str());
}

} // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"potential", "flow", "local", "global", "heat", "hum", "norms"};
    return names;
}

ScenarioOutcome run_scenario(const std::string& sub, const RunConfig& cfg, const std::string& out_dir,
                             const ScenarioOptions& opt) {
    Run r(out_dir, opt);
    if (cfg.workers > 0) set_worker_count(cfg.workers);
    try {
        std::filesystem::create_directories(out_dir);
        if (sub == "potential") run_potential(r, cfg);
        else if (sub == "flow") run_flow(r, cfg);
        else if (sub == "local") run_local(r, cfg);
        else if (sub == "global") run_global(r, cfg);
        else if (sub == "heat") run_heat(r, cfg);
        else if (sub == "hum") run_hum(r, cfg);
        else if (sub == "norms") run_norms(r, cfg, opt.field_path);
        else throw ValidationError("unknown subcommand '" + sub + "'");
        bool ok = true;
        for (const auto& a : r.out.audits) ok = ok && a.pass;
        r.out.exit_code = ok ? 0 : 2;
        r.out.message = ok ? "all audits passed" : "audit failure";
    } catch (const ValidationError& e) {
        r.out.exit_code = 1;
        r.out.message = std::string("validation error: ") + e.what();
    } catch (const AuditFailure& e) {
        r.out.exit_code = 2;
        r.out.audits.push_back({e.module(), e.audit(), false, 0.0, 0.0, e.detail()});
        r.out.message = std::string("audit failure: ") + e.what();
    } catch (const SolverError& e) {
        r.out.exit_code = 2;
        r.out.message = std::string("solver failure: ") + e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        r.out.exit_code = 1;
        r.out.message = std::string("cannot use the output directory: ") + e.what();
    }
    r.log(r.out.message);

    nlohmann::ordered_json m;
    m["subcommand"] = sub;
    m["exit_code"] = r.out.exit_code;
    m["message"] = r.out.message;
    m["config"] = nlohmann::ordered_json::parse(cfg.to_json());
    auto audits = nlohmann::ordered_json::array();
    for (const auto& a : r.out.audits)
        audits.push_back({{"module", a.module}, {"audit", a.audit}, {"pass", a.pass}, {"value", fmt(a.value)},
                          {"tolerance", fmt(a.tolerance)}, {"detail", a.detail}});
    m["audits"] = audits;
    try {
        r.write("log.txt", r.log_text());
        m["artifacts"] = r.out.artifacts;
        write_text(out_dir + "/manifest.json", m.dump(2) + "\n");
        r.out.artifacts.push_back("manifest.json");
    } catch (const ValidationError& e) {
        r.out.exit_code = 1;
        r.out.message = e.what();
    }
    return r.out;
}

} // namespace bouss

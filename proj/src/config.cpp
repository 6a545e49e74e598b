#include <bouss/config.hpp>
#include <bouss/errors.hpp>
#include <bouss/field_io.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bouss {

using nlohmann::json;

namespace {

using Handler = std::function<void(const json&)>;

void dispatch(const json& obj, const std::string& where, const std::map<std::string, Handler>& handlers) {
    if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const auto h = handlers.find(it.key());
        if (h == handlers.end()) throw ValidationError("config: unknown key '" + where + "." + it.key() + "'");
        try {
            h->second(it.value());
        } catch (const json::exception& e) {
            throw ValidationError("config: bad value for '" + where + "." + it.key() + "': " + e.what());
        }
    }
}

Rect rect_of(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 4) throw ValidationError("config: rectangles are [x0, x1, y0, y1]");
    return {v[0], v[1], v[2], v[3]};
}

Vec2 vec_of(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 2) throw ValidationError("config: vectors have two entries");
    return {v[0], v[1]};
}

DataSpec data_of(const json& j, const std::string& where) {
    DataSpec d;
    dispatch(j, where, {
        {"kind", [&](const json& v) { d.shape.kind = v.get<std::string>(); }},
        {"amplitude", [&](const json& v) { d.shape.amplitude = v.get<double>(); }},
        {"center", [&](const json& v) { d.shape.center = vec_of(v); }},
        {"radius", [&](const json& v) { d.shape.radius = v.get<double>(); }},
        {"file", [&](const json& v) { d.file = v.get<std::string>(); }},
    });
    return d;
}

json data_json(const DataSpec& d) {
    if (!d.file.empty()) return json{{"file", d.file}};
    return json{{"kind", d.shape.kind},
                {"amplitude", d.shape.amplitude},
                {"center", {d.shape.center.x, d.shape.center.y}},
                {"radius", d.shape.radius}};
}

void positive(double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw ValidationError(std::string("config: ") + name + " must be positive");
}

void validate(const RunConfig& c) {
    if (c.nx < 4) throw ValidationError("config: grid.nx must be at least 4");
    if (c.n_steps < 2 || c.n_steps % 2) throw ValidationError("config: grid.n_steps must be even and at least 2");
    if (c.heat_steps < 2) throw ValidationError("config: physics.heat_steps must be at least 2");
    for (auto [v, n] : {std::pair{c.fp_tol, "fp_tol"}, {c.flush_tol, "flush_tol"}, {c.glue_tol, "glue_tol"},
                        {c.hum_tol, "hum_tol"}, {c.gradient_floor, "gradient_floor"}, {c.eps_pen, "eps_pen"},
                        {c.nu, "nu"}, {c.delta, "delta"}, {c.cg_rtol, "cg_rtol"}, {c.gamma_width, "gamma_width"},
                        {c.gamma_amplitude, "gamma_amplitude"}, {c.T, "T"}, {c.T_star, "T_star"}, {c.alpha, "alpha"},
                        {c.M_max, "M_max"}})
        positive(v, n);
    for (double e : c.eps_sweep) positive(e, "eps_sweep entries");
    for (double e : c.horizons) positive(e, "horizons entries");
    if (c.eps_sweep.size() < 2 || c.horizons.size() < 2) throw ValidationError("config: sweeps need at least two points");
    if (!(c.kappa >= 0)) throw ValidationError("config: kappa must be non-negative");
    if (c.k.x == 0.0 && c.k.y == 0.0) throw ValidationError("config: buoyancy vector k must be non-zero");
    if (!(c.alpha < 1)) throw ValidationError("config: alpha must lie in (0,1)");
    if (!(c.T_star < c.T)) throw ValidationError("config: T_star must be smaller than T");
    if (c.M < 0) throw ValidationError("config: M must be non-negative (0 selects it)");
    if (c.K_max < 1) throw ValidationError("config: K_max must be at least 1");
    if (c.base_substeps < 1) throw ValidationError("config: base_substeps must be at least 1");
    if (c.contraction_pairs < 0 || c.contraction_m < 1) throw ValidationError("config: contraction sizes must be positive");
    if (c.workers < 0) throw ValidationError("config: workers must be non-negative");
    for (const DataSpec* d : {&c.y0, &c.theta0, &c.y1, &c.theta1}) {
        if (!d->file.empty()) continue;
        const std::string& k = d->shape.kind;
        if (k != "zero" && k != "bump" && k != "gaussian" && k != "solenoidal")
            throw ValidationError("config: unknown data shape '" + k + "'");
        if (k != "zero") positive(d->shape.radius, "data radius");
    }
    for (const DataSpec* d : {&c.y0, &c.y1})
        if (d->file.empty() && d->shape.kind != "zero" && d->shape.kind != "solenoidal")
            throw ValidationError("config: velocity data must be 'zero', 'solenoidal' or a file");
    for (const DataSpec* d : {&c.theta0, &c.theta1})
        if (d->file.empty() && d->shape.kind == "solenoidal")
            throw ValidationError("config: temperature data cannot be 'solenoidal'");
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    RunConfig c;
    GeometryConfig& g = c.geometry;
    dispatch(j, "", {
        {"geometry", [&](const json& v) {
             dispatch(v, "geometry", {
                 {"omega", [&](const json& x) { g.omega = rect_of(x); }},
                 {"omega1", [&](const json& x) { g.omega1 = rect_of(x); }},
                 {"omega2", [&](const json& x) { g.omega2 = rect_of(x); }},
                 {"omega3", [&](const json& x) { g.omega3 = rect_of(x); }},
                 {"margin2", [&](const json& x) { g.margin2 = x.get<double>(); }},
                 {"margin3", [&](const json& x) { g.margin3 = x.get<double>(); }},
                 {"swap_ends", [&](const json& x) { g.swap_ends = x.get<bool>(); }},
                 {"heat_extension", [&](const json& x) { g.heat_extension = x.get<double>(); }},
             });
         }},
        {"grid", [&](const json& v) {
             dispatch(v, "grid", {
                 {"nx", [&](const json& x) { c.nx = x.get<int>(); }},
                 {"ny", [&](const json& x) { c.ny = x.get<int>(); }},
                 {"n_steps", [&](const json& x) { c.n_steps = x.get<int>(); }},
             });
         }},
        {"profiles", [&](const json& v) {
             dispatch(v, "profiles", {
                 {"gamma_width", [&](const json& x) { c.gamma_width = x.get<double>(); }},
                 {"gamma_amplitude", [&](const json& x) { c.gamma_amplitude = x.get<double>(); }},
                 {"M", [&](const json& x) { c.M = x.get<double>(); }},
                 {"M_max", [&](const json& x) { c.M_max = x.get<double>(); }},
                 {"base_substeps", [&](const json& x) { c.base_substeps = x.get<int>(); }},
             });
         }},
        {"tolerances", [&](const json& v) {
             dispatch(v, "tolerances", {
                 {"fp_tol", [&](const json& x) { c.fp_tol = x.get<double>(); }},
                 {"flush_tol", [&](const json& x) { c.flush_tol = x.get<double>(); }},
                 {"glue_tol", [&](const json& x) { c.glue_tol = x.get<double>(); }},
                 {"hum_tol", [&](const json& x) { c.hum_tol = x.get<double>(); }},
                 {"gradient_floor", [&](const json& x) { c.gradient_floor = x.get<double>(); }},
                 {"eps_pen", [&](const json& x) { c.eps_pen = x.get<double>(); }},
                 {"eps_sweep", [&](const json& x) { c.eps_sweep = x.get<std::vector<double>>(); }},
                 {"horizons", [&](const json& x) { c.horizons = x.get<std::vector<double>>(); }},
                 {"nu", [&](const json& x) { c.nu = x.get<double>(); }},
                 {"delta", [&](const json& x) { c.delta = x.get<double>(); }},
                 {"K_max", [&](const json& x) { c.K_max = x.get<int>(); }},
                 {"cg_rtol", [&](const json& x) { c.cg_rtol = x.get<double>(); }},
             });
         }},
        {"physics", [&](const json& v) {
             dispatch(v, "physics", {
                 {"kappa", [&](const json& x) { c.kappa = x.get<double>(); }},
                 {"k", [&](const json& x) { c.k = vec_of(x); }},
                 {"T", [&](const json& x) { c.T = x.get<double>(); }},
                 {"T_star", [&](const json& x) { c.T_star = x.get<double>(); }},
                 {"alpha", [&](const json& x) { c.alpha = x.get<double>(); }},
                 {"heat_steps", [&](const json& x) { c.heat_steps = x.get<int>(); }},
             });
         }},
        {"data", [&](const json& v) {
             dispatch(v, "data", {
                 {"y0", [&](const json& x) { c.y0 = data_of(x, "data.y0"); }},
                 {"theta0", [&](const json& x) { c.theta0 = data_of(x, "data.theta0"); }},
                 {"y1", [&](const json& x) { c.y1 = data_of(x, "data.y1"); }},
                 {"theta1", [&](const json& x) { c.theta1 = data_of(x, "data.theta1"); }},
             });
         }},
        {"contraction", [&](const json& v) {
             dispatch(v, "contraction", {
                 {"pairs", [&](const json& x) { c.contraction_pairs = x.get<int>(); }},
                 {"m_max", [&](const json& x) { c.contraction_m = x.get<int>(); }},
             });
         }},
        {"seed", [&](const json& v) { c.seed = v.get<std::uint64_t>(); }},
        {"workers", [&](const json& v) { c.workers = v.get<int>(); }},
    });
    validate(c);
    if (c.ny != 0) {
        const StripGeometry geo = build_strip_geometry(c.geometry);
        const Grid2D outer = make_outer_grid(geo, c.nx);
        if (outer.ny() != c.ny)
            throw ValidationError("config: grid.ny = " + std::to_string(c.ny) + " but the geometry implies ny = " +
                                  std::to_string(outer.ny()));
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

ReturnConfig RunConfig::return_config() const {
    ReturnConfig r;
    r.geometry = geometry;
    r.nx = nx;
    r.n_steps = n_steps;
    r.gamma_width = gamma_width;
    r.gamma_amplitude = gamma_amplitude;
    r.M = M;
    r.M_max = M_max;
    r.flow.base_substeps = base_substeps;
    r.k = k;
    r.alpha = alpha;
    r.fp_tol = fp_tol;
    r.K_max = K_max;
    r.flush_rel = flush_tol;
    r.gradient_floor = gradient_floor;
    r.nu = nu;
    r.holder.seed = seed;
    return r;
}

HeatConfig RunConfig::heat_config() const {
    HeatConfig h;
    h.kappa = kappa;
    h.k = k;
    h.T_star = T_star;
    h.n_steps = heat_steps;
    h.fp_tol = fp_tol;
    h.hum_tol = hum_tol;
    h.alpha = alpha;
    h.hum.eps_pen = eps_pen;
    h.hum.cg_rtol = cg_rtol;
    h.holder.seed = seed;
    return h;
}

std::string RunConfig::to_json() const {
    const GeometryConfig& g = geometry;
    auto rect = [](const Rect& r) { return json{r.x0, r.x1, r.y0, r.y1}; };
    json geo{{"omega", rect(g.omega)},       {"omega1", rect(g.omega1)},   {"margin2", g.margin2},
             {"margin3", g.margin3},         {"swap_ends", g.swap_ends}, {"heat_extension", g.heat_extension}};
    if (g.omega2) geo["omega2"] = rect(*g.omega2);
    if (g.omega3) geo["omega3"] = rect(*g.omega3);
    json j{
        {"geometry", geo},
        {"grid", {{"nx", nx}, {"ny", ny}, {"n_steps", n_steps}}},
        {"profiles",
         {{"gamma_width", gamma_width}, {"gamma_amplitude", gamma_amplitude}, {"M", M}, {"M_max", M_max},
          {"base_substeps", base_substeps}}},
        {"tolerances",
         {{"fp_tol", fp_tol}, {"flush_tol", flush_tol}, {"glue_tol", glue_tol}, {"hum_tol", hum_tol},
          {"gradient_floor", gradient_floor}, {"eps_pen", eps_pen}, {"eps_sweep", eps_sweep}, {"horizons", horizons},
          {"nu", nu}, {"delta", delta}, {"K_max", K_max}, {"cg_rtol", cg_rtol}}},
        {"physics",
         {{"kappa", kappa}, {"k", {k.x, k.y}}, {"T", T}, {"T_star", T_star}, {"alpha", alpha},
          {"heat_steps", heat_steps}}},
        {"data", {{"y0", data_json(y0)}, {"theta0", data_json(theta0)}, {"y1", data_json(y1)}, {"theta1", data_json(theta1)}}},
        {"contraction", {{"pairs", contraction_pairs}, {"m_max", contraction_m}}},
        {"seed", seed},
        {"workers", workers},
    };
    return j.dump(2);
}

ScalarField resolve_scalar(const DataSpec& d, const Grid2D& g) {
    if (!d.file.empty()) return load_scalar(d.file, &g);
    return make_scalar(d.shape, g);
}

VectorField resolve_vector(const DataSpec& d, const Grid2D& g) {
    if (!d.file.empty()) return load_vector(d.file, &g);
    return make_vector(d.shape, g);
}

} // namespace bouss

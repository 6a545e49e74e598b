#include <bouss/geometry.hpp>
#include <bouss/errors.hpp>

#include <cmath>
#include <sstream>

namespace bouss {

namespace {

std::string rect_str(const Rect& r) {
    std::ostringstream os;
    os << "[" << r.x0 << "," << r.x1 << "]x[" << r.y0 << "," << r.y1 << "]";
    return os.str();
}

bool inside_open(const Rect& r, Vec2 p, double tol) {
    return p.x > r.x0 + tol && p.x < r.x1 - tol && p.y > r.y0 + tol && p.y < r.y1 - tol;
}

bool on_boundary(const Rect& r, Vec2 p, double tol) {
    return r.contains(p, tol) && !inside_open(r, p, tol);
}

} // namespace

const char* region_name(Region r) {
    switch (r) {
    case Region::Exterior: return "exterior";
    case Region::Gamma: return "boundary of omega";
    case Region::InsideOmega: return "inside omega";
    case Region::GammaMinus: return "inflow end";
    case Region::GammaPlus: return "outflow end";
    case Region::Sigma: return "strip side";
    case Region::Omega1Ring: return "strip ring";
    case Region::Omega2Boundary: return "boundary of omega2";
    case Region::Omega2Ring: return "omega2 ring";
    case Region::Omega3Boundary: return "boundary of omega3";
    case Region::Omega3Ring: return "omega3 ring";
    }
    return "?";
}

StripGeometry build_strip_geometry(const GeometryConfig& cfg) {
    const Rect& om = cfg.omega;
    const Rect& o1 = cfg.omega1;
    if (!(om.width() > 0 && om.height() > 0)) throw ValidationError("omega has non-positive extent");
    if (!(o1.width() > 0 && o1.height() > 0)) throw ValidationError("omega1 has non-positive extent");
    if (!o1.strictly_contains(om))
        throw ValidationError("omega " + rect_str(om) + " must lie strictly inside omega1 " +
                              rect_str(o1) + " (zero margin not allowed)");

    Rect o2, o3;
    if (cfg.omega2) {
        o2 = *cfg.omega2;
    } else {
        if (!(cfg.margin2 > 0)) throw ValidationError("margin2 must be positive");
        o2 = o1.inflate(cfg.margin2);
    }
    if (cfg.omega3) {
        o3 = *cfg.omega3;
    } else {
        if (!(cfg.margin3 > 0)) throw ValidationError("margin3 must be positive");
        o3 = o1.inflate(cfg.margin3);
    }
    if (!o2.strictly_contains(o1))
        throw ValidationError("omega1 " + rect_str(o1) + " must lie strictly inside omega2 " + rect_str(o2));
    if (!o3.strictly_contains(o2))
        throw ValidationError("omega2 " + rect_str(o2) + " must lie strictly inside omega3 " + rect_str(o3));
    if (!(cfg.heat_extension > 0)) throw ValidationError("heat_extension must be positive");

    StripGeometry g;
    g.omega = om;
    g.omega1 = o1;
    g.omega2 = o2;
    g.omega3 = o3;
    g.swap_ends = cfg.swap_ends;
    g.heat_extension = cfg.heat_extension;
    Segment left{{o1.x0, o1.y0}, {o1.x0, o1.y1}, {-1, 0}};
    Segment right{{o1.x1, o1.y0}, {o1.x1, o1.y1}, {1, 0}};
    g.gamma_minus = cfg.swap_ends ? right : left;
    g.gamma_plus = cfg.swap_ends ? left : right;
    g.sigma = {Segment{{o1.x0, o1.y0}, {o1.x1, o1.y0}, {0, -1}},
               Segment{{o1.x0, o1.y1}, {o1.x1, o1.y1}, {0, 1}}};
    g.gamma0 = {Segment{{om.x0, om.y0}, {om.x0, om.y1}, {-1, 0}},
                Segment{{om.x1, om.y0}, {om.x1, om.y1}, {1, 0}}};
    g.gamma_heat = Segment{{om.x0, om.y1}, {om.x1, om.y1}, {0, 1}};
    return g;
}

Region classify_node(const StripGeometry& g, Vec2 p, double h) {
    const double tol = 0.5 * h;
    if (!g.omega3.contains(p, tol)) return Region::Exterior;
    if (on_boundary(g.omega, p, tol)) return Region::Gamma;
    if (inside_open(g.omega, p, tol)) return Region::InsideOmega;
    const Rect& o1 = g.omega1;
    if (on_boundary(o1, p, tol)) {
        const bool at_x0 = std::abs(p.x - o1.x0) <= tol;
        const bool at_x1 = std::abs(p.x - o1.x1) <= tol;
        if (at_x0) return g.swap_ends ? Region::GammaPlus : Region::GammaMinus;
        if (at_x1) return g.swap_ends ? Region::GammaMinus : Region::GammaPlus;
        return Region::Sigma;
    }
    if (inside_open(o1, p, tol)) return Region::Omega1Ring;
    if (on_boundary(g.omega2, p, tol)) return Region::Omega2Boundary;
    if (inside_open(g.omega2, p, tol)) return Region::Omega2Ring;
    if (on_boundary(g.omega3, p, tol)) return Region::Omega3Boundary;
    return Region::Omega3Ring;
}

std::vector<Region> build_mask(const StripGeometry& g, const Grid2D& grid) {
    std::vector<Region> m(grid.size());
    for (int j = 0; j <= grid.ny(); ++j)
        for (int i = 0; i <= grid.nx(); ++i) m[grid.idx(i, j)] = classify_node(g, grid.node(i, j), grid.h());
    return m;
}

Grid2D make_outer_grid(const StripGeometry& g, int nx_strip) {
    if (nx_strip < 4) throw ValidationError("grid resolution too small");
    const double h = g.omega1.width() / nx_strip;
    Grid2D grid = Grid2D::covering(g.omega3, h);
    for (const Rect* r : {&g.omega, &g.omega1, &g.omega2})
        if (!grid.aligned(*r))
            throw ValidationError("domain " + rect_str(*r) + " is not aligned with grid spacing " +
                                  std::to_string(h));
    return grid;
}

} // namespace bouss

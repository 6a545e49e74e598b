#include <bouss/potential.hpp>
#include <bouss/errors.hpp>
#include <bouss/smooth.hpp>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace bouss {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Lookup {
    const Grid2D& g;
    bool in_grid(int i, int j) const { return i >= 0 && j >= 0 && i <= g.nx() && j <= g.ny(); }
};

// mirror across the side separating 'from' and 'g' (both on grid lines)
Ghost mirror(Vec2 g, Vec2 from) { return Ghost{from * 2.0 - g, 0.0, 1.0, true, false}; }
Ghost odd(Vec2 g, Vec2 from, double value) { return Ghost{from * 2.0 - g, 2.0 * value, -1.0, false, false}; }

class Assembler {
public:
    explicit Assembler(const PotentialDomain& d) : dom(d), g(d.grid), lk{d.grid} {
        inside.assign(g.size(), 0);
        dval.assign(g.size(), kNaN);
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) {
                const std::size_t k = g.idx(i, j);
                const Vec2 p = g.node(i, j);
                if (!dom.inside(p)) continue;
                inside[k] = 1;
                if (auto v = dom.dirichlet(p)) dval[k] = *v;
            }
    }

    int unknown(std::size_t k) {
        auto it = id.find(k);
        if (it != id.end()) return it->second;
        const int n = int(order.size());
        id.emplace(k, n);
        order.push_back(k);
        return n;
    }

    // add coef * phi(i,j) to the row; requests from node 'from'
    void add(int row, int i, int j, double coef, Vec2 from, int depth = 0) {
        if (coef == 0.0) return;
        if (depth > 4) throw SolverError("potential: ghost continuation does not terminate");
        if (lk.in_grid(i, j)) {
            const std::size_t k = g.idx(i, j);
            if (inside[k]) {
                if (!std::isnan(dval[k]))
                    rhs_add(row, -coef * dval[k]);
                else
                    trip.emplace_back(row, unknown(k), coef);
                return;
            }
        }
        const Vec2 p = g.node(i, j);
        auto gh = dom.ghost(p, from);
        if (!gh) throw SolverError("potential: node outside the domain has no continuation rule");
        if (gh->shared) {
            if (!lk.in_grid(i, j)) throw SolverError("potential: shared ghost outside the grid");
            trip.emplace_back(row, unknown(g.idx(i, j)), coef);
            return;
        }
        rhs_add(row, -coef * gh->a);
        add_interp(row, gh->image, coef * gh->b, p, depth + 1);
    }

    void add_interp(int row, Vec2 q, double coef, Vec2 from, int depth) {
        double fx = (q.x - g.x0()) / g.h(), fy = (q.y - g.y0()) / g.h();
        int i = int(std::floor(fx)), j = int(std::floor(fy));
        double tx = fx - i, ty = fy - j;
        if (tx > 1.0 - 1e-12) { ++i; tx = 0.0; }
        if (ty > 1.0 - 1e-12) { ++j; ty = 0.0; }
        if (tx < 1e-12) tx = 0.0;
        if (ty < 1e-12) ty = 0.0;
        add(row, i, j, coef * (1 - tx) * (1 - ty), from, depth);
        add(row, i + 1, j, coef * tx * (1 - ty), from, depth);
        add(row, i, j + 1, coef * (1 - tx) * ty, from, depth);
        add(row, i + 1, j + 1, coef * tx * ty, from, depth);
    }

    void rhs_add(int row, double v) {
        if (std::size_t(row) >= rhs.size()) rhs.resize(std::size_t(row) + 1, 0.0);
        rhs[row] += v;
    }

    const PotentialDomain& dom;
    const Grid2D& g;
    Lookup lk;
    std::vector<std::uint8_t> inside;
    std::vector<double> dval;
    std::unordered_map<std::size_t, int> id;
    std::vector<std::size_t> order;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> rhs;
};

} // namespace

PotentialDomain PotentialDomain::rectangle(const Rect& r, double h, bool swap_ends) {
    PotentialDomain d;
    d.grid = Grid2D::covering(r, h);
    d.name = "rectangle";
    const double tol = 1e-9 * h;
    const double left = swap_ends ? 1.0 : -1.0;
    d.inside = [r, tol](Vec2 p) { return r.contains(p, tol); };
    d.dirichlet = [r, tol, left](Vec2 p) -> std::optional<double> {
        if (std::abs(p.x - r.x0) <= tol) return left;
        if (std::abs(p.x - r.x1) <= tol) return -left;
        return std::nullopt;
    };
    d.ghost = [r, tol, left](Vec2 p, Vec2 from) -> std::optional<Ghost> {
        if (p.x < r.x0 - tol) return odd(p, from, left);
        if (p.x > r.x1 + tol) return odd(p, from, -left);
        return mirror(p, from);
    };
    return d;
}

PotentialDomain PotentialDomain::annular_sector(double h) {
    PotentialDomain d;
    d.grid = Grid2D::covering(Rect{-0.25, 2.25, -0.25, 2.25}, h);
    d.name = "annular sector";
    const double tol = 1e-9 * h;
    d.inside = [tol](Vec2 p) {
        const double r = p.norm();
        return p.x >= -tol && p.y >= -tol && r >= 1.0 - tol && r <= 2.0 + tol;
    };
    d.dirichlet = [tol](Vec2 p) -> std::optional<double> {
        if (std::abs(p.y) <= tol) return -1.0;
        if (std::abs(p.x) <= tol) return 1.0;
        return std::nullopt;
    };
    d.ghost = [tol](Vec2 p, Vec2) -> std::optional<Ghost> {
        const bool below = p.y < -tol, left = p.x < -tol;
        if (below && left) return Ghost{{-p.x, -p.y}, 4.0, 1.0, false, true};
        if (below) return Ghost{{p.x, -p.y}, -2.0, -1.0, false, true};
        if (left) return Ghost{{-p.x, p.y}, 2.0, -1.0, false, true};
        const double r = p.norm();
        const double R = r < 1.5 ? 1.0 : 2.0;
        return Ghost{p * ((2.0 * R - r) / r), 0.0, 1.0, true, true};
    };
    return d;
}

PotentialDomain PotentialDomain::l_shape(double h) {
    PotentialDomain d;
    d.grid = Grid2D::covering(Rect{0.0, 2.0, 0.0, 2.0}, h);
    d.name = "L-shape";
    const double tol = 1e-9 * h;
    d.inside = [tol](Vec2 p) {
        return (Rect{0, 2, 0, 1}.contains(p, tol)) || (Rect{0, 1, 0, 2}.contains(p, tol));
    };
    d.dirichlet = [tol](Vec2 p) -> std::optional<double> {
        if (std::abs(p.x) <= tol) return -1.0;
        if (std::abs(p.x - 2.0) <= tol && p.y <= 1.0 + tol) return 1.0;
        return std::nullopt;
    };
    d.ghost = [tol](Vec2 p, Vec2 from) -> std::optional<Ghost> {
        if (p.x < -tol) return odd(p, from, -1.0);
        if (p.x > 2.0 + tol) return odd(p, from, 1.0);
        return mirror(p, from);
    };
    return d;
}

PotentialSolution solve_potential(const PotentialDomain& dom) {
    Assembler as(dom);
    const Grid2D& g = dom.grid;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const std::size_t k = g.idx(i, j);
            if (as.inside[k] && std::isnan(as.dval[k])) as.unknown(k);
        }
    if (as.order.empty()) throw SolverError("potential: no unknowns (degenerate domain)");
    // rows are created in registration order; ghost unknowns may be appended while assembling
    for (std::size_t r = 0; r < as.order.size(); ++r) {
        const std::size_t k = as.order[r];
        const int i = int(k % std::size_t(g.nxn())), j = int(k / std::size_t(g.nxn()));
        const Vec2 p = g.node(i, j);
        const int row = int(r);
        as.rhs_add(row, 0.0);
        if (as.inside[k]) {
            as.trip.emplace_back(row, row, 4.0);
            as.add(row, i + 1, j, -1.0, p);
            as.add(row, i - 1, j, -1.0, p);
            as.add(row, i, j + 1, -1.0, p);
            as.add(row, i, j - 1, -1.0, p);
        } else {
            auto gh = dom.ghost(p, p);
            if (!gh) throw SolverError("potential: ghost unknown without continuation rule");
            as.trip.emplace_back(row, row, 1.0);
            as.rhs_add(row, gh->a);
            as.add_interp(row, gh->image, -gh->b, p, 1);
        }
    }
    const int n = int(as.order.size());
    as.rhs.resize(std::size_t(n), 0.0);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(as.trip.begin(), as.trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("potential: singular system (degenerate geometry)");
    Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(as.rhs.data(), n);
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("potential: sparse solve failed");

    PotentialSolution s;
    s.grid = g;
    s.inside = as.inside;
    s.unknowns = n;
    s.phi.assign(g.size(), kNaN);
    std::vector<double> ghostval(g.size(), kNaN);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (as.inside[k] && !std::isnan(as.dval[k])) s.phi[k] = as.dval[k];
    for (int r = 0; r < n; ++r) {
        const std::size_t k = as.order[r];
        (as.inside[k] ? s.phi[k] : ghostval[k]) = x[r];
    }

    // value at a possibly-outside node for gradient evaluation; NaN if unavailable
    auto node_val = [&](int i, int j) -> double {
        if (i < 0 || j < 0 || i > g.nx() || j > g.ny()) return kNaN;
        const std::size_t k = g.idx(i, j);
        return as.inside[k] ? s.phi[k] : ghostval[k];
    };
    auto interp = [&](Vec2 q) -> double {
        double fx = (q.x - g.x0()) / g.h(), fy = (q.y - g.y0()) / g.h();
        int i = int(std::floor(fx)), j = int(std::floor(fy));
        double tx = fx - i, ty = fy - j;
        if (tx > 1.0 - 1e-12) { ++i; tx = 0.0; }
        if (ty > 1.0 - 1e-12) { ++j; ty = 0.0; }
        double v = 0.0;
        const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
        const int ci[4] = {i, i + 1, i, i + 1}, cj[4] = {j, j, j + 1, j + 1};
        for (int c = 0; c < 4; ++c)
            if (w[c] > 1e-12) v += w[c] * node_val(ci[c], cj[c]);
        return v;
    };
    auto neighbour = [&](int i, int j, int di, int dj) -> double {
        const int a = i + di, b = j + dj;
        if (a >= 0 && b >= 0 && a <= g.nx() && b <= g.ny() && as.inside[g.idx(a, b)]) return s.phi[g.idx(a, b)];
        auto gh = dom.ghost(g.node(a, b), g.node(i, j));
        if (!gh || !gh->neumann) return kNaN;
        if (gh->shared) return node_val(a, b);
        return gh->a + gh->b * interp(gh->image);
    };
    auto in = [&](int a, int b) { return a >= 0 && b >= 0 && a <= g.nx() && b <= g.ny() && as.inside[g.idx(a, b)]; };
    auto deriv = [&](int i, int j, int di, int dj) -> double {
        const double c = s.phi[g.idx(i, j)];
        const double r = neighbour(i, j, di, dj), l = neighbour(i, j, -di, -dj);
        const double h = g.h();
        if (!std::isnan(r) && !std::isnan(l)) return (r - l) / (2 * h);
        if (in(i + di, j + dj) && in(i + 2 * di, j + 2 * dj))
            return (-3 * c + 4 * r - s.phi[g.idx(i + 2 * di, j + 2 * dj)]) / (2 * h);
        if (in(i - di, j - dj) && in(i - 2 * di, j - 2 * dj))
            return (3 * c - 4 * l + s.phi[g.idx(i - 2 * di, j - 2 * dj)]) / (2 * h);
        if (!std::isnan(r)) return (r - c) / h;
        if (!std::isnan(l)) return (c - l) / h;
        return 0.0;
    };
    s.g1.assign(g.size(), kNaN);
    s.g2.assign(g.size(), kNaN);
    const double ih2 = 1.0 / (g.h() * g.h());
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const std::size_t k = g.idx(i, j);
            if (!as.inside[k]) continue;
            s.g1[k] = deriv(i, j, 1, 0);
            s.g2[k] = deriv(i, j, 0, 1);
            if (std::isnan(as.dval[k]) && in(i + 1, j) && in(i - 1, j) && in(i, j + 1) && in(i, j - 1)) {
                const double lap = s.phi[g.idx(i + 1, j)] + s.phi[g.idx(i - 1, j)] + s.phi[g.idx(i, j + 1)] +
                                   s.phi[g.idx(i, j - 1)] - 4.0 * s.phi[k];
                s.residual = std::max(s.residual, std::abs(lap) * ih2);
            }
        }
    return s;
}

GradientFloorReport verify_gradient_floor(const PotentialSolution& s, double floor) {
    GradientFloorReport r;
    r.gradient_floor = floor;
    r.min_grad = std::numeric_limits<double>::infinity();
    r.phi_min = std::numeric_limits<double>::infinity();
    r.phi_max = -std::numeric_limits<double>::infinity();
    const Grid2D& g = s.grid;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const std::size_t k = g.idx(i, j);
            if (!s.inside[k]) continue;
            const double gm = std::hypot(s.g1[k], s.g2[k]);
            if (gm < r.min_grad) {
                r.min_grad = gm;
                r.argmin_grad = g.node(i, j);
            }
            r.phi_min = std::min(r.phi_min, s.phi[k]);
            r.phi_max = std::max(r.phi_max, s.phi[k]);
        }
    const bool grad_ok = r.min_grad >= floor;
    const bool range_ok = r.phi_min >= -1.0 - 1e-12 && r.phi_max <= 1.0 + 1e-12;
    r.pass = grad_ok && range_ok;
    std::ostringstream os;
    os << "min|grad phi|=" << r.min_grad << " at (" << r.argmin_grad.x << "," << r.argmin_grad.y
       << "), phi in [" << r.phi_min << "," << r.phi_max << "]";
    if (!grad_ok) os << "; gradient below floor " << floor;
    if (!range_ok) os << "; potential leaves [-1,1]";
    r.detail = os.str();
    return r;
}

GradientFloorReport verify_return_gradient_floor(const ReturnPotential& p, double floor) { return verify_gradient_floor(p.strip, floor); }


namespace {

struct Extension {
    ScalarField phi;
    VectorField drift;
    double level = 0.0, band = 0.0;
};

// Continuation of the strip potential (odd across the Dirichlet ends, even across the
// zero-flux sides) passed through a saturation s that is the identity up to the largest
// strip value and flattens over a band of potential levels. The compact extension is
// s(cont) times a cutoff; the drift is the cutoff times grad s(cont), so particles park on
// the plateau instead of collapsing onto a sharp maximum.
Extension build_extension(const ScalarField& phi_strip, const StripGeometry& geo, const Grid2D& outer,
                          double min_grad) {
    const Grid2D& sg = phi_strip.grid;
    int di, dj;
    outer.offset_of(sg, di, dj);
    const double h = outer.h();
    const Rect& o1 = geo.omega1;
    const Rect& o2 = geo.omega2;
    const Rect& o3 = geo.omega3;
    const double rl = o2.x0 - o3.x0, rr = o3.x1 - o2.x1, rb = o2.y0 - o3.y0, rt = o3.y1 - o2.y1;
    const double ring = std::min({rl, rr, rb, rt});
    if (ring < 4.0 * h)
        throw ValidationError("outer margin " + std::to_string(ring) + " is too thin for the extension blend (needs >= 4h)");
    if (o1.x0 - o3.x0 > o1.width() + 1e-12 || o3.x1 - o1.x1 > o1.width() + 1e-12 ||
        o1.y0 - o3.y0 > o1.height() + 1e-12 || o3.y1 - o1.y1 > o1.height() + 1e-12)
        throw ValidationError("outer margin exceeds the strip extent; reflection continuation undefined");
    if (!(min_grad > 0.0)) throw ValidationError("extension needs a positive gradient floor on the strip");

    const int sx = sg.nx(), sy = sg.ny();
    auto cont = [&](int i, int j) {
        int a = i - di, b = j - dj;
        if (b < 0) b = -b;
        if (b > sy) b = 2 * sy - b;
        if (a < 0) return 2.0 * phi_strip(0, b) - phi_strip(-a, b);
        if (a > sx) return 2.0 * phi_strip(sx, b) - phi_strip(2 * sx - a, b);
        return phi_strip(a, b);
    };
    Extension e;
    e.level = phi_strip.max_abs();
    const double end_gap = std::min(o1.x0 - o3.x0, o3.x1 - o1.x1);
    e.band = 0.8 * end_gap * min_grad;
    const double L = e.level, D = e.band;
    auto sat = [L, D](double v) {
        const double u = std::abs(v);
        const double t = (u - L) / D;
        const double r = u <= L ? u : (t >= 1.0 ? L + 0.5 * D : L + D * (t - smoothstep5_integral(t)));
        return v < 0 ? -r : r;
    };
    auto dsat = [L, D](double v) {
        const double u = std::abs(v);
        return u <= L ? 1.0 : 1.0 - smoothstep5((u - L) / D);
    };
    auto chi = [&](Vec2 p) {
        return interval_cutoff(p.x, o2.x0, o2.x1, 0.9 * rl, 0.9 * rr) *
               interval_cutoff(p.y, o2.y0, o2.y1, 0.9 * rb, 0.9 * rt);
    };

    ScalarField tilde(outer, 0.0, "phi_continuation");
    for (int j = 0; j <= outer.ny(); ++j)
        for (int i = 0; i <= outer.nx(); ++i) tilde(i, j) = cont(i, j);

    e.phi = ScalarField(outer, 0.0, "phi");
    e.drift = VectorField(outer, "grad_phi");
    const double inv2h = 1.0 / (2.0 * h);
    for (int j = 0; j <= outer.ny(); ++j)
        for (int i = 0; i <= outer.nx(); ++i) {
            const Vec2 p = outer.node(i, j);
            const double c = chi(p);
            const int a = i - di, b = j - dj;
            if (a >= 0 && a <= sx && b >= 0 && b <= sy)
                e.phi(i, j) = phi_strip(a, b);  // exact on the strip
            else
                e.phi(i, j) = c == 0.0 ? 0.0 : sat(tilde(i, j)) * c;
            if (c == 0.0 || i == 0 || j == 0 || i == outer.nx() || j == outer.ny()) continue;
            const double s = c * dsat(tilde(i, j));
            const std::size_t k = outer.idx(i, j);
            e.drift.u[k] = s * (tilde(i + 1, j) - tilde(i - 1, j)) * inv2h;
            e.drift.w[k] = s * (tilde(i, j + 1) - tilde(i, j - 1)) * inv2h;
        }
    return e;
}

} // namespace

ScalarField extend_potential(const ScalarField& phi_strip, const StripGeometry& geo, const Grid2D& outer,
                             double min_grad, ExtensionProfile* profile) {
    Extension e = build_extension(phi_strip, geo, outer, min_grad);
    if (profile) *profile = {e.level, e.band};
    return std::move(e.phi);
}

ReturnPotential solve_return_potential(const StripGeometry& geo, const Grid2D& outer) {
    if (!outer.aligned(geo.omega1) || !outer.aligned(geo.omega2) || !outer.aligned(geo.omega3))
        throw ValidationError("grid is not aligned with the nested domains");
    ReturnPotential rp;
    rp.geom = geo;
    rp.grid = outer;
    rp.strip_grid = outer.subgrid(geo.omega1);
    PotentialDomain dom = PotentialDomain::rectangle(geo.omega1, outer.h(), geo.swap_ends);
    rp.strip = solve_potential(dom);
    rp.residual = rp.strip.residual;
    const GradientFloorReport gf = verify_gradient_floor(rp.strip, 0.0);
    if (!(gf.min_grad > 0.0))
        throw AuditFailure("harmonic_potential", "non-vanishing gradient on the strip", gf.detail);
    ScalarField ps(rp.strip_grid, 0.0, "phi_strip");
    ps.v = rp.strip.phi;
    Extension e = build_extension(ps, geo, outer, gf.min_grad);
    rp.phi = std::move(e.phi);
    rp.grad_phi = std::move(e.drift);
    rp.sat_level = e.level;
    rp.sat_band = e.band;
    rp.support_mask.assign(outer.size(), 0);
    for (std::size_t k = 0; k < outer.size(); ++k) {
        rp.support_mask[k] = rp.grad_phi.u[k] != 0.0 || rp.grad_phi.w[k] != 0.0;
        rp.grad_sup = std::max(rp.grad_sup, std::hypot(rp.grad_phi.u[k], rp.grad_phi.w[k]));
    }
    return rp;
}

} // namespace bouss

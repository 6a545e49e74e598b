#include <bouss/hoelder.hpp>
#include <bouss/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

namespace bouss {

namespace {

struct Offset {
    int di, dj;
    double w;      // (h |d|)^-alpha
    double bound;  // upper bound on the quotient for this offset
};

// weight table indexed by (|di|, |dj|)
struct WeightTable {
    int nx, ny;
    std::vector<double> w;
    WeightTable(int nxn, int nyn, double h, double alpha) : nx(nxn), ny(nyn), w(std::size_t(nxn) * nyn) {
        for (int b = 0; b < nyn; ++b)
            for (int a = 0; a < nxn; ++a)
                w[std::size_t(b) * nxn + a] =
                    (a == 0 && b == 0) ? 0.0 : std::pow(h * std::hypot(double(a), double(b)), -alpha);
    }
    double operator()(int a, int b) const { return w[std::size_t(std::abs(b)) * nx + std::abs(a)]; }
};

// max_x |f(x+d) - f(x)| over valid x for one offset
double offset_max(const double* f, int nxn, int nyn, int di, int dj) {
    const int j0 = std::max(0, -dj), j1 = std::min(nyn, nyn - dj);
    const int i1 = nxn - di;
    double m = 0.0;
    for (int j = j0; j < j1; ++j) {
        const double* a = f + std::size_t(j) * nxn;
        const double* b = f + std::size_t(j + dj) * nxn + di;
        for (int i = 0; i < i1; ++i) m = std::max(m, std::abs(b[i] - a[i]));
    }
    return m;
}

double exhaustive_scan(const double* f, int nxn, int nyn, const WeightTable& wt, Exec exec) {
    double lo = f[0], hi = f[0], lx = 0.0, ly = 0.0;
    for (int j = 0; j < nyn; ++j)
        for (int i = 0; i < nxn; ++i) {
            const double v = f[std::size_t(j) * nxn + i];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (i + 1 < nxn) lx = std::max(lx, std::abs(f[std::size_t(j) * nxn + i + 1] - v));
            if (j + 1 < nyn) ly = std::max(ly, std::abs(f[std::size_t(j + 1) * nxn + i] - v));
        }
    const double range = hi - lo;
    if (range == 0.0) return 0.0;

    std::vector<Offset> offs;
    offs.reserve(std::size_t(nxn) * (2 * nyn));
    for (int di = 0; di < nxn; ++di)
        for (int dj = -(nyn - 1); dj < nyn; ++dj) {
            if (di == 0 && dj <= 0) continue;
            const double w = wt(di, dj);
            const double lip = di * lx + std::abs(dj) * ly;
            offs.push_back({di, dj, w, std::min(range, lip) * w});
        }
    std::sort(offs.begin(), offs.end(), [](const Offset& a, const Offset& b) {
        if (a.bound != b.bound) return a.bound > b.bound;
        if (a.di != b.di) return a.di < b.di;
        return a.dj < b.dj;
    });

    double best = 0.0;
    const std::size_t n = offs.size();
    if (exec == Exec::Serial) {
        for (std::size_t k = 0; k < n; ++k) {
            if (offs[k].bound <= best) break;
            best = std::max(best, offset_max(f, nxn, nyn, offs[k].di, offs[k].dj) * offs[k].w);
        }
        return best;
    }
    constexpr std::size_t block = 64;
    for (std::size_t k0 = 0; k0 < n; k0 += block) {
        if (offs[k0].bound <= best) break;
        const std::size_t k1 = std::min(n, k0 + block);
        double bm = best;
#pragma omp parallel for reduction(max : bm) schedule(dynamic, 1)
        for (std::ptrdiff_t k = std::ptrdiff_t(k0); k < std::ptrdiff_t(k1); ++k) {
            if (offs[k].bound <= best) continue;
            bm = std::max(bm, offset_max(f, nxn, nyn, offs[k].di, offs[k].dj) * offs[k].w);
        }
        best = bm;
    }
    return best;
}

struct Sampler {
    std::vector<int> ai, aj;  // anchor nodes
};

Sampler make_anchors(int nxn, int nyn, int n_anchor, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double aspect = double(nxn) / nyn;
    int bx = std::clamp(int(std::lround(std::sqrt(n_anchor * aspect))), 1, nxn);
    int by = std::clamp((n_anchor + bx - 1) / bx, 1, nyn);
    Sampler s;
    for (int b = 0; b < by; ++b)
        for (int a = 0; a < bx; ++a) {
            const int i0 = int(std::int64_t(a) * nxn / bx), i1 = int(std::int64_t(a + 1) * nxn / bx);
            const int j0 = int(std::int64_t(b) * nyn / by), j1 = int(std::int64_t(b + 1) * nyn / by);
            if (i1 <= i0 || j1 <= j0) continue;
            std::uniform_int_distribution<int> di(i0, i1 - 1), dj(j0, j1 - 1);
            const int i = di(rng);
            s.ai.push_back(i);
            s.aj.push_back(dj(rng));
        }
    return s;
}

double sampled_scan(const double* f, int nxn, int nyn, const WeightTable& wt, const Sampler& s, int radius,
                    Exec exec) {
    const std::ptrdiff_t na = std::ptrdiff_t(s.ai.size());
    double best = 0.0;
    auto anchor_row = [&](std::ptrdiff_t p) {
        double m = 0.0;
        const double fp = f[std::size_t(s.aj[p]) * nxn + s.ai[p]];
        for (std::ptrdiff_t q = p + 1; q < na; ++q) {
            const double fq = f[std::size_t(s.aj[q]) * nxn + s.ai[q]];
            m = std::max(m, std::abs(fq - fp) * wt(s.ai[q] - s.ai[p], s.aj[q] - s.aj[p]));
        }
        return m;
    };
    auto local_row = [&](int j) {
        double m = 0.0;
        for (int i = 0; i < nxn; ++i) {
            const double fp = f[std::size_t(j) * nxn + i];
            for (int b = 0; b <= radius; ++b) {
                if (j + b >= nyn) break;
                for (int a = -radius; a <= radius; ++a) {
                    if (b == 0 && a <= 0) continue;
                    if (i + a < 0 || i + a >= nxn) continue;
                    m = std::max(m, std::abs(f[std::size_t(j + b) * nxn + i + a] - fp) * wt(a, b));
                }
            }
        }
        return m;
    };
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t p = 0; p < na; ++p) best = std::max(best, anchor_row(p));
        for (int j = 0; j < nyn; ++j) best = std::max(best, local_row(j));
        return best;
    }
#pragma omp parallel for reduction(max : best) schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < na; ++p) best = std::max(best, anchor_row(p));
#pragma omp parallel for reduction(max : best) schedule(static)
    for (int j = 0; j < nyn; ++j) best = std::max(best, local_row(j));
    return best;
}

void check_field(const Grid2D& g, std::size_t n, int m) {
    if (n == 0) throw ValidationError("holder norm of an empty field");
    if (m < 0 || m > 2) throw ValidationError("holder norm order m must be 0, 1 or 2 (got " + std::to_string(m) + ")");
    if (g.size() < std::size_t((m + 1) * (m + 1))) throw ValidationError("field has too few nodes for the requested order");
}

double seminorm_impl(const ScalarField& f, double, const HolderOptions& opt, const WeightTable& wt,
                     const Sampler* s) {
    const Grid2D& g = f.grid;
    for (double v : f.v)
        if (!std::isfinite(v)) throw ValidationError("holder norm of a non-finite field");
    if (!s) return exhaustive_scan(f.v.data(), g.nxn(), g.nyn(), wt, opt.exec);
    return sampled_scan(f.v.data(), g.nxn(), g.nyn(), wt, *s, opt.local_radius, opt.exec);
}

void accumulate(HolderReport& r, const ScalarField& f, int m, double alpha, const HolderOptions& opt,
                const WeightTable& wt, const Sampler* s) {
    r.sup_norm = std::max(r.sup_norm, f.max_abs());
    for (int k = 0; k <= m; ++k) {
        auto ds = derivatives_of_order(f, k);
        for (auto& d : ds) {
            const double sup = d.max_abs();
            r.sups.push_back(sup);
            r.total += sup;
            if (k == m) {
                const double sn = seminorm_impl(d, alpha, opt, wt, s);
                r.seminorms.push_back(sn);
                r.total += sn;
            }
        }
    }
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("holder exponent must lie in (0,1)");
}

} // namespace

double pair_seminorm(const ScalarField& f, double alpha, const HolderOptions& opt) {
    check_alpha(alpha);
    check_field(f.grid, f.v.size(), 0);
    const Grid2D& g = f.grid;
    WeightTable wt(g.nxn(), g.nyn(), g.h(), alpha);
    if (g.size() <= opt.exhaustive_limit) return seminorm_impl(f, alpha, opt, wt, nullptr);
    Sampler s = make_anchors(g.nxn(), g.nyn(), opt.anchors, opt.seed);
    return seminorm_impl(f, alpha, opt, wt, &s);
}

HolderReport holder_norm(const ScalarField& f, int m, double alpha, const HolderOptions& opt) {
    check_alpha(alpha);
    check_field(f.grid, f.v.size(), m);
    const Grid2D& g = f.grid;
    HolderReport r;
    r.m = m;
    r.alpha = alpha;
    WeightTable wt(g.nxn(), g.nyn(), g.h(), alpha);
    if (g.size() <= opt.exhaustive_limit) {
        accumulate(r, f, m, alpha, opt, wt, nullptr);
    } else {
        Sampler s = make_anchors(g.nxn(), g.nyn(), opt.anchors, opt.seed);
        accumulate(r, f, m, alpha, opt, wt, &s);
    }
    return r;
}

HolderReport holder_norm(const VectorField& f, int m, double alpha, const HolderOptions& opt) {
    check_alpha(alpha);
    check_field(f.grid, f.u.size(), m);
    const Grid2D& g = f.grid;
    HolderReport r;
    r.m = m;
    r.alpha = alpha;
    WeightTable wt(g.nxn(), g.nyn(), g.h(), alpha);
    std::optional<Sampler> s;
    if (g.size() > opt.exhaustive_limit) s = make_anchors(g.nxn(), g.nyn(), opt.anchors, opt.seed);
    for (int c = 0; c < 2; ++c) accumulate(r, f.component(c), m, alpha, opt, wt, s ? &*s : nullptr);
    return r;
}

double time_sup_norm(const std::vector<ScalarField>& hist, int m, double alpha, const HolderOptions& opt) {
    if (hist.empty()) throw ValidationError("time sup norm of an empty history");
    double best = 0.0;
    for (const auto& f : hist) best = std::max(best, holder_norm(f, m, alpha, opt).total);
    return best;
}

double time_sup_norm(const std::vector<VectorField>& hist, int m, double alpha, const HolderOptions& opt) {
    if (hist.empty()) throw ValidationError("time sup norm of an empty history");
    double best = 0.0;
    for (const auto& f : hist) best = std::max(best, holder_norm(f, m, alpha, opt).total);
    return best;
}

std::string HolderReport::csv_header() { return "run_id,slab,m,alpha,sup,seminorms,total"; }

std::string HolderReport::csv_row(const std::string& run_id, int slab) const {
    std::ostringstream os;
    char buf[64];
    os << run_id << ',' << slab << ',' << m << ',';
    std::snprintf(buf, sizeof buf, "%.17g", alpha);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", sup_norm);
    os << buf << ',';
    for (std::size_t k = 0; k < seminorms.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", seminorms[k]);
        os << (k ? ";" : "") << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", total);
    os << ',' << buf;
    return os.str();
}

GronwallVerdict check_gronwall_bound(const std::vector<ScalarField>& u, const std::vector<ScalarField>& g,
                                     const std::vector<VectorField>& v, const TimeGrid& tg, int m,
                                     double alpha, double K, const HolderOptions& opt) {
    const std::size_t n = std::size_t(tg.n_steps) + 1;
    if (u.size() != n) throw ValidationError("transported history length does not match the time grid");
    if (!g.empty() && g.size() != n) throw ValidationError("source history length does not match the time grid");
    if (v.size() != n) throw ValidationError("velocity history length does not match the time grid");
    for (std::size_t k = 0; k < n; ++k) {
        if (!u[k].grid.same_as(u[0].grid) || !v[k].grid.same_as(u[0].grid) ||
            (!g.empty() && !g[k].grid.same_as(u[0].grid)))
            throw ValidationError("histories live on different grids");
    }
    const double dt = tg.dt();
    GronwallVerdict r;
    double ig = 0.0, iv = 0.0, prev_g = 0.0, prev_v = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        r.lhs = std::max(r.lhs, holder_norm(u[k], m, alpha, opt).total);
        const double ng = g.empty() ? 0.0 : holder_norm(g[k], m, alpha, opt).total;
        const double nv = holder_norm(v[k], m, alpha, opt).total;
        if (k > 0) {
            ig += 0.5 * dt * (ng + prev_g);
            iv += 0.5 * dt * (nv + prev_v);
        }
        prev_g = ng;
        prev_v = nv;
    }
    r.source = ig + holder_norm(u[0], m, alpha, opt).total;
    r.speed = iv;
    r.rhs = r.source * std::exp(K * r.speed);
    r.margin = r.rhs - r.lhs;
    r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
    if (r.lhs <= r.source * (1.0 + 1e-12))
        r.K_min = 0.0;
    else if (r.speed <= 0.0 || r.source <= 0.0)
        r.K_min = std::numeric_limits<double>::infinity();
    else
        r.K_min = std::log(r.lhs / r.source) / r.speed;
    return r;
}

} // namespace bouss

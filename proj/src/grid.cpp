#include <bouss/grid.hpp>
#include <bouss/errors.hpp>

#include <cmath>
#include <sstream>

namespace bouss {

namespace {
constexpr double kAlignTol = 1e-9;
}

Grid2D::Grid2D(double x0, double y0, double h, int nx, int ny)
    : x0_(x0), y0_(y0), h_(h), nx_(nx), ny_(ny) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid spacing must be positive");
    if (nx < 1 || ny < 1) throw ValidationError("grid needs at least one cell per direction");
}

Grid2D Grid2D::covering(const Rect& r, double h) {
    if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
    const double fx = r.width() / h, fy = r.height() / h;
    const long nx = std::lround(fx), ny = std::lround(fy);
    if (std::abs(fx - nx) > kAlignTol * std::max(1.0, fx) ||
        std::abs(fy - ny) > kAlignTol * std::max(1.0, fy)) {
        std::ostringstream os;
        os << "rect [" << r.x0 << "," << r.x1 << "]x[" << r.y0 << "," << r.y1
           << "] is not a whole number of cells of size " << h;
        throw ValidationError(os.str());
    }
    return Grid2D(r.x0, r.y0, h, int(nx), int(ny));
}

bool Grid2D::aligned(const Rect& r) const {
    auto on = [&](double v, double o) {
        const double f = (v - o) / h_;
        return std::abs(f - std::round(f)) <= kAlignTol * std::max(1.0, std::abs(f));
    };
    return on(r.x0, x0_) && on(r.x1, x0_) && on(r.y0, y0_) && on(r.y1, y0_);
}

int Grid2D::line_i(double xv) const {
    const double f = (xv - x0_) / h_;
    const long i = std::lround(f);
    if (std::abs(f - i) > kAlignTol * std::max(1.0, std::abs(f)))
        throw ValidationError("coordinate x=" + std::to_string(xv) + " is not on a grid line");
    return int(i);
}

int Grid2D::line_j(double yv) const {
    const double f = (yv - y0_) / h_;
    const long j = std::lround(f);
    if (std::abs(f - j) > kAlignTol * std::max(1.0, std::abs(f)))
        throw ValidationError("coordinate y=" + std::to_string(yv) + " is not on a grid line");
    return int(j);
}

Grid2D Grid2D::subgrid(const Rect& r) const {
    const int i0 = line_i(r.x0), i1 = line_i(r.x1), j0 = line_j(r.y0), j1 = line_j(r.y1);
    if (i0 < 0 || j0 < 0 || i1 > nx_ || j1 > ny_ || i1 <= i0 || j1 <= j0)
        throw ValidationError("sub-rect does not lie inside the grid");
    return Grid2D(x(i0), y(j0), h_, i1 - i0, j1 - j0);
}

void Grid2D::offset_of(const Grid2D& sub, int& di, int& dj) const {
    if (std::abs(sub.h() - h_) > 1e-12 * h_) throw ValidationError("grid spacing mismatch");
    di = line_i(sub.x0());
    dj = line_j(sub.y0());
    if (di < 0 || dj < 0 || di + sub.nx() > nx_ || dj + sub.ny() > ny_)
        throw ValidationError("sub-grid does not lie inside the grid");
}

bool Grid2D::same_as(const Grid2D& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && std::abs(h_ - o.h_) <= 1e-12 * h_ &&
           std::abs(x0_ - o.x0_) <= 1e-9 * h_ && std::abs(y0_ - o.y0_) <= 1e-9 * h_;
}

TimeGrid::TimeGrid(double a, double b, int n) : t0(a), t1(b), n_steps(n) {
    if (n < 2) throw ValidationError("time grid needs at least 2 steps");
    if (!(b > a)) throw ValidationError("time interval must have positive length");
}

int TimeGrid::slab_of(double t) const {
    const int k = int(std::floor((t - t0) / dt()));
    return std::clamp(k, 0, n_steps - 1);
}

int TimeGrid::node_of(double t) const {
    const double f = (t - t0) / dt();
    const long k = std::lround(f);
    if (std::abs(f - k) > 1e-9 || k < 0 || k > n_steps)
        throw ValidationError("time " + std::to_string(t) + " is not a node of the time grid");
    return int(k);
}

} // namespace bouss

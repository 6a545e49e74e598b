#include <bouss/extension.hpp>
#include <bouss/errors.hpp>
#include <bouss/smooth.hpp>

#include <algorithm>
#include <cmath>

namespace bouss {

ExtensionOperator::ExtensionOperator(const Rect& source, const Grid2D& target, const Rect& support)
    : source_(source), support_(support), tgt_(target) {
    const double h = target.h();
    if (!target.aligned(source)) throw ValidationError("extension source is not aligned with the target grid");
    if (!support.contains_rect(source, 1e-9 * h)) throw ValidationError("extension support must contain the source");
    if (!target.bounds().contains_rect(support, 1e-9 * h))
        throw ValidationError("extension support must lie inside the target grid");
    src_ = target.subgrid(source);
    target.offset_of(src_, di_, dj_);
    const double gaps[4] = {source.x0 - support.x0, support.x1 - source.x1, source.y0 - support.y0,
                            support.y1 - source.y1};
    const double ext[4] = {source.width(), source.width(), source.height(), source.height()};
    for (int s = 0; s < 4; ++s) {
        if (gaps[s] <= 1e-9 * h) {
            w_[s] = 0.0;
            n_[s] = 0;
            continue;
        }
        w_[s] = std::min(0.5 * gaps[s], 0.5 * ext[s]);
        if (w_[s] < 2.0 * h) throw ValidationError("extension blend width below two cells; refine the grid");
        n_[s] = int(std::ceil(w_[s] / h - 1e-9));
    }
}

void ExtensionOperator::support_box(int& i0, int& i1, int& j0, int& j1) const {
    i0 = std::max(0, di_ - n_[0]);
    i1 = std::min(tgt_.nx(), di_ + src_.nx() + n_[1]);
    j0 = std::max(0, dj_ - n_[2]);
    j1 = std::min(tgt_.ny(), dj_ + src_.ny() + n_[3]);
}

ScalarField ExtensionOperator::extend_scalar(const ScalarField& f) const {
    if (!f.grid.same_as(src_)) throw ValidationError("extension input does not live on the source grid");
    const int sx = src_.nx(), sy = src_.ny();
    const double h = tgt_.h();
    int i0, i1, j0, j1;
    support_box(i0, i1, j0, j1);
    const int nxl = i1 - i0 + 1;

    // reflect in x on the source rows, then in y on every column
    std::vector<double> rx(std::size_t(nxl) * (sy + 1), 0.0);
    for (int b = 0; b <= sy; ++b)
        for (int i = i0; i <= i1; ++i) {
            const int a = i - di_;
            double v;
            if (a < 0)
                v = -a <= n_[0] && 2 * (-a) <= sx ? 3.0 * f(-a, b) - 2.0 * f(-2 * a, b) : 0.0;
            else if (a > sx)
                v = a - sx <= n_[1] && 2 * (a - sx) <= sx ? 3.0 * f(2 * sx - a, b) - 2.0 * f(3 * sx - 2 * a, b) : 0.0;
            else
                v = f(a, b);
            rx[std::size_t(b) * nxl + (i - i0)] = v;
        }
    auto RX = [&](int i, int b) { return rx[std::size_t(b) * nxl + (i - i0)]; };

    ScalarField out(tgt_, 0.0, f.name);
    out.time = f.time;
    for (int j = j0; j <= j1; ++j) {
        const int b = j - dj_;
        const double y = tgt_.y(j);
        const double cy = interval_cutoff(y, source_.y0, source_.y1, std::max(w_[2], h), std::max(w_[3], h));
        if ((b < 0 && (w_[2] == 0.0 || cy == 0.0)) || (b > sy && (w_[3] == 0.0 || cy == 0.0))) continue;
        for (int i = i0; i <= i1; ++i) {
            const int a = i - di_;
            const double x = tgt_.x(i);
            const double cx = interval_cutoff(x, source_.x0, source_.x1, std::max(w_[0], h), std::max(w_[1], h));
            if ((a < 0 && (w_[0] == 0.0 || cx == 0.0)) || (a > sx && (w_[1] == 0.0 || cx == 0.0))) continue;
            double v;
            if (b < 0)
                v = 2 * (-b) <= sy ? 3.0 * RX(i, -b) - 2.0 * RX(i, -2 * b) : 0.0;
            else if (b > sy)
                v = 2 * (b - sy) <= sy ? 3.0 * RX(i, 2 * sy - b) - 2.0 * RX(i, 3 * sy - 2 * b) : 0.0;
            else
                v = RX(i, b);
            out(i, j) = (a >= 0 && a <= sx && b >= 0 && b <= sy) ? v : v * cx * cy;
        }
    }
    return out;
}

VectorField ExtensionOperator::extend_vector(const VectorField& f) const {
    ScalarField a = extend_scalar(f.component(0)), b = extend_scalar(f.component(1));
    VectorField out(tgt_, f.name);
    out.time = f.time;
    out.u = std::move(a.v);
    out.w = std::move(b.v);
    return out;
}

} // namespace bouss

#include <bouss/time_profiles.hpp>
#include <bouss/errors.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bouss {

namespace {
constexpr double kCentres[2] = {0.25, 0.75};

double bump(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}
} // namespace

TimeProfile TimeProfile::gamma(double bump_width, double amplitude) {
    if (!(bump_width > 0.0) || !(bump_width < 0.25))
        throw ValidationError("gamma bump width must lie in (0, 1/4) so that the support avoids t=0, 1/2, 1");
    if (amplitude == 0.0 || !std::isfinite(amplitude))
        throw ValidationError("gamma amplitude must be a finite non-zero number");
    TimeProfile p;
    p.kind_ = ProfileKind::Gamma;
    p.width_ = bump_width;
    p.amp_ = amplitude;
    p.name_ = "gamma";
    p.f_ = [bump_width, amplitude](double t) {
        double v = 0.0;
        for (double c : kCentres) v += bump((t - c) / bump_width);
        return amplitude * v;
    };
    p.half_integral_ = p.integral(0.0, 0.5);
    return p;
}

TimeProfile TimeProfile::mu() {
    TimeProfile p;
    p.kind_ = ProfileKind::Mu;
    p.name_ = "mu";
    p.f_ = [](double t) { return 1.0 - smoothstep5((t - 0.25) / 0.25); };
    p.half_integral_ = p.integral(0.0, 0.5);
    return p;
}

TimeProfile TimeProfile::custom(std::function<double(double)> f, std::string name) {
    TimeProfile p;
    p.kind_ = ProfileKind::Custom;
    p.name_ = std::move(name);
    p.f_ = std::move(f);
    p.half_integral_ = p.integral(0.0, 0.5);
    return p;
}

double TimeProfile::operator()(double t) const { return f_(t); }

double TimeProfile::integral(double a, double b) const {
    if (a == b) return 0.0;
    if (a > b) return -integral(b, a);
    std::vector<double> cuts{a, b};
    if (kind_ == ProfileKind::Gamma)
        for (double c : kCentres)
            for (double e : {c - width_, c, c + width_})
                if (e > a && e < b) cuts.push_back(e);
    if (kind_ == ProfileKind::Mu)
        for (double e : {0.25, 0.375, 0.5})
            if (e > a && e < b) cuts.push_back(e);
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f_, cuts[k], cuts[k + 1], 15, 1e-15);
    return s;
}

std::vector<double> TimeProfile::sample(const TimeGrid& tg) const {
    std::vector<double> v(std::size_t(tg.n_steps) + 1);
    for (int k = 0; k <= tg.n_steps; ++k) v[k] = f_(tg.t(k));
    return v;
}

double TimeProfile::sup_on(double a, double b) const {
    if (a > b) std::swap(a, b);
    double m = std::max(std::abs(f_(a)), std::abs(f_(b)));
    constexpr int n = 16;
    for (int k = 1; k < n; ++k) m = std::max(m, std::abs(f_(a + (b - a) * k / n)));
    if (kind_ == ProfileKind::Gamma)
        for (double c : kCentres)
            if (c > a && c < b) m = std::max(m, std::abs(f_(c)));
    return m;
}

std::string TimeProfile::csv(const TimeGrid& tg) const {
    std::ostringstream os;
    os << "t," << name_ << "\n";
    char buf[96];
    for (int k = 0; k <= tg.n_steps; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tg.t(k), f_(tg.t(k)));
        os << buf;
    }
    return os.str();
}

} // namespace bouss

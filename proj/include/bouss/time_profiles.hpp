#pragma once

#include <bouss/grid.hpp>
#include <bouss/smooth.hpp>

#include <functional>
#include <string>
#include <vector>

namespace bouss {

enum class ProfileKind { Gamma, Mu, Custom };

class TimeProfile {
public:
    // Two bumps A exp(1 - 1/(1-s^2)), s = (t-c)/width, centred at 1/4 and 3/4.
    static TimeProfile gamma(double bump_width, double amplitude);
    // 1 on [0,1/4], 0 on [1/2,1], quintic smoothstep between.
    static TimeProfile mu();
    static TimeProfile custom(std::function<double(double)> f, std::string name = "custom");

    ProfileKind kind() const { return kind_; }
    double operator()(double t) const;
    // integral over [a,b] by adaptive Gauss-Kronrod, split at the bump ends
    double integral(double a, double b) const;
    std::vector<double> sample(const TimeGrid& tg) const;
    // max |value| over [a,b] (dense sampling plus the bump centres)
    double sup_on(double a, double b) const;

    double width() const { return width_; }
    double amplitude() const { return amp_; }
    double half_integral() const { return half_integral_; }  // int_0^{1/2}
    const std::string& name() const { return name_; }
    std::string csv(const TimeGrid& tg) const;

private:
    ProfileKind kind_ = ProfileKind::Custom;
    double width_ = 0.0, amp_ = 0.0, half_integral_ = 0.0;
    std::function<double(double)> f_;
    std::string name_;
};

} // namespace bouss

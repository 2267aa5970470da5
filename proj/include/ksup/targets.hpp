#pragma once

#include <functional>
#include <span>
#include <string>

namespace ksup {

/// A continuous target on R^n with a certified sup bound and a certified
/// Euclidean Lipschitz constant on each cube [-w, w]^n.
struct TargetFunction {
    std::string name;
    int n = 0;
    std::function<double(std::span<const double>)> eval;
    double bound = 0.0;
    std::function<double(double half_width)> lipschitz;

    double operator()(std::span<const double> x) const { return eval(x); }
};

/// Named catalog: zero, const:<c>, gauss-bump, sinprod, runge, wrapped:<name>.
/// Throws std::invalid_argument for unknown names.
TargetFunction make_target(const std::string& name, int n);

/// f / bound when bound > 1; returns the factor applied back to outputs.
struct Normalized {
    TargetFunction target;
    double scale = 1.0;
};
Normalized normalize(const TargetFunction& f);

/// 0.99 * (2/pi) * atan(f): bounded by 0.99 whatever f is.
TargetFunction wrap_unbounded(const TargetFunction& f);

inline constexpr double kWrapShrink = 0.99;

struct Unwrapped {
    double value = 0.0;
    bool clamped = false;
};

/// Inverse of the wrapper; values with |v| >= 0.99 are clamped and flagged.
Unwrapped unwrap(double v);

} // namespace ksup

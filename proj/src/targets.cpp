#include "ksup/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ksup {

namespace {

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return s;
}

} // namespace

TargetFunction make_target(const std::string& name, int n) {
    TargetFunction f;
    f.name = name;
    f.n = n;
    if (name == "zero") {
        f.eval = [](std::span<const double>) { return 0.0; };
        f.bound = 0.0;
        f.lipschitz = [](double) { return 0.0; };
    } else if (name.rfind("const:", 0) == 0) {
        std::size_t used = 0;
        const std::string arg = name.substr(6);
        double c = 0.0;
        try {
            c = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != arg.size() || !std::isfinite(c))
            throw std::invalid_argument("bad constant in target '" + name + "'");
        f.eval = [c](std::span<const double>) { return c; };
        f.bound = std::abs(c);
        f.lipschitz = [](double) { return 0.0; };
    } else if (name == "gauss-bump") {
        f.eval = [](std::span<const double> x) { return std::exp(-norm2(x)); };
        f.bound = 1.0;
        // max of |grad| = 2 r exp(-r^2), attained at r = 1/sqrt 2
        f.lipschitz = [](double) { return std::sqrt(2.0) * std::exp(-0.5); };
    } else if (name == "sinprod") {
        f.eval = [](std::span<const double> x) {
            double p = 1.0;
            for (double v : x)
                p *= std::sin(v);
            return p;
        };
        f.bound = 1.0;
        f.lipschitz = [n](double) { return std::sqrt(static_cast<double>(n)); };
    } else if (name == "runge") {
        f.eval = [](std::span<const double> x) { return 1.0 / (1.0 + norm2(x)); };
        f.bound = 1.0;
        // max of 2 r / (1 + r^2)^2 at r = 1/sqrt 3
        f.lipschitz = [](double) { return 9.0 / (8.0 * std::sqrt(3.0)); };
    } else if (name.rfind("wrapped:", 0) == 0) {
        f = wrap_unbounded(make_target(name.substr(8), n));
        f.name = name;
    } else {
        throw std::invalid_argument("unknown target '" + name + "'");
    }
    return f;
}

Normalized normalize(const TargetFunction& f) {
    if (!(f.bound > 1.0))
        return {f, 1.0};
    const double b = f.bound;
    TargetFunction g = f;
    g.eval = [inner = f.eval, b](std::span<const double> x) { return inner(x) / b; };
    g.bound = 1.0;
    g.lipschitz = [inner = f.lipschitz, b](double w) { return inner(w) / b; };
    return {g, b};
}

TargetFunction wrap_unbounded(const TargetFunction& f) {
    constexpr double k = kWrapShrink * 2.0 / std::numbers::pi;
    TargetFunction g;
    g.name = "wrapped:" + f.name;
    g.n = f.n;
    g.eval = [inner = f.eval](std::span<const double> x) { return k * std::atan(inner(x)); };
    g.bound = std::isfinite(f.bound) ? k * std::atan(f.bound) : kWrapShrink;
    g.lipschitz = [inner = f.lipschitz](double w) { return k * inner(w); };
    return g;
}

Unwrapped unwrap(double v) {
    Unwrapped out;
    double s = v / kWrapShrink;
    if (std::abs(s) >= 1.0) {
        out.clamped = true;
        s = std::copysign(std::nextafter(1.0, 0.0), s);
    }
    out.value = std::tan(s * std::numbers::pi / 2.0);
    return out;
}

} // namespace ksup

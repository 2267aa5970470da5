#include "ksup/plfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksup {

std::string to_string(Extension e) {
    return e == Extension::Constant ? "constant" : "affine";
}

Extension extension_from_string(const std::string& s) {
    if (s == "constant")
        return Extension::Constant;
    if (s == "affine")
        return Extension::Affine;
    throw std::invalid_argument("unknown extension mode '" + s + "'");
}

PL1D::PL1D(std::vector<double> breakpoints, std::vector<double> values, Extension left,
           Extension right)
    : xs_(std::move(breakpoints)), ys_(std::move(values)), left_(left), right_(right) {
    if (xs_.size() != ys_.size())
        throw std::invalid_argument("PL1D: breakpoints and values differ in length");
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i]))
            throw std::invalid_argument("PL1D: non-finite breakpoint or value");
        if (i > 0 && !(xs_[i - 1] < xs_[i]))
            throw std::invalid_argument("PL1D: breakpoints must be strictly increasing");
    }
    // A single breakpoint has no segment to continue.
    if (xs_.size() < 2) {
        left_ = Extension::Constant;
        right_ = Extension::Constant;
    }
}

PL1D PL1D::constant(double c) {
    return PL1D({0.0}, {c});
}

double PL1D::slope(std::size_t i) const {
    return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
}

double PL1D::left_slope() const {
    return left_ == Extension::Affine ? slope(0) : 0.0;
}

double PL1D::right_slope() const {
    return right_ == Extension::Affine ? slope(xs_.size() - 2) : 0.0;
}

double PL1D::operator()(double x) const {
    if (xs_.empty())
        return 0.0;
    if (x <= xs_.front()) {
        if (x == xs_.front() || left_ == Extension::Constant)
            return ys_.front();
        return ys_.front() + (x - xs_.front()) * left_slope();
    }
    if (x >= xs_.back()) {
        if (x == xs_.back() || right_ == Extension::Constant)
            return ys_.back();
        return ys_.back() + (x - xs_.back()) * right_slope();
    }
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    if (x == xs_[i])
        return ys_[i];
    const double y0 = ys_[i];
    const double y1 = ys_[i + 1];
    // y1 - y0 == 0 keeps plateaus exactly constant.
    return y0 + (x - xs_[i]) / (xs_[i + 1] - xs_[i]) * (y1 - y0);
}

double PL1D::max_slope() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        s = std::max(s, std::abs(slope(i)));
    return s;
}

double sup_norm(const PL1D& f, double a, double b) {
    if (a > b)
        throw InvalidInterval("sup_norm: invalid interval, a > b");
    double s = std::max(std::abs(f(a)), std::abs(f(b)));
    const auto& xs = f.breakpoints();
    const auto& ys = f.values();
    auto lo = std::upper_bound(xs.begin(), xs.end(), a);
    auto hi = std::lower_bound(xs.begin(), xs.end(), b);
    for (auto it = lo; it < hi; ++it)
        s = std::max(s, std::abs(ys[static_cast<std::size_t>(it - xs.begin())]));
    return s;
}

double sup_norm(const PL1D& f) {
    if (f.empty())
        return 0.0;
    const std::size_t k = f.size();
    if (k >= 2) {
        if (f.left_ext() == Extension::Affine && f.slope(0) != 0.0)
            return std::numeric_limits<double>::infinity();
        if (f.right_ext() == Extension::Affine && f.slope(k - 2) != 0.0)
            return std::numeric_limits<double>::infinity();
    }
    double s = 0.0;
    for (double y : f.values())
        s = std::max(s, std::abs(y));
    return s;
}

namespace {

bool close(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

PL1D sum(std::span<const PL1D> fs) {
    std::size_t total = 0;
    bool left_affine = false;
    bool right_affine = false;
    for (const auto& f : fs) {
        total += f.size();
        left_affine = left_affine || (f.size() >= 2 && f.left_ext() == Extension::Affine);
        right_affine = right_affine || (f.size() >= 2 && f.right_ext() == Extension::Affine);
    }
    if (total == 0)
        return PL1D::zero();

    std::vector<double> xs;
    xs.reserve(total + 2);
    for (const auto& f : fs)
        xs.insert(xs.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(xs.begin(), xs.end());
    std::vector<double> merged;
    merged.reserve(xs.size() + 2);
    for (double x : xs)
        if (merged.empty() || !close(merged.back(), x))
            merged.push_back(x);

    // Past the outermost breakpoint every summand is in its extension region;
    // an extra point makes the boundary segment lie entirely there.
    if (left_affine)
        merged.insert(merged.begin(), merged.front() - 1.0);
    if (right_affine)
        merged.push_back(merged.back() + 1.0);

    std::vector<double> ys(merged.size(), 0.0);
    for (const auto& f : fs) {
        if (f.empty())
            continue;
        for (std::size_t i = 0; i < merged.size(); ++i)
            ys[i] += f(merged[i]);
    }
    return PL1D(std::move(merged), std::move(ys),
                left_affine ? Extension::Affine : Extension::Constant,
                right_affine ? Extension::Affine : Extension::Constant);
}

PL1D add(const PL1D& f, const PL1D& g) {
    const PL1D both[] = {f, g};
    return sum(both);
}

PL1D scale(const PL1D& f, double c) {
    std::vector<double> ys = f.values();
    for (auto& y : ys)
        y *= c;
    return PL1D(f.breakpoints(), std::move(ys), f.left_ext(), f.right_ext());
}

} // namespace ksup

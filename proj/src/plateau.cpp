#include "ksup/plateau.hpp"

#include <stdexcept>

namespace ksup {

std::string to_string(Baseline b) {
    return b == Baseline::Abs ? "abs" : "identity";
}

Baseline baseline_from_string(const std::string& s) {
    if (s == "abs")
        return Baseline::Abs;
    if (s == "identity")
        return Baseline::Identity;
    throw std::invalid_argument("unknown baseline '" + s + "'");
}

const PL1D& baseline_function(Baseline b) {
    static const PL1D abs_fn({-1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}, Extension::Affine,
                             Extension::Affine);
    static const PL1D id_fn({0.0, 1.0}, {0.0, 1.0}, Extension::Affine, Extension::Affine);
    return b == Baseline::Abs ? abs_fn : id_fn;
}

PlateauFunction PlateauFunction::identity_of(Baseline baseline) {
    return PlateauFunction({}, baseline, 0.0);
}

PlateauFunction::PlateauFunction(std::vector<Plateau> plateaus, Baseline baseline,
                                 double ramp)
    : plateaus_(std::move(plateaus)), baseline_(baseline), ramp_(ramp) {
    const PL1D& base = baseline_function(baseline_);
    if (plateaus_.empty()) {
        realized_ = base;
        return;
    }
    if (!(ramp_ > 0.0))
        throw std::invalid_argument("PlateauFunction: ramp width must be positive");
    for (std::size_t i = 0; i < plateaus_.size(); ++i) {
        const auto& p = plateaus_[i];
        if (!(p.lo <= p.hi))
            throw std::invalid_argument("PlateauFunction: plateau with lo > hi");
        if (i > 0 && !(plateaus_[i - 1].hi < p.lo))
            throw std::invalid_argument("PlateauFunction: plateaus overlap or touch");
    }

    std::vector<double> xs;
    std::vector<double> ys;
    const double left_end = plateaus_.front().lo - ramp_;
    const double right_end = plateaus_.back().hi + ramp_;
    for (double b : base.breakpoints())
        if (b < left_end) {
            xs.push_back(b);
            ys.push_back(base(b));
        }
    xs.push_back(left_end);
    ys.push_back(base(left_end));
    for (const auto& p : plateaus_) {
        xs.push_back(p.lo);
        ys.push_back(p.value);
        if (p.hi > p.lo) {
            xs.push_back(p.hi);
            ys.push_back(p.value);
        }
    }
    xs.push_back(right_end);
    ys.push_back(base(right_end));
    for (double b : base.breakpoints())
        if (b > right_end) {
            xs.push_back(b);
            ys.push_back(base(b));
        }
    // Both baselines are affine far out; the tails must carry the baseline slope.
    if (xs.front() == left_end) {
        xs.insert(xs.begin(), left_end - 1.0);
        ys.insert(ys.begin(), base(left_end - 1.0));
    }
    if (xs.back() == right_end) {
        xs.push_back(right_end + 1.0);
        ys.push_back(base(right_end + 1.0));
    }
    realized_ = PL1D(std::move(xs), std::move(ys), Extension::Affine, Extension::Affine);
}

double PlateauFunction::baseline_deviation() const {
    return sup_norm(add(realized_, scale(baseline_function(baseline_), -1.0)));
}

bool PlateauFunction::is_increasing(bool strict_plateaus) const {
    for (std::size_t i = 1; i < plateaus_.size(); ++i) {
        if (strict_plateaus ? !(plateaus_[i - 1].value < plateaus_[i].value)
                            : !(plateaus_[i - 1].value <= plateaus_[i].value))
            return false;
    }
    const auto& ys = realized_.values();
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] < ys[i - 1])
            return false;
    if (realized_.size() >= 2) {
        if (realized_.slope(0) < 0.0 || realized_.slope(realized_.size() - 2) < 0.0)
            return false;
    }
    return true;
}

} // namespace ksup

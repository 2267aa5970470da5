#pragma once

#include "ksup/plfun.hpp"

#include <vector>

namespace ksup {

// Reference function a member of the class is measured against.
enum class Baseline { Abs, Identity };

std::string to_string(Baseline b);
Baseline baseline_from_string(const std::string& s);

/// The baseline as a PL1D (|x| or x).
const PL1D& baseline_function(Baseline b);

struct Plateau {
    double lo;
    double hi;
    double value;
};

/// Continuous function that is constant on a family of disjoint closed
/// intervals, affine between them, and equal to the baseline outside the
/// plateau span (after an affine ramp of width `ramp` at each end).
class PlateauFunction {
public:
    PlateauFunction() = default;
    PlateauFunction(std::vector<Plateau> plateaus, Baseline baseline, double ramp);

    /// The bare baseline, with no plateaus.
    static PlateauFunction identity_of(Baseline baseline);

    double operator()(double x) const { return realized_(x); }

    const std::vector<Plateau>& plateaus() const { return plateaus_; }
    Baseline baseline() const { return baseline_; }
    double ramp() const { return ramp_; }
    const PL1D& realized() const { return realized_; }

    /// sup_x |realized(x) - baseline(x)|; membership in the class needs < 1.
    double baseline_deviation() const;

    // Plateau values non-decreasing (strictly when `strict`) across the family
    // and realized breakpoint values non-decreasing.
    bool is_increasing(bool strict_plateaus) const;

private:
    std::vector<Plateau> plateaus_;
    Baseline baseline_ = Baseline::Abs;
    double ramp_ = 0.0;
    PL1D realized_;
};

} // namespace ksup

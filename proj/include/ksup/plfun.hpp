#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksup {

class InvalidInterval : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// How a PL1D continues past its first/last breakpoint.
enum class Extension { Constant, Affine };

std::string to_string(Extension e);
Extension extension_from_string(const std::string& s);

/// Continuous piecewise-linear function of one real variable.
///
/// Between consecutive breakpoints the value is the affine interpolant of the
/// stored values. Evaluation at a breakpoint returns the stored value exactly.
/// Outside [front, back] the function is either held constant or continues
/// the boundary segment. A function with no breakpoints is identically zero.
class PL1D {
public:
    PL1D() = default;
    PL1D(std::vector<double> breakpoints, std::vector<double> values,
         Extension left = Extension::Constant, Extension right = Extension::Constant);

    static PL1D zero() { return {}; }
    static PL1D constant(double c);

    double operator()(double x) const;

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    Extension left_ext() const { return left_; }
    Extension right_ext() const { return right_; }
    std::size_t size() const { return xs_.size(); }
    bool empty() const { return xs_.empty(); }

    /// Largest |slope| over all segments, including affine extensions.
    double max_slope() const;

    /// Slope of the segment [x_i, x_{i+1}].
    double slope(std::size_t i) const;

private:
    double left_slope() const;
    double right_slope() const;

    std::vector<double> xs_;
    std::vector<double> ys_;
    Extension left_ = Extension::Constant;
    Extension right_ = Extension::Constant;
};

/// Exact sup of |f| on [a, b]; throws InvalidInterval when a > b.
double sup_norm(const PL1D& f, double a, double b);

/// Exact sup of |f| over the whole real line (infinite when an affine
/// extension has nonzero slope).
double sup_norm(const PL1D& f);

/// Pointwise sum. Breakpoints closer than 1e-12 (relative) are merged.
PL1D add(const PL1D& f, const PL1D& g);
PL1D scale(const PL1D& f, double c);

// Accumulates many functions at once; equivalent to repeated add().
PL1D sum(std::span<const PL1D> fs);

} // namespace ksup

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ksup {

struct Interval {
    double lo;
    double hi;
    long j; // index of the untruncated interval I_q(j)
};

/// The truncated intervals K_q(1..r_q): nonempty intersections of
/// I_q(j) = [q delta + m j delta, (q + m - 1) delta + m j delta] with [-D, D].
struct IntervalFamily {
    int q = 0;
    int m = 0;
    double delta = 0.0;
    double half_width = 0.0;
    std::vector<Interval> intervals;

    std::size_t size() const { return intervals.size(); }

    /// Index (0-based) of the interval containing x, if any. Endpoints count.
    std::optional<std::size_t> locate(double x) const;

    void dump_csv(std::ostream& os) const;
};

/// Throws ParameterRejected unless 0 < delta < 1/(m n) and half_width > 0.
IntervalFamily build_family(int q, int m, int n, double delta, double half_width);

/// Same family without the delta < 1/(mn) gate; for geometries whose
/// admissible step is enforced elsewhere.
IntervalFamily build_family_unchecked(int q, int m, double delta, double half_width);

/// Number of families whose intervals contain x.
int coverage_count(double x, std::span<const IntervalFamily> families);

struct BoxIndex {
    int q = 0;
    std::vector<std::size_t> i; // one 0-based interval index per coordinate
};

/// The box B_q(i) holding x, or nothing if some coordinate sits in a gap.
std::optional<BoxIndex> locate_box(std::span<const double> x, const IntervalFamily& family);

} // namespace ksup

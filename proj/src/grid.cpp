#include "ksup/grid.hpp"

#include "ksup/constants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace ksup {

IntervalFamily build_family_unchecked(int q, int m, double delta, double half_width) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw ParameterRejected("grid step delta must be positive");
    if (!(half_width > 0.0))
        throw ParameterRejected("cube half-width must be positive");
    IntervalFamily fam;
    fam.q = q;
    fam.m = m;
    fam.delta = delta;
    fam.half_width = half_width;

    const double period = m * delta;
    // Smallest j whose interval can reach -D, largest whose start is <= D.
    const long j_lo = static_cast<long>(std::floor((-half_width - (q + m - 1) * delta) / period)) - 1;
    const long j_hi = static_cast<long>(std::ceil((half_width - q * delta) / period)) + 1;
    for (long j = j_lo; j <= j_hi; ++j) {
        const double lo = q * delta + m * j * delta;
        const double hi = (q + m - 1) * delta + m * j * delta;
        const double a = std::max(lo, -half_width);
        const double b = std::min(hi, half_width);
        if (a <= b)
            fam.intervals.push_back({a, b, j});
    }
    return fam;
}

IntervalFamily build_family(int q, int m, int n, double delta, double half_width) {
    if (!(delta < 1.0 / (static_cast<double>(m) * n)))
        throw ParameterRejected("grid step delta must satisfy delta < 1/(m n)");
    return build_family_unchecked(q, m, delta, half_width);
}

std::optional<std::size_t> IntervalFamily::locate(double x) const {
    auto it = std::upper_bound(intervals.begin(), intervals.end(), x,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == intervals.begin())
        return std::nullopt;
    --it;
    if (x <= it->hi)
        return static_cast<std::size_t>(it - intervals.begin());
    return std::nullopt;
}

void IntervalFamily::dump_csv(std::ostream& os) const {
    os << "i,left,right\n";
    char buf[96];
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, intervals[i].lo,
                      intervals[i].hi);
        os << buf;
    }
}

int coverage_count(double x, std::span<const IntervalFamily> families) {
    int c = 0;
    for (const auto& f : families)
        if (f.locate(x))
            ++c;
    return c;
}

std::optional<BoxIndex> locate_box(std::span<const double> x, const IntervalFamily& family) {
    BoxIndex b;
    b.q = family.q;
    b.i.reserve(x.size());
    for (double xp : x) {
        auto k = family.locate(xp);
        if (!k)
            return std::nullopt;
        b.i.push_back(*k);
    }
    return b;
}

} // namespace ksup

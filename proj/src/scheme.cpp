#include "ksup/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ksup {

std::string to_string(Variant v) {
    return v == Variant::Standard ? "standard" : "monotone";
}

Variant variant_from_string(const std::string& s) {
    if (s == "standard")
        return Variant::Standard;
    if (s == "monotone")
        return Variant::Monotone;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

double Scheme::D(int t) const {
    if (variant == Variant::Standard)
        return params.D(t);
    return std::pow(D_base, t);
}

double Scheme::support_lo(int N) const {
    return variant == Variant::Standard ? -2.0 : -(D(N) + 2.0);
}

double Scheme::support_hi(int N) const {
    return D(N) + 2.0;
}

int Scheme::depth(int k, int t_max) const {
    const int N = std::min(k, t_max);
    return variant == Variant::Standard ? N : std::max(N, 1);
}

Scheme standard_scheme(const Params& p) {
    Scheme s;
    s.variant = Variant::Standard;
    s.n = p.n;
    s.m = p.m;
    s.rows.assign(static_cast<std::size_t>(p.m), p.lambda);
    s.baseline = Baseline::Abs;
    s.eps0 = p.eps0;
    s.eps1 = p.eps1;
    s.eps = p.eps;
    s.alpha = p.alpha;
    s.C = p.C;
    s.params = p;
    return s;
}

} // namespace ksup

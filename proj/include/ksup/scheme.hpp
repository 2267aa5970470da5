#pragma once

#include "ksup/constants.hpp"
#include "ksup/plateau.hpp"

#include <span>
#include <string>
#include <vector>

namespace ksup {

enum class Variant { Standard, Monotone };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Everything the stage builder and the iteration need to know about which
/// form of the construction runs: one weight row per term, the baseline of
/// the inner-function class, the epsilons and the cube sequence.
///
/// Standard: every row is lambda, baseline |x|, cubes [-D_t, D_t]^n with the
/// D_t recurrence, support of h in (-2, D_N + 2), residual bound gated for
/// 0 <= t <= N.
///
/// Monotone: per-term rows on the simplex, baseline x, cubes [-D^t, D^t]^n
/// with D = C + 4, support of h in (-(D^N + 2), D^N + 2), knot cutoff
/// |a| <= C (|u| + 2), residual bound gated for 1 <= t <= N.
struct Scheme {
    Variant variant = Variant::Standard;
    int n = 0;
    int m = 0;
    std::vector<std::vector<double>> rows;
    Baseline baseline = Baseline::Abs;
    double eps0 = 0.0;
    double eps1 = 0.0;
    double eps = 0.0;
    double alpha = 0.0;
    double C = 0.0;
    double D_base = 0.0; // monotone only

    double D(int t) const;
    double support_lo(int N) const;
    double support_hi(int N) const;
    int first_gated_t() const { return variant == Variant::Standard ? 0 : 1; }
    /// Stage depth used at iteration k.
    int depth(int k, int t_max) const;
    bool has_cutoff() const { return variant == Variant::Monotone; }
    /// Number of terms the residual argument matches at every point.
    int matched_terms() const { return variant == Variant::Standard ? m - n : m - n + 1; }

    std::span<const double> row(int q) const { return rows[static_cast<std::size_t>(q - 1)]; }

    /// X_q(x) = sum_p row_q[p] phi(x_p).
    template <typename Phi>
    double inner(int q, const Phi& phi, std::span<const double> x) const {
        auto w = row(q);
        double s = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p)
            s += w[p] * phi(x[p]);
        return s;
    }

    Params params; // populated for the standard variant
};

Scheme standard_scheme(const Params& p);

} // namespace ksup

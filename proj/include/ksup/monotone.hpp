#pragma once

#include "ksup/engine.hpp"
#include "ksup/scheme.hpp"

#include <cstdint>
#include <vector>

namespace ksup {

/// m rows on the open simplex, one per term, and the constants built on them.
struct WeightMatrix {
    int n = 0;
    int m = 0;
    std::vector<std::vector<double>> rows;
    std::uint64_t seed = 0;
    double C = 0.0;   // 0 until compute_C has run
    double D = 0.0;   // C + 4
    double eps0 = 0.0; // 1 / (m - n + 1)
    double eps1 = 0.0; // (n - 1) eps0
};

/// (2 + sqrt 2)(2n - 1); m must exceed it.
double monotone_threshold(int n);

/// Every n-row subset is linearly independent (pivoted elimination, relative
/// pivot tolerance 1e-9).
bool rows_independent(const std::vector<std::vector<double>>& rows, int n);

/// Rows drawn uniformly from the simplex. Resamples up to 16 times if some
/// n-subset is dependent; throws ParameterRejected when m is too small and
/// StageFailure when resampling keeps failing.
WeightMatrix sample_weights(int m, int n, std::uint64_t seed);

/// The (m-n+1)-th largest |<row_q, x>| for a unit direction x.
double qualifying_value(const WeightMatrix& w, std::span<const double> x);

/// Number of q with |x| <= C |<row_q, x>|.
int qualifying_count(const WeightMatrix& w, double C, std::span<const double> x);

/// 1.1 times the sampled max of 1/v(x) over the unit sphere; the property is
/// then checked on `verify_samples` fresh directions and the resolution
/// doubled (up to 4 times) if it fails. Sets w.C and w.D.
double compute_C(WeightMatrix& w, int sphere_resolution = 100000, int verify_samples = 10000,
                 std::uint64_t seed = 7);

/// Throws ParameterRejected if compute_C has not run or eps1 (1 + m eps0) >= 1.
Scheme monotone_scheme(const WeightMatrix& w);

Representation run_monotone(const TargetFunction& f0, const WeightMatrix& w, const StopRule& stop,
                            const RunOptions& opts = {});

} // namespace ksup

#pragma once

#include "ksup/plfun.hpp"

#include <cstdint>

// Brute-force checks that only evaluate things; they share no structure with
// the code they check.
namespace ksup::verify {

/// Is x in some [q delta + m j delta, (q + m - 1) delta + m j delta]?
bool in_family(double x, int q, int m, double delta);

/// Minimum number of families containing x over a scan of [0, m delta) with
/// step delta / 1000 (plus every endpoint q delta).
int oracle_coverage(int m, double delta);

/// Minimum over random x in (-half_width, half_width)^n of the number of q
/// for which every coordinate lies in family q.
int oracle_box_coverage(int n, int m, double delta, int trials, std::uint64_t seed,
                        double half_width = 1.0);

/// max |f| over `resolution` evenly spaced points of [a, b].
double oracle_sup_norm(const PL1D& f, double a, double b, int resolution = 10000);

} // namespace ksup::verify

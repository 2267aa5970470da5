#pragma once

#include <stdexcept>
#include <vector>

namespace ksup {

class ParameterRejected : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Constants of the superposition construction for dimension n, m terms and
/// coordinate weights lambda.
struct Params {
    int n = 0;
    int m = 0;
    std::vector<double> lambda;
    double lambda_min = 0.0;
    double C = 0.0;          // 1 / lambda_min
    double eps0 = 0.0;       // 1 / (m - n)
    double eps1 = 0.0;       // n * eps0
    double eps_max = 0.0;    // sup of admissible eps: eps1 (1 + m eps) < 1
    double eps = 0.0;        // contraction slack, midpoint of (eps0, eps_max)
    double alpha_max = 0.0;  // sup of admissible alpha for the chosen eps
    double alpha = 0.0;      // decay exponent, 0.9 alpha_max

    /// Half-width of the cube Q_t: D_0 = 1, D_{t+1} = C (D_t + 10).
    double D(int t) const;
    std::vector<double> D_prefix(int t_max) const;
};

/// (2 + sqrt 2) n, the term-count threshold.
double term_threshold(int n);

/// Builds and validates Params; throws ParameterRejected.
Params derive(int n, int m, const std::vector<double>& lambda);

/// lambda_p proportional to p, normalized to sum 1.
std::vector<double> default_lambda(int n);

/// Whether (2x - 1) / (x - 1)^2 < 1 at x = m / n.
bool contraction_admissible(int n, int m);

// eps_max and alpha_max for given eps0, eps1, m; shared with the monotone scheme.
double eps_upper(double eps1, int m);
double alpha_upper(double eps1, double eps, int m);

} // namespace ksup

#include "ksup/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ksup {

double term_threshold(int n) {
    return (2.0 + std::sqrt(2.0)) * n;
}

bool contraction_admissible(int n, int m) {
    if (n <= 0 || m <= n)
        return false;
    const double x = static_cast<double>(m) / n;
    return (2.0 * x - 1.0) / ((x - 1.0) * (x - 1.0)) < 1.0;
}

double eps_upper(double eps1, int m) {
    return (1.0 / eps1 - 1.0) / m;
}

double alpha_upper(double eps1, double eps, int m) {
    return 0.5 * (1.0 - std::log1p(m * eps) / -std::log(eps1));
}

std::vector<double> default_lambda(int n) {
    std::vector<double> l(static_cast<std::size_t>(n));
    const double total = 0.5 * n * (n + 1);
    for (int p = 1; p <= n; ++p)
        l[static_cast<std::size_t>(p - 1)] = p / total;
    return l;
}

Params derive(int n, int m, const std::vector<double>& lambda) {
    if (n < 2)
        throw ParameterRejected("dimension n must be at least 2");
    if (!(m > term_threshold(n))) {
        std::ostringstream os;
        os << "term count m = " << m << " violates m > (2+sqrt 2) n = " << term_threshold(n);
        throw ParameterRejected(os.str());
    }
    if (lambda.size() != static_cast<std::size_t>(n))
        throw ParameterRejected("lambda must have exactly n entries");
    for (double l : lambda)
        if (!(l > 0.0) || !std::isfinite(l))
            throw ParameterRejected("lambda entries must be positive and finite");
    std::vector<double> sorted = lambda;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ParameterRejected("lambda entries must be pairwise distinct");
    const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12)
        throw ParameterRejected("lambda entries must sum to 1");

    Params p;
    p.n = n;
    p.m = m;
    p.lambda = lambda;
    p.lambda_min = sorted.front();
    p.C = 1.0 / p.lambda_min;
    p.eps0 = 1.0 / (m - n);
    p.eps1 = n * p.eps0;
    if (!(p.eps1 * (1.0 + m * p.eps0) < 1.0))
        throw ParameterRejected("eps1 (1 + m eps0) < 1 fails");
    p.eps_max = eps_upper(p.eps1, m);
    p.eps = p.eps0 + 0.5 * (p.eps_max - p.eps0);
    p.alpha_max = alpha_upper(p.eps1, p.eps, m);
    p.alpha = 0.9 * p.alpha_max;
    if (!(p.alpha > 0.0 && p.alpha < 0.5) ||
        !(std::pow(p.eps1, 1.0 - 2.0 * p.alpha) * (1.0 + m * p.eps) < 1.0))
        throw ParameterRejected("no admissible decay exponent alpha");
    return p;
}

double Params::D(int t) const {
    double d = 1.0;
    for (int i = 0; i < t; ++i)
        d = C * (d + 10.0);
    return d;
}

std::vector<double> Params::D_prefix(int t_max) const {
    std::vector<double> out;
    double d = 1.0;
    for (int t = 0; t <= t_max; ++t) {
        out.push_back(d);
        d = C * (d + 10.0);
    }
    return out;
}

} // namespace ksup

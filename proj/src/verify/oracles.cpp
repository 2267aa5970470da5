#include "ksup/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ksup::verify {

bool in_family(double x, int q, int m, double delta) {
    // in units of delta the endpoints are integers; the slack absorbs the
    // rounding of x = k delta
    const double t = x / delta;
    const double j = std::floor((t - q) / m);
    for (double jj : {j - 1.0, j, j + 1.0}) {
        const double lo = q + m * jj;
        const double hi = q + m - 1 + m * jj;
        if (t >= lo - 1e-9 && t <= hi + 1e-9)
            return true;
    }
    return false;
}

int oracle_coverage(int m, double delta) {
    auto count = [&](double x) {
        int c = 0;
        for (int q = 1; q <= m; ++q)
            c += in_family(x, q, m, delta) ? 1 : 0;
        return c;
    };
    int worst = m;
    const long steps = static_cast<long>(m) * 1000;
    for (long k = 0; k < steps; ++k)
        worst = std::min(worst, count(k * (delta / 1000.0)));
    for (int q = 0; q < m; ++q)
        worst = std::min(worst, count(q * delta));
    return worst;
}

int oracle_box_coverage(int n, int m, double delta, int trials, std::uint64_t seed,
                        double half_width) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-half_width, half_width);
    std::vector<double> x(static_cast<std::size_t>(n));
    int worst = m;
    for (int t = 0; t < trials; ++t) {
        for (auto& c : x)
            c = u(rng);
        int count = 0;
        for (int q = 1; q <= m; ++q) {
            bool all = true;
            for (double c : x)
                all = all && in_family(c, q, m, delta);
            count += all ? 1 : 0;
        }
        worst = std::min(worst, count);
    }
    return worst;
}

double oracle_sup_norm(const PL1D& f, double a, double b, int resolution) {
    double best = 0.0;
    for (int k = 0; k < resolution; ++k) {
        const double x = resolution == 1 ? a : a + (b - a) * k / (resolution - 1);
        best = std::max(best, std::abs(f(x)));
    }
    return best;
}

} // namespace ksup::verify

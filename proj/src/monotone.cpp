#include "ksup/monotone.hpp"

#include "ksup/constants.hpp"
#include "ksup/outer_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ksup {

double monotone_threshold(int n) {
    return (2.0 + std::numbers::sqrt2) * (2.0 * n - 1.0);
}

namespace {

bool subset_independent(const std::vector<std::vector<double>>& rows,
                        const std::vector<int>& pick, int n) {
    std::vector<std::vector<double>> a;
    double scale = 0.0;
    for (int i : pick) {
        a.push_back(rows[static_cast<std::size_t>(i)]);
        for (double v : a.back())
            scale = std::max(scale, std::abs(v));
    }
    const auto N = static_cast<std::size_t>(n);
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                piv = r;
        if (!(std::abs(a[piv][c]) > 1e-9 * scale))
            return false;
        std::swap(a[piv], a[c]);
        for (std::size_t r = c + 1; r < N; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < N; ++k)
                a[r][k] -= f * a[c][k];
        }
    }
    return true;
}

void sphere_point(std::mt19937_64& rng, std::vector<double>& x) {
    std::normal_distribution<double> g(0.0, 1.0);
    double s = 0.0;
    do {
        s = 0.0;
        for (auto& v : x) {
            v = g(rng);
            s += v * v;
        }
    } while (s == 0.0);
    s = std::sqrt(s);
    for (auto& v : x)
        v /= s;
}

} // namespace

bool rows_independent(const std::vector<std::vector<double>>& rows, int n) {
    const int m = static_cast<int>(rows.size());
    if (m < n)
        return false;
    // Walk all n-subsets in lexicographic order.
    std::vector<int> pick(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pick[static_cast<std::size_t>(i)] = i;
    while (true) {
        if (!subset_independent(rows, pick, n))
            return false;
        int i = n - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - n + i)
            --i;
        if (i < 0)
            return true;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
}

WeightMatrix sample_weights(int m, int n, std::uint64_t seed) {
    if (n < 2)
        throw ParameterRejected("monotone variant needs n >= 2");
    if (!(m > monotone_threshold(n)))
        throw ParameterRejected("m must exceed (2 + sqrt 2)(2n - 1) = " +
                                std::to_string(monotone_threshold(n)));
    WeightMatrix w;
    w.n = n;
    w.m = m;
    w.seed = seed;
    w.eps0 = 1.0 / (m - n + 1);
    w.eps1 = (n - 1) * w.eps0;

    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> ex(1.0);
    for (int attempt = 0; attempt < 16; ++attempt) {
        w.rows.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
        for (auto& row : w.rows) {
            double s = 0.0;
            for (auto& v : row) {
                do
                    v = ex(rng);
                while (v == 0.0);
                s += v;
            }
            for (auto& v : row)
                v /= s;
        }
        if (rows_independent(w.rows, n))
            return w;
    }
    throw StageFailure("sample_weights: could not draw independent rows");
}

double qualifying_value(const WeightMatrix& w, std::span<const double> x) {
    std::vector<double> v;
    v.reserve(w.rows.size());
    for (const auto& row : w.rows) {
        double s = 0.0;
        for (std::size_t p = 0; p < row.size(); ++p)
            s += row[p] * x[p];
        v.push_back(std::abs(s));
    }
    const auto k = static_cast<std::size_t>(w.m - w.n); // 0-based index of the (m-n+1)-th largest
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(),
                     std::greater<>());
    return v[k];
}

int qualifying_count(const WeightMatrix& w, double C, std::span<const double> x) {
    double nx = 0.0;
    for (double c : x)
        nx += c * c;
    nx = std::sqrt(nx);
    int count = 0;
    for (const auto& row : w.rows) {
        double s = 0.0;
        for (std::size_t p = 0; p < row.size(); ++p)
            s += row[p] * x[p];
        if (nx <= C * std::abs(s))
            ++count;
    }
    return count;
}

double compute_C(WeightMatrix& w, int sphere_resolution, int verify_samples, std::uint64_t seed) {
    if (!rows_independent(w.rows, w.n))
        throw ContractError("compute_C: weight rows are not independent");
    std::vector<double> x(static_cast<std::size_t>(w.n));
    std::mt19937_64 rng(seed);
    int res = sphere_resolution;
    for (int round = 0; round < 5; ++round, res *= 2) {
        double worst = 0.0;
        for (int k = 0; k < res; ++k) {
            if (w.n == 2) {
                // x and -x give the same values, half the circle is enough
                const double th = std::numbers::pi * (k + 0.5) / res;
                x[0] = std::cos(th);
                x[1] = std::sin(th);
            } else {
                sphere_point(rng, x);
            }
            const double v = qualifying_value(w, x);
            if (!(v > 0.0))
                throw ContractError("compute_C: too many rows vanish at one direction");
            worst = std::max(worst, 1.0 / v);
        }
        const double C = 1.1 * worst;

        bool ok = true;
        for (int k = 0; k < verify_samples && ok; ++k) {
            sphere_point(rng, x);
            ok = qualifying_count(w, C, x) >= w.m - w.n + 1;
        }
        if (ok) {
            w.C = C;
            w.D = C + 4.0;
            return C;
        }
    }
    throw StageFailure("compute_C: property failed on fresh directions at every resolution");
}

Scheme monotone_scheme(const WeightMatrix& w) {
    if (!(w.C > 0.0))
        throw ParameterRejected("monotone_scheme: C has not been computed");
    if (!(w.eps1 * (1.0 + w.m * w.eps0) < 1.0))
        throw ParameterRejected("monotone_scheme: eps1 (1 + m eps0) >= 1");
    Scheme s;
    s.variant = Variant::Monotone;
    s.n = w.n;
    s.m = w.m;
    s.rows = w.rows;
    s.baseline = Baseline::Identity;
    s.eps0 = w.eps0;
    s.eps1 = w.eps1;
    const double eps_max = eps_upper(w.eps1, w.m);
    s.eps = w.eps0 + 0.5 * (eps_max - w.eps0);
    s.alpha = 0.9 * alpha_upper(w.eps1, s.eps, w.m);
    if (!(s.alpha > 0.0 && s.alpha < 0.5))
        throw ParameterRejected("monotone_scheme: no admissible decay exponent");
    s.C = w.C;
    s.D_base = w.D;
    return s;
}

Representation run_monotone(const TargetFunction& f0, const WeightMatrix& w, const StopRule& stop,
                            const RunOptions& opts) {
    return run(f0, monotone_scheme(w), stop, opts);
}

} // namespace ksup

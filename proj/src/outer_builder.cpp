#include "ksup/outer_builder.hpp"

#include "ksup/constants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ksup {

double choose_delta(double f_lipschitz, double psi_lipschitz, double eta, const Scheme& s,
                    double xi, DeltaRule rule) {
    if (!std::isfinite(f_lipschitz) || f_lipschitz < 0.0 || !std::isfinite(psi_lipschitz) ||
        psi_lipschitz < 0.0)
        throw ParameterRejected("moduli of continuity must be finite and non-negative");
    if (!(eta > 0.0) || !(xi > 0.0))
        throw ParameterRejected("eta and xi must be positive");
    const double m = s.m;
    const double n = s.n;
    const double inf = std::numeric_limits<double>::infinity();

    double a = inf;
    double b = inf;
    if (rule == DeltaRule::Textbook) {
        if (f_lipschitz > 0.0)
            a = eta / (m * m * n * f_lipschitz);
        if (psi_lipschitz > 0.0)
            b = xi / (2.0 * m * psi_lipschitz);
    } else {
        // matched_terms * eps0 == 1 in both variants
        const double matched = s.matched_terms() * s.eps0;
        if (f_lipschitz > 0.0)
            a = 2.0 * eta / (matched * f_lipschitz * std::sqrt(n) * (m - 1.0));
        if (psi_lipschitz > 0.0)
            b = xi / ((m + 1.0) * psi_lipschitz);
    }
    const double c = 1.0 / (2.0 * m * n);
    return 0.5 * std::min({a, b, c});
}

PlateauFunction plateauize(const PlateauFunction& psi, const IntervalFamily& family, double xi) {
    std::vector<Plateau> plateaus;
    plateaus.reserve(family.size());
    const auto& xs = psi.realized().breakpoints();
    for (const auto& iv : family.intervals) {
        const double mid = 0.5 * (iv.lo + iv.hi);
        const double v = psi(mid);
        double osc = std::max(std::abs(psi(iv.lo) - v), std::abs(psi(iv.hi) - v));
        auto lo = std::upper_bound(xs.begin(), xs.end(), iv.lo);
        auto hi = std::lower_bound(xs.begin(), xs.end(), iv.hi);
        for (auto it = lo; it < hi; ++it)
            osc = std::max(osc, std::abs(psi(*it) - v));
        if (!(osc < xi)) {
            std::ostringstream os;
            os << "plateauize: oscillation " << osc << " >= xi " << xi << " on [" << iv.lo
               << ", " << iv.hi << "] (grid step too coarse)";
            throw ContractError(os.str());
        }
        plateaus.push_back({iv.lo, iv.hi, v});
    }
    return PlateauFunction(std::move(plateaus), psi.baseline(), family.delta);
}

std::vector<std::size_t> unflatten(std::uint64_t box, const IntervalFamily& family, int n) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    const std::uint64_t r = family.size();
    for (int p = 0; p < n; ++p) {
        idx[static_cast<std::size_t>(p)] = static_cast<std::size_t>(box % r);
        box /= r;
    }
    return idx;
}

std::vector<double> box_center(const IntervalFamily& family, std::uint64_t box, int n) {
    auto idx = unflatten(box, family, n);
    std::vector<double> a(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
        const auto& iv = family.intervals[idx[static_cast<std::size_t>(p)]];
        a[static_cast<std::size_t>(p)] =
            std::clamp(0.5 * (iv.lo + iv.hi), -family.half_width, family.half_width);
    }
    return a;
}

namespace {

constexpr int kOffsetAttempts = 8;

// splitmix64 finalizer; a fixed hash keeps offsets reproducible.
double unit_hash(std::uint64_t key) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

bool separated(double a, double b) {
    return b - a > 2e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

UTable distinctify(std::vector<PlateauFunction>& phi, const Scheme& s,
                   std::span<const IntervalFamily> families, double rho_cap) {
    if (!(rho_cap > 0.0))
        throw ContractError("distinctify: rho_cap must be positive");
    const int n = s.n;
    std::vector<std::vector<double>> base(phi.size());
    for (std::size_t q = 0; q < phi.size(); ++q) {
        if (phi[q].plateaus().size() != families[q].size())
            throw ContractError("distinctify: plateau count does not match family");
        for (const auto& p : phi[q].plateaus())
            base[q].push_back(p.value);
    }
    double rho = rho_cap;
    if (s.variant == Variant::Monotone) {
        double min_step = std::numeric_limits<double>::infinity();
        for (const auto& b : base)
            for (std::size_t i = 1; i < b.size(); ++i)
                min_step = std::min(min_step, b[i] - b[i - 1]);
        if (!(min_step > 0.0))
            throw StageFailure("distinctify: base plateau values not strictly increasing");
        rho = std::min(rho, 0.4 * min_step);
    }

    // Start from the unshifted values; only colliding ones get offsets.
    std::vector<std::vector<double>> vals = base;

    UTable table;
    {
        std::uint64_t total = 0;
        for (const auto& fam : families) {
            std::uint64_t c = 1;
            for (int p = 0; p < n; ++p)
                c *= fam.size();
            total += c;
        }
        table.entries.reserve(total);
    }
    for (int attempt = 0; attempt < kOffsetAttempts; ++attempt) {
        table.entries.clear();
        for (std::size_t q = 0; q < phi.size(); ++q) {
            const std::uint64_t r = families[q].size();
            std::uint64_t count = 1;
            for (int p = 0; p < n; ++p)
                count *= r;
            auto w = s.row(static_cast<int>(q + 1));
            std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
            for (std::uint64_t box = 0; box < count; ++box) {
                double u = 0.0;
                for (int p = 0; p < n; ++p)
                    u += w[static_cast<std::size_t>(p)] * vals[q][idx[static_cast<std::size_t>(p)]];
                table.entries.push_back({u, static_cast<std::uint32_t>(q + 1), box});
                for (int p = 0; p < n; ++p) {
                    if (++idx[static_cast<std::size_t>(p)] < r)
                        break;
                    idx[static_cast<std::size_t>(p)] = 0;
                }
            }
        }
        std::sort(table.entries.begin(), table.entries.end(),
                  [](const UTable::Entry& a, const UTable::Entry& b) { return a.u < b.u; });

        // Collisions are rare coincidences; redraw only the plateau value that
        // the later box of each pair uses in its first coordinate.
        std::vector<std::pair<std::size_t, std::size_t>> redraw;
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < table.entries.size(); ++k) {
            const double a = table.entries[k - 1].u;
            const double b = table.entries[k].u;
            if (!separated(a, b)) {
                const auto& e = table.entries[k];
                redraw.emplace_back(e.q - 1, static_cast<std::size_t>(e.box % families[e.q - 1].size()));
                continue;
            }
            min_sep = std::min(min_sep, b - a);
        }
        if (!redraw.empty()) {
            const std::uint64_t salt = static_cast<std::uint64_t>(attempt + 1) << 48;
            for (const auto& [q, i] : redraw)
                vals[q][i] = base[q][i] + rho * unit_hash(salt ^ (q << 32) ^ i);
            continue;
        }

        for (std::size_t q = 0; q < phi.size(); ++q) {
            std::vector<Plateau> plats = phi[q].plateaus();
            for (std::size_t i = 0; i < plats.size(); ++i)
                plats[i].value = vals[q][i];
            phi[q] = PlateauFunction(std::move(plats), phi[q].baseline(), phi[q].ramp());
            if (s.variant == Variant::Monotone && !phi[q].is_increasing(true))
                throw StageFailure("distinctify: monotonicity lost");
        }
        table.min_separation = min_sep;
        table.offset_scale = rho;
        table.attempts = static_cast<int>(attempt + 1);
        return table;
    }
    throw StageFailure("distinctify: could not separate the box values within rho_cap");
}

PL1D build_h(const Evaluator& f, const Scheme& s, const UTable& table,
             std::span<const IntervalFamily> families, KnotInfo* info) {
    const auto& e = table.entries;
    KnotInfo ki;
    ki.count = e.size();
    if (e.empty()) {
        if (info)
            *info = ki;
        return PL1D::zero();
    }
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(e.size() + 2);
    ys.reserve(e.size() + 2);
    xs.push_back(e.front().u - 1.0);
    ys.push_back(0.0);
    for (const auto& entry : e) {
        const auto& fam = families[entry.q - 1];
        auto a = box_center(fam, entry.box, s.n);
        double v = s.eps0 * f(a);
        if (s.has_cutoff()) {
            double na = 0.0;
            for (double c : a)
                na += c * c;
            if (std::sqrt(na) > s.C * (std::abs(entry.u) + 2.0)) {
                v = 0.0;
                ++ki.cut;
            }
        }
        xs.push_back(entry.u);
        ys.push_back(v);
    }
    xs.push_back(e.back().u + 1.0);
    ys.push_back(0.0);
    ki.u_first = e.front().u;
    ki.u_last = e.back().u;
    for (std::size_t k = 1; k < xs.size(); ++k)
        ki.max_gap = std::max(ki.max_gap, xs[k] - xs[k - 1]);
    if (info)
        *info = ki;
    return PL1D(std::move(xs), std::move(ys), Extension::Constant, Extension::Constant);
}

CubeGrid::CubeGrid(int n, double half_width, int res) : n_(n), w_(half_width), res_(res) {
    if (res < 2)
        throw std::invalid_argument("CubeGrid: need at least 2 points per axis");
    total_ = 1;
    for (int p = 0; p < n; ++p)
        total_ *= static_cast<std::size_t>(res);
}

void CubeGrid::point(std::size_t k, std::vector<double>& x) const {
    x.resize(static_cast<std::size_t>(n_));
    for (int p = 0; p < n_; ++p) {
        const auto i = k % static_cast<std::size_t>(res_);
        k /= static_cast<std::size_t>(res_);
        x[static_cast<std::size_t>(p)] = -w_ + 2.0 * w_ * static_cast<double>(i) / (res_ - 1);
    }
}

double grid_norm(const Evaluator& f, int n, double half_width, int res) {
    CubeGrid g(n, half_width, res);
    std::vector<double> x;
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        g.point(k, x);
        s = std::max(s, std::abs(f(x)));
    }
    return s;
}

double superpose(const PL1D& h, std::span<const PlateauFunction> phi, const Scheme& s,
                 std::span<const double> x) {
    double total = 0.0;
    for (int q = 1; q <= s.m; ++q)
        total += h(s.inner(q, phi[static_cast<std::size_t>(q - 1)], x));
    return total;
}

double StageCheck::gamma_min() const {
    double g = std::numeric_limits<double>::infinity();
    for (double v : margin)
        g = std::min(g, v);
    return g;
}

bool StageCheck::ok() const {
    if (!support_ok)
        return false;
    for (double v : margin)
        if (!(v > 0.0))
            return false;
    for (std::size_t i = 0; i < h_norm.size(); ++i)
        if (!(h_norm[i] < h_bound[i]))
            return false;
    return true;
}

std::string StageCheck::describe() const {
    std::ostringstream os;
    os.precision(6);
    if (!support_ok)
        os << "support: h nonzero outside the admissible window; ";
    for (std::size_t i = 0; i < h_norm.size(); ++i)
        if (!(h_norm[i] < h_bound[i]))
            os << "norm t=" << i << ": " << h_norm[i] << " >= " << h_bound[i] << "; ";
    for (std::size_t i = 0; i < margin.size(); ++i)
        if (!(margin[i] > 0.0)) {
            os << "residual t=" << t[i] << ": " << lhs[i] << " >= " << rhs[i];
            if (!worst_point.empty()) {
                os << " (worst x=(";
                for (std::size_t p = 0; p < worst_point.size(); ++p)
                    os << (p ? "," : "") << worst_point[p];
                os << "), f=" << worst_f << ", sum=" << worst_sum << ")";
            }
            os << "; ";
        }
    return os.str();
}

StageCheck verify_stage(const Evaluator& f, std::span<const PlateauFunction> phi, const PL1D& h,
                        const Scheme& s, int N, double eta, int res, const NormCache* norms) {
    StageCheck out;
    NormCache local;
    const NormCache* nc = norms;
    if (!nc || static_cast<int>(nc->q_norm.size()) < N + 3) {
        for (int t = 0; t <= N + 2; ++t)
            local.q_norm.push_back(grid_norm(f, s.n, s.D(t), res));
        nc = &local;
    }

    // support
    {
        const double lo = s.support_lo(N);
        const double hi = s.support_hi(N);
        bool ok = h.left_ext() == Extension::Constant && h.right_ext() == Extension::Constant;
        const auto& xs = h.breakpoints();
        const auto& ys = h.values();
        if (!xs.empty()) {
            ok = ok && ys.front() == 0.0 && ys.back() == 0.0 && xs.front() >= lo &&
                 xs.back() <= hi;
            for (std::size_t k = 0; k < xs.size() && ok; ++k)
                if (ys[k] != 0.0 && !(xs[k] > lo && xs[k] < hi))
                    ok = false;
        }
        out.support_ok = ok;
    }

    for (int t = 0; t <= N + 1; ++t) {
        const double d = s.D(t);
        out.h_norm.push_back(sup_norm(h, -d, d));
        out.h_bound.push_back(s.eps0 * nc->q_norm[static_cast<std::size_t>(t + 1)] + eta);
    }

    std::vector<double> x;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int t = s.first_gated_t(); t <= N; ++t) {
        CubeGrid g(s.n, s.D(t), res);
        double lhs = 0.0;
        const double rhs = s.eps1 * nc->q_norm[static_cast<std::size_t>(t + 1)] + eta;
        for (std::size_t k = 0; k < g.size(); ++k) {
            g.point(k, x);
            const double fx = f(x);
            const double sx = superpose(h, phi, s, x);
            const double r = std::abs(fx - sx);
            if (r > lhs)
                lhs = r;
            if (r - rhs > worst_excess) {
                worst_excess = r - rhs;
                out.worst_point = x;
                out.worst_f = fx;
                out.worst_sum = sx;
            }
        }
        out.t.push_back(t);
        out.lhs.push_back(lhs);
        out.rhs.push_back(rhs);
        out.margin.push_back(rhs - lhs);
    }
    return out;
}

double stability_radius(const PL1D& h, double gamma_min, int m) {
    const double L = h.max_slope();
    if (L == 0.0)
        return std::numeric_limits<double>::infinity();
    return gamma_min / (m * L);
}

std::uint64_t estimate_boxes(const Scheme& s, double delta, double half_width) {
    // r_q <= 2D / (m delta) + 2 for every q
    const double r = std::floor(2.0 * half_width / (s.m * delta)) + 2.0;
    const double total = s.m * std::pow(r, s.n);
    if (!(total < 1.8e19))
        return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(total);
}

StageOutput build_stage(const StageInput& in, const Scheme& s) {
    if (in.psi.size() != static_cast<std::size_t>(s.m))
        throw ContractError("build_stage: need one inner function per term");
    if (!(in.xi > 0.0 && in.xi < 1.0 / (6.0 * s.n)))
        throw ContractError("build_stage: xi must lie in (0, 1/(6n))");

    double psi_lip = 0.0;
    for (const auto& p : in.psi)
        psi_lip = std::max(psi_lip, p.realized().max_slope());

    StageOutput out;
    out.xi = in.xi;
    out.delta = choose_delta(in.f_lipschitz, psi_lip, in.eta, s, in.xi, in.rule) * in.delta_scale;
    const double D_N = s.D(in.N);
    const std::uint64_t boxes = estimate_boxes(s, out.delta, D_N);
    if (boxes > in.max_boxes) {
        std::ostringstream os;
        os << "stage needs about " << static_cast<double>(boxes) << " boxes (delta = " << out.delta
           << " on [-" << D_N << ", " << D_N << "]^" << s.n << "), limit " << in.max_boxes;
        throw ResourceLimit(os.str());
    }

    for (int q = 1; q <= s.m; ++q) {
        auto fam = s.variant == Variant::Standard
                       ? build_family(q, s.m, s.n, out.delta, D_N)
                       : build_family_unchecked(q, s.m, out.delta, D_N);
        out.phi.push_back(plateauize(in.psi[static_cast<std::size_t>(q - 1)], fam, in.xi));
        out.families.push_back(std::move(fam));
    }
    UTable table = distinctify(out.phi, s, out.families, 0.5 * in.xi);

    for (std::size_t q = 0; q < out.phi.size(); ++q) {
        const auto diff = add(out.phi[q].realized(), scale(in.psi[q].realized(), -1.0));
        out.budget_spent = std::max(out.budget_spent, sup_norm(diff, -D_N, D_N));
        out.max_phi_deviation = std::max(out.max_phi_deviation, out.phi[q].baseline_deviation());
    }
    if (!(out.budget_spent < in.budget)) {
        std::ostringstream os;
        os << "perturbation " << out.budget_spent << " exceeds budget " << in.budget;
        throw StageFailure(os.str());
    }
    if (!(out.max_phi_deviation < 1.0))
        throw StageFailure("inner function left the admissible class");

    out.h = build_h(in.f, s, table, out.families, &out.knots);
    out.check = verify_stage(in.f, out.phi, out.h, s, in.N, in.eta, in.grid_res);
    if (!out.check.ok())
        throw StageFailure("stage verification failed: " + out.check.describe());
    out.radius = stability_radius(out.h, out.check.gamma_min(), s.m);
    return out;
}

} // namespace ksup

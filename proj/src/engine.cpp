#include "ksup/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ksup {

std::string to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Completed:
        return "completed";
    case RunStatus::Converged:
        return "converged";
    case RunStatus::ZeroResidual:
        return "zero-residual";
    case RunStatus::Aborted:
        return "aborted";
    }
    return "aborted";
}

RunStatus run_status_from_string(const std::string& s) {
    if (s == "completed")
        return RunStatus::Completed;
    if (s == "converged")
        return RunStatus::Converged;
    if (s == "zero-residual")
        return RunStatus::ZeroResidual;
    if (s == "aborted")
        return RunStatus::Aborted;
    throw std::invalid_argument("unknown run status '" + s + "'");
}

Evaluator residual(const Evaluator& f0, std::span<const PL1D> stages,
                   std::span<const PlateauFunction> family, const Scheme& s) {
    if (stages.empty())
        return f0;
    // Summing the stages first is the same function and much cheaper to evaluate.
    PL1D acc = sum(stages);
    std::vector<PlateauFunction> fam(family.begin(), family.end());
    return [f0, acc = std::move(acc), fam = std::move(fam), s](std::span<const double> x) {
        return f0(x) - superpose(acc, fam, s, x);
    };
}

double estimate_lipschitz(const Evaluator& f, int n, double half_width, int samples,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-half_width, half_width);
    std::normal_distribution<double> dir(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> y(x.size());
    double best = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double r = half_width * std::pow(10.0, -1.0 - 5.0 * (k % 6) / 5.0);
        double norm = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p) {
            x[p] = coord(rng);
            y[p] = dir(rng);
            norm += y[p] * y[p];
        }
        norm = std::sqrt(norm);
        double dist = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p) {
            y[p] = std::clamp(x[p] + r * y[p] / norm, -half_width, half_width);
            dist += (y[p] - x[p]) * (y[p] - x[p]);
        }
        dist = std::sqrt(dist);
        if (dist > 0.0)
            best = std::max(best, std::abs(f(x) - f(y)) / dist);
    }
    return 2.0 * best;
}

namespace {

std::vector<double> cube_norms(const Evaluator& f, const Scheme& s, int t_top, int res) {
    std::vector<double> out;
    for (int t = 0; t <= t_top; ++t)
        out.push_back(grid_norm(f, s.n, s.D(t), res));
    return out;
}

// Lipschitz constant of X_q = sum_p w_p phi(x_p) in the Euclidean norm.
double inner_lipschitz(const PlateauFunction& phi, std::span<const double> row) {
    double w2 = 0.0;
    for (double w : row)
        w2 += w * w;
    return std::sqrt(w2) * phi.realized().max_slope();
}

double certified_lipschitz(const TargetFunction& f0, std::span<const PL1D> stages,
                           std::span<const PlateauFunction> family, const Scheme& s,
                           double half_width) {
    double L = f0.lipschitz(half_width);
    if (stages.empty())
        return L;
    double Lx = 0.0;
    for (int q = 1; q <= s.m; ++q)
        Lx += inner_lipschitz(family[static_cast<std::size_t>(q - 1)], s.row(q));
    for (const auto& h : stages)
        L += h.max_slope() * Lx;
    return L;
}

} // namespace

Representation run(const TargetFunction& f_in, const Scheme& s, const StopRule& stop,
                   const RunOptions& opts) {
    if (stop.t_max < 1)
        throw std::invalid_argument("run: T_max must be at least 1");
    if (stop.k_max < 1)
        throw std::invalid_argument("run: K_max must be at least 1");
    if (f_in.n != s.n)
        throw std::invalid_argument("run: target dimension does not match the scheme");

    const Normalized norm = normalize(f_in);
    const TargetFunction& f0 = norm.target;

    Representation rep;
    rep.scheme = s;
    rep.output_scale = norm.scale;
    rep.target = f_in.name;
    rep.stop = stop;
    rep.options = opts;
    rep.family.assign(static_cast<std::size_t>(s.m), PlateauFunction::identity_of(s.baseline));
    rep.notes.push_back("effective norm: ||f_k|| is the grid sup over Q_{T_max+2}");
    rep.notes.push_back("the inner family is built for this target, not universal");
    if (opts.modulus == ModulusSource::Estimated)
        rep.notes.push_back("heuristic modulus: Lipschitz constants of f_k were sampled, not certified");
    if (norm.scale != 1.0)
        rep.notes.push_back("target scaled by 1/" + std::to_string(norm.scale) + " before the run");

    const int top = stop.t_max + 2;
    std::vector<double> M = cube_norms(f0.eval, s, top, opts.grid_res);
    std::vector<double> radii;
    std::vector<double> spent;

    for (int k = 0; k < stop.k_max; ++k) {
        if (k > 0 && M[0] <= stop.tol) {
            rep.status = RunStatus::Converged;
            break;
        }
        StageRecord rec;
        rec.k = k;
        rec.M = M;
        rec.f_norm = M[static_cast<std::size_t>(top)];
        rec.N = s.depth(k, stop.t_max);

        if (rec.f_norm < 1e-14) {
            rec.zero_branch = true;
            rep.trace.push_back(rec);
            rep.stages.push_back(PL1D::zero());
            rep.status = RunStatus::ZeroResidual;
            break;
        }

        rec.eta = std::min(std::pow(s.eps1, k), (s.eps - s.eps0) * rec.f_norm);
        const Evaluator fk = residual(f0.eval, rep.stages, rep.family, s);
        const double D_N = s.D(rec.N);
        if (opts.modulus == ModulusSource::Certified)
            rec.f_lipschitz = certified_lipschitz(f0, rep.stages, rep.family, s, D_N);
        else
            rec.f_lipschitz = estimate_lipschitz(fk, s.n, D_N, 4000, opts.seed + static_cast<std::uint64_t>(k));

        // What is left of each prior radius after the later perturbations.
        rec.budget = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < radii.size(); ++j) {
            double left = radii[j];
            for (std::size_t i = j + 1; i < spent.size(); ++i)
                left -= spent[i];
            rec.budget = std::min(rec.budget, 0.5 * left);
        }

        StageInput in;
        in.f = fk;
        in.f_lipschitz = rec.f_lipschitz;
        in.psi = rep.family;
        in.N = rec.N;
        in.eta = rec.eta;
        in.xi = std::min(0.99 / (6.0 * s.n), rec.budget);
        in.budget = rec.budget;
        in.grid_res = opts.grid_res;
        in.max_boxes = opts.max_boxes;
        in.rule = opts.rule;

        std::optional<StageOutput> out;
        std::string last_error;
        for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
            rec.attempts = attempt + 1;
            try {
                out = build_stage(in, s);
                break;
            } catch (const ResourceLimit& e) {
                // A smaller step only needs more boxes.
                last_error = e.what();
                break;
            } catch (const StageFailure& e) {
                last_error = e.what();
                in.delta_scale *= 0.5;
                in.xi *= 0.5;
            } catch (const ContractError& e) {
                last_error = e.what();
                break;
            }
        }
        if (!out) {
            rep.status = RunStatus::Aborted;
            rep.abort_stage = k;
            std::ostringstream os;
            os << "stage " << k << " failed after " << rec.attempts << " attempt(s): " << last_error;
            rep.abort_reason = os.str();
            break;
        }

        rec.delta = out->delta;
        rec.xi = out->xi;
        rec.h_norm = sup_norm(out->h);
        rec.t = out->check.t;
        rec.lhs = out->check.lhs;
        rec.rhs = out->check.rhs;
        rec.h_norm_t = out->check.h_norm;
        rec.h_bound_t = out->check.h_bound;
        rec.gamma_min = out->check.gamma_min();
        rec.radius = out->radius;
        rec.budget_spent = out->budget_spent;
        rec.knots = out->knots.count;
        rec.knot_max_gap = out->knots.max_gap;

        rep.family = std::move(out->phi);
        rep.stages.push_back(std::move(out->h));
        rep.trace.push_back(rec);

        // Every earlier stage must still hold for the refined family.
        for (std::size_t j = 0; j + 1 < rep.stages.size(); ++j) {
            const auto& rj = rep.trace[j];
            if (rj.zero_branch)
                continue;
            const Evaluator fj =
                residual(f0.eval, std::span(rep.stages).first(j), rep.family, s);
            const StageCheck c = verify_stage(fj, rep.family, rep.stages[j], s, rj.N, rj.eta,
                                              opts.grid_res);
            if (!c.ok()) {
                rep.status = RunStatus::Aborted;
                rep.abort_stage = static_cast<int>(j);
                rep.abort_reason = "re-verification of stage " + std::to_string(j) +
                                   " failed after stage " + std::to_string(k) + ": " +
                                   c.describe();
                break;
            }
        }
        if (rep.status == RunStatus::Aborted)
            break;

        // With every prior stage re-verified, their gaps are re-measured too.
        radii.push_back(out->radius);
        spent.push_back(out->budget_spent);

        const Evaluator next = residual(f0.eval, rep.stages, rep.family, s);
        M = cube_norms(next, s, top, opts.grid_res);
    }

    rep.final_M = M;
    rep.g = sum(rep.stages);
    return rep;
}

double eval_representation(const Representation& rep, std::span<const double> x) {
    return rep.output_scale * superpose(rep.g, rep.family, rep.scheme, x);
}

std::vector<StageCheck> reverify(const Representation& rep, const TargetFunction& f_in) {
    const Normalized norm = normalize(f_in);
    std::vector<StageCheck> out;
    for (std::size_t j = 0; j < rep.trace.size() && j < rep.stages.size(); ++j) {
        const auto& r = rep.trace[j];
        if (r.zero_branch)
            continue;
        const Evaluator fj =
            residual(norm.target.eval, std::span(rep.stages).first(j), rep.family, rep.scheme);
        out.push_back(verify_stage(fj, rep.family, rep.stages[j], rep.scheme, r.N, r.eta,
                                   rep.options.grid_res));
    }
    return out;
}

std::vector<InvariantResult> check_trace(const Representation& rep) {
    const Scheme& s = rep.scheme;
    std::vector<InvariantResult> out;
    auto fmt = [](auto&&... parts) {
        std::ostringstream os;
        os.precision(17);
        (os << ... << parts);
        return os.str();
    };

    // M_{k, .} for k = 0..K, the last row being the final residual.
    std::vector<std::vector<double>> M;
    for (const auto& r : rep.trace)
        M.push_back(r.M);
    if (!rep.final_M.empty() && (rep.trace.empty() || !rep.trace.back().zero_branch))
        M.push_back(rep.final_M);

    InvariantResult growth{"growth bound (1+m eps)^k", true, ""};
    const double base = 1.0 + s.m * s.eps;
    for (std::size_t k = 0; k < M.size() && growth.ok; ++k)
        for (std::size_t t = 0; t < M[k].size(); ++t)
            if (!(M[k][t] <= std::pow(base, static_cast<double>(k)))) {
                growth.ok = false;
                growth.detail = fmt("M_{", k, ",", t, "} = ", M[k][t], " > ",
                                    std::pow(base, static_cast<double>(k)));
                break;
            }
    out.push_back(growth);

    InvariantResult contraction{"residual contraction M_{k+1,t} < eps1 M_{k,t+1} + eta_k", true, ""};
    for (std::size_t k = 0; k + 1 < M.size() && contraction.ok; ++k) {
        const auto& r = rep.trace[k];
        if (r.zero_branch)
            continue;
        const int tmax = std::min(static_cast<int>(k), rep.stop.t_max);
        for (int t = s.first_gated_t(); t <= tmax; ++t) {
            const auto tt = static_cast<std::size_t>(t);
            if (tt + 1 >= M[k].size() || tt >= M[k + 1].size())
                break;
            const double bound = s.eps1 * M[k][tt + 1] + r.eta;
            if (!(M[k + 1][tt] < bound)) {
                contraction.ok = false;
                contraction.detail =
                    fmt("k=", k, " t=", t, ": ", M[k + 1][tt], " >= ", bound);
                break;
            }
        }
    }
    out.push_back(contraction);

    InvariantResult envelope{"decay envelope M_{k,i} <= (k+1) eps1^(alpha k - (1-alpha) i)", true, ""};
    for (std::size_t k = 0; k < M.size() && envelope.ok; ++k)
        for (std::size_t i = 1; i < M[k].size(); ++i) {
            const double kk = static_cast<double>(k);
            const double ii = static_cast<double>(i);
            const double bound =
                (kk + 1.0) * std::pow(s.eps1, s.alpha * kk - (1.0 - s.alpha) * ii);
            if (!(M[k][i] <= bound)) {
                envelope.ok = false;
                envelope.detail = fmt("M_{", k, ",", i, "} = ", M[k][i], " > ", bound);
                break;
            }
        }
    out.push_back(envelope);

    InvariantResult hbound{"||h_k|| <= eps ||f_k||", true, ""};
    InvariantResult hterm{"||h_k||_{[-D_i,D_i]} <= eps0 ||f_k||_{Q_{i+1}} + eps1^k", true, ""};
    for (const auto& r : rep.trace) {
        if (r.zero_branch)
            continue;
        if (hbound.ok && !(r.h_norm <= s.eps * r.f_norm)) {
            hbound.ok = false;
            hbound.detail = fmt("k=", r.k, ": ", r.h_norm, " > ", s.eps * r.f_norm);
        }
        for (std::size_t i = 0; i < r.h_norm_t.size() && hterm.ok; ++i) {
            if (i + 1 >= r.M.size())
                break;
            const double bound = s.eps0 * r.M[i + 1] + std::pow(s.eps1, r.k);
            if (!(r.h_norm_t[i] <= bound)) {
                hterm.ok = false;
                hterm.detail = fmt("k=", r.k, " i=", i, ": ", r.h_norm_t[i], " > ", bound);
            }
        }
    }
    out.push_back(hbound);
    out.push_back(hterm);

    InvariantResult recorded{"recorded stage residuals below their bounds", true, ""};
    for (const auto& r : rep.trace) {
        for (std::size_t i = 0; i < r.lhs.size() && i < r.rhs.size(); ++i)
            if (!(r.lhs[i] < r.rhs[i])) {
                recorded.ok = false;
                recorded.detail = fmt("k=", r.k, " t=", r.t[i], ": ", r.lhs[i], " >= ", r.rhs[i]);
                break;
            }
        if (!recorded.ok)
            break;
    }
    out.push_back(recorded);
    return out;
}

} // namespace ksup

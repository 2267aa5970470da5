#pragma once

#include "ksup/outer_builder.hpp"
#include "ksup/scheme.hpp"
#include "ksup/targets.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ksup {

struct StopRule {
    double tol = 1e-3;  // grid residual on Q_0
    int k_max = 5;
    int t_max = 1;
};

enum class ModulusSource { Certified, Estimated };

struct RunOptions {
    int grid_res = 201;
    std::uint64_t max_boxes = 20'000'000;
    DeltaRule rule = DeltaRule::Anchor;
    int max_retries = 5;
    ModulusSource modulus = ModulusSource::Certified;
    std::uint64_t seed = 1; // only used by the modulus estimator
};

/// One completed (or zero-branch) iteration.
struct StageRecord {
    int k = 0;
    int N = 0;
    double eta = 0.0;
    double delta = 0.0;
    double xi = 0.0;
    double f_norm = 0.0;           // effective sup of f_k (grid, Q_{T+2})
    double f_lipschitz = 0.0;      // modulus used for delta
    std::vector<double> M;         // grid ||f_k||_{Q_t}, t = 0..T_max+2
    double h_norm = 0.0;           // ||h_k||_R (exact)
    std::vector<int> t;            // gated cubes
    std::vector<double> lhs;       // residual of this stage on Q_t
    std::vector<double> rhs;
    std::vector<double> h_norm_t;  // ||h_k||_{[-D_t, D_t]}, t = 0..N+1
    std::vector<double> h_bound_t; // eps0 ||f_k||_{Q_{t+1}} + eta
    double gamma_min = 0.0;
    double radius = 0.0;
    double budget = 0.0;           // allowed perturbation of the family
    double budget_spent = 0.0;
    std::size_t knots = 0;
    double knot_max_gap = 0.0;
    bool zero_branch = false;
    int attempts = 1;
};

enum class RunStatus { Completed, Converged, ZeroResidual, Aborted };
std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

/// The inner family, the outer function and everything needed to re-check
/// the run.
struct Representation {
    Scheme scheme;
    std::vector<PlateauFunction> family;
    std::vector<PL1D> stages;      // h_0 .. h_{K-1}
    PL1D g;                        // sum of the stages
    double output_scale = 1.0;     // multiply sum_q g(X_q) by this
    std::string target;            // catalog name, empty if not from the catalog
    StopRule stop;
    RunOptions options;
    std::vector<StageRecord> trace;
    std::vector<double> final_M;   // grid ||f_K||_{Q_t} after the last stage
    RunStatus status = RunStatus::Completed;
    std::string abort_reason;
    int abort_stage = -1;
    std::vector<std::string> notes;
};

/// f_0 - sum_{j<k} sum_q h_j(X_q) for the given family.
Evaluator residual(const Evaluator& f0, std::span<const PL1D> stages,
                   std::span<const PlateauFunction> family, const Scheme& s);

/// Sampled Lipschitz estimate (max difference quotient over random close
/// pairs, times 2).
double estimate_lipschitz(const Evaluator& f, int n, double half_width, int samples,
                          std::uint64_t seed);

/// Runs the residual iteration. Never throws for stage problems: an
/// unrecoverable stage leaves status == Aborted with the reason recorded and
/// all completed stages kept.
Representation run(const TargetFunction& f0, const Scheme& s, const StopRule& stop,
                   const RunOptions& opts = {});

/// output_scale * sum_q g(X_q(x)).
double eval_representation(const Representation& rep, std::span<const double> x);

/// Re-verifies every recorded stage against the representation's family.
std::vector<StageCheck> reverify(const Representation& rep, const TargetFunction& f0);

struct InvariantResult {
    std::string name;
    bool ok = true;
    std::string detail;
};

/// Checks on the recorded trace only: residual contraction, the growth
/// bound (1 + m eps)^k, the decay envelope (k+1) eps1^{alpha k - (1-alpha) i}
/// and ||h_k|| <= eps ||f_k||.
std::vector<InvariantResult> check_trace(const Representation& rep);

} // namespace ksup

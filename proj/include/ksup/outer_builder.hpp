#pragma once

#include "ksup/grid.hpp"
#include "ksup/plateau.hpp"
#include "ksup/plfun.hpp"
#include "ksup/scheme.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksup {

using Evaluator = std::function<double(std::span<const double>)>;

/// A stage could not be completed with the given parameters; the caller may
/// retry with a smaller grid step or perturbation cap.
class StageFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested grid would need more boxes than allowed.
class ResourceLimit : public StageFailure {
public:
    using StageFailure::StageFailure;
};

/// A precondition that the builder itself is responsible for was violated.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Grid step

enum class DeltaRule {
    /// The textbook conditions: f oscillates by < eta/m over distance m n delta,
    /// psi by < xi over m delta.
    Textbook,
    /// Only the anchor-to-point distance matters: box half-diagonal
    /// sqrt(n)(m-1)delta/2 times L, summed over the matched terms, stays below
    /// eta; the plateau deviation (m+1) delta L_psi / 2 stays below xi/2.
    Anchor,
};

/// delta = 0.5 min(A, B, 1/(2 m n)); see DeltaRule for A and B.
/// Throws ParameterRejected for non-finite or negative moduli.
double choose_delta(double f_lipschitz, double psi_lipschitz, double eta, const Scheme& s,
                    double xi, DeltaRule rule = DeltaRule::Anchor);

// ---------------------------------------------------------------------------
// Plateaus

/// Constant psi(midpoint) on each interval of the family, affine on gaps,
/// baseline outside. Throws ContractError if psi oscillates by >= xi on some
/// interval.
PlateauFunction plateauize(const PlateauFunction& psi, const IntervalFamily& family, double xi);

/// Box table: for every (q, i) in J the common value u of X_q on B_q(i).
struct UTable {
    struct Entry {
        double u;
        std::uint32_t q;        // 1-based term index
        std::uint64_t box;      // flat multi-index, coordinate 0 fastest
    };
    std::vector<Entry> entries; // sorted by u, pairwise distinct
    double min_separation = 0.0;
    double offset_scale = 0.0;  // rho actually used
    int attempts = 0;
};

/// Shift plateau values by deterministic offsets in [0, rho_cap) until every
/// u_{q,i} is distinct (consecutive sorted values differ by more than
/// 2e-12 relative). In the monotone variant offsets keep plateau values
/// strictly increasing. Throws StageFailure after a bounded number of tries.
UTable distinctify(std::vector<PlateauFunction>& phi, const Scheme& s,
                   std::span<const IntervalFamily> families, double rho_cap);

/// Center of box B_q(i), clipped into the stage cube.
std::vector<double> box_center(const IntervalFamily& family, std::uint64_t box, int n);
std::vector<std::size_t> unflatten(std::uint64_t box, const IntervalFamily& family, int n);

// ---------------------------------------------------------------------------
// Outer function

struct KnotInfo {
    std::size_t count = 0;       // s
    double u_first = 0.0;        // u_1
    double u_last = 0.0;         // u_s
    double max_gap = 0.0;        // max_nu (u_nu - u_{nu-1}) over u_0 .. u_{s+1}
    std::size_t cut = 0;         // knots zeroed by the monotone cutoff
};

/// h through (u_{q,i}, eps0 f(a_{q,i})), zero at u_1 - 1, u_s + 1 and beyond.
PL1D build_h(const Evaluator& f, const Scheme& s, const UTable& table,
             std::span<const IntervalFamily> families, KnotInfo* info = nullptr);

// ---------------------------------------------------------------------------
// Verification

/// Uniform grid with `res` points per axis on [-w, w]^n.
class CubeGrid {
public:
    CubeGrid(int n, double half_width, int res);
    std::size_t size() const { return total_; }
    void point(std::size_t k, std::vector<double>& x) const;

private:
    int n_;
    double w_;
    int res_;
    std::size_t total_;
};

double grid_norm(const Evaluator& f, int n, double half_width, int res);

/// sum_q h(X_q(x)) for the given family.
double superpose(const PL1D& h, std::span<const PlateauFunction> phi, const Scheme& s,
                 std::span<const double> x);

struct StageCheck {
    std::vector<int> t;                 // gated cube indices
    std::vector<double> lhs;            // grid sup of |f - sum_q h o X_q| on Q_t
    std::vector<double> rhs;            // eps1 ||f||_{Q_{t+1}} + eta
    std::vector<double> margin;         // rhs - lhs
    std::vector<double> h_norm;         // ||h||_{[-D_t, D_t]}, t = 0..N+1
    std::vector<double> h_bound;        // eps0 ||f||_{Q_{t+1}} + eta
    bool support_ok = false;            // h = 0 outside the support window
    std::vector<double> worst_point;
    double worst_f = 0.0;
    double worst_sum = 0.0;

    double gamma_min() const;
    bool ok() const;
    std::string describe() const;
};

struct NormCache {
    std::vector<double> q_norm; // grid ||f||_{Q_t}, index t
};

/// Grid check of the support, norm and residual inequalities at depth N.
/// Does not throw on violation; inspect ok().
StageCheck verify_stage(const Evaluator& f, std::span<const PlateauFunction> phi, const PL1D& h,
                        const Scheme& s, int N, double eta, int res,
                        const NormCache* norms = nullptr);

/// gamma_min / (m L_h); +inf when h is constant.
double stability_radius(const PL1D& h, double gamma_min, int m);

// ---------------------------------------------------------------------------
// One full stage

struct StageInput {
    Evaluator f;
    double f_lipschitz = 0.0;
    std::vector<PlateauFunction> psi;
    int N = 0;
    double eta = 0.0;
    double xi = 0.0;
    double budget = std::numeric_limits<double>::infinity();
    int grid_res = 201;
    std::uint64_t max_boxes = 20'000'000;
    DeltaRule rule = DeltaRule::Anchor;
    double delta_scale = 1.0; // < 1 after a failed attempt
};

struct StageOutput {
    std::vector<PlateauFunction> phi;
    std::vector<IntervalFamily> families;
    PL1D h;
    KnotInfo knots;
    double delta = 0.0;
    double xi = 0.0;
    double budget_spent = 0.0; // max_q ||phi_q - psi_q|| on [-D_N, D_N]
    StageCheck check;
    double radius = 0.0;
    double max_phi_deviation = 0.0; // max_q sup |phi_q - baseline|
};

/// Estimated box count m prod_p r_q for a given step, before building anything.
std::uint64_t estimate_boxes(const Scheme& s, double delta, double half_width);

/// Builds and verifies one stage. Throws StageFailure (including
/// ResourceLimit) when the stage cannot be completed.
StageOutput build_stage(const StageInput& in, const Scheme& s);

} // namespace ksup

#pragma once

// Cash sub-additive reserves: the ambiguous-discount worst case, the put
// premium, compositions rho0(-V) with convex discount functions, the cash
// additive extension and the sub-probability dual representation.

#include <optional>
#include <vector>

#include "subcash/cash_additive.hpp"
#include "subcash/scenario.hpp"
#include "subcash/spot_forward.hpp"

namespace subcash {

/// Per-atom bounds low <= D <= high on an ambiguous discount factor.
class DiscountEnvelope {
public:
    DiscountEnvelope(DiscountFactor low, DiscountFactor high);
    static DiscountEnvelope constant(std::size_t n, double low, double high);

    std::size_t size() const noexcept { return low_.size(); }
    const DiscountFactor& low() const noexcept { return low_; }
    const DiscountFactor& high() const noexcept { return high_; }
    bool contains(std::span<const double> d, double tol = 0.0) const;

private:
    DiscountFactor low_;
    DiscountFactor high_;
};

/// Minimizer of D x over the envelope: low where x >= 0, high where x < 0.
DiscountFactor worst_discount(const DiscountEnvelope& env, const Position& x);

/// rho0(D_L x^+ - D_H x^-), the worst case of rho0(D x) over the envelope.
double ambiguous_discount_reserve(const RiskMeasureSpec& rho0, const DiscountEnvelope& env, const Position& x);
Functional envelope_reserve(RiskMeasureSpec rho0, DiscountEnvelope env);

/// (1/r) E_p[(K - x)^+]. Throws ValidationError for r < 1.
double put_premium(const ProbabilityWeights& p, double gross_rate, const Position& x, double strike = 0.0);

/// A convex, nonincreasing piecewise-linear function with V(0) = 0 and slopes
/// in [-1, 0]. slopes[k] applies left of breakpoints[k]; slopes.back() applies
/// right of the last breakpoint.
class PiecewiseConvex {
public:
    PiecewiseConvex(Vector breakpoints, Vector slopes);
    /// -(low x^+ - high x^-).
    static PiecewiseConvex envelope(double low, double high);
    static PiecewiseConvex linear(double slope);

    double operator()(double x) const;
    /// sup_x { x y - V(x) }; +inf outside [min_slope, max_slope].
    double conjugate(double y) const;

    const Vector& breakpoints() const noexcept { return breakpoints_; }
    const Vector& slopes() const noexcept { return slopes_; }
    double min_slope() const noexcept { return slopes_.front(); }
    double max_slope() const noexcept { return slopes_.back(); }
    /// Largest |breakpoint|, the Lipschitz constant of the conjugate.
    double breakpoint_radius() const noexcept;

private:
    Vector breakpoints_;
    Vector slopes_;
    Vector knot_values_;  // V at each breakpoint
};

/// One PiecewiseConvex per atom.
class ConvexDiscountFunction {
public:
    explicit ConvexDiscountFunction(std::vector<PiecewiseConvex> atoms);
    static ConvexDiscountFunction uniform(std::size_t n, const PiecewiseConvex& f);
    static ConvexDiscountFunction from_envelope(const DiscountEnvelope& env);

    std::size_t size() const noexcept { return atoms_.size(); }
    const PiecewiseConvex& operator[](std::size_t i) const { return atoms_[i]; }
    /// V(omega, x(omega)) atomwise.
    Position apply(const Position& x) const;

private:
    std::vector<PiecewiseConvex> atoms_;
};

struct ConjugateSample {
    double y;
    double beta;
};

/// beta_T(atom, y) for every y in the grid.
std::vector<ConjugateSample> fenchel_of_V(const ConvexDiscountFunction& v, std::size_t atom,
                                          const Vector& y_grid);

/// rho0(-V(x)).
double compose_with_convex(const RiskMeasureSpec& rho0, const ConvexDiscountFunction& v, const Position& x);
Functional convex_reserve(RiskMeasureSpec rho0, ConvexDiscountFunction v);

struct GridValue {
    double value;
    double mesh_bound;
};

/// sup over per-atom D in a uniform grid on [0, 1] of rho0(D x + beta_T(-D)).
/// The true value lies in [value, value + mesh_bound].
GridValue compose_representation(const RiskMeasureSpec& rho0, const ConvexDiscountFunction& v,
                                 const Position& x, int d_resolution);

struct SubadditivityReport {
    bool monotone = true;      // m -> R(x + m) + m nondecreasing on the grid
    bool inequalities = true;  // R(x + |m|) >= R(x) - |m| and R(x - |m|) <= R(x) + |m|
    double max_violation = 0.0;
    std::optional<double> witness;

    bool passed() const noexcept { return monotone && inequalities; }
};

/// Requires a sorted m-grid.
SubadditivityReport check_cash_subadditive(const Functional& reserve, const Position& x, const Vector& m_grid,
                                           double tol = kClosedFormTol);

/// Largest violation of R(l x + (1-l) y) <= l R(x) + (1-l) R(y) over the lambdas.
double convexity_violation(const Functional& reserve, const Position& x, const Position& y,
                           const Vector& lambdas);
/// Violation of R(lo) >= R(hi) for lo <= hi entrywise; throws if lo is not below hi.
double monotonicity_violation(const Functional& reserve, const Position& lo, const Position& hi);

/// Position on the enlarged space: survival leg X and a scalar default leg x.
struct ExtendedPosition {
    Position survival;
    double default_leg;
};

/// rho_hat(X, x) = R(X - x) - x.
double extend_to_hat(const Functional& reserve, const ExtendedPosition& xhat);

struct SubPenaltyEntry {
    SubProbability mu;
    double alpha;
};

struct SubPenaltyTable {
    std::vector<SubPenaltyEntry> entries;
    bool exact = true;
};

/// alpha^R(mu) = sup_X { mu(-X) - R(X) } over position_grid; a lower bound.
double grid_penalty_subprob(const Functional& reserve, const SubProbability& mu, const GridSpec& grid);

/// Closed form for an envelope reserve over a linear base: 0 when
/// mu_i = D_i P_i for some D in the envelope, +inf otherwise. Other bases fall
/// back to the grid supremum.
PenaltyValue minimal_penalty_subprob(const RiskMeasureSpec& rho0, const DiscountEnvelope& env,
                                     const SubProbability& mu, const GridSpec& grid);
PenaltyValue minimal_penalty_subprob(const Functional& reserve, const SubProbability& mu, const GridSpec& grid);

/// Envelope penalty evaluated on subprob_grid(n, resolution).
SubPenaltyTable envelope_penalty_table(const DiscountEnvelope& env, const ProbabilityWeights& p, int resolution);
/// The 2^n vertices of the feasible box {D P : D in envelope}, all with penalty 0.
SubPenaltyTable envelope_vertex_table(const DiscountEnvelope& env, const ProbabilityWeights& p);
/// Grid penalties of an arbitrary reserve on subprob_grid(n, resolution).
SubPenaltyTable grid_penalty_table(const Functional& reserve, std::size_t n, int resolution, const GridSpec& grid);

double lookup_subprob_penalty(const SubPenaltyTable& table, const SubProbability& mu,
                              double tol = kProbabilityTol);

/// max over entries of mu(-x) - alpha(mu). Throws ValidationError on an empty table.
double dual_evaluate_subprob(const SubPenaltyTable& table, const Position& x);

struct NormalizedDual {
    double value;
    double mass;                       // c* = mu*(Omega)
    ProbabilityWeights measure;        // Q* = mu* / c*, uniform when c* = 0
    std::vector<double> argmax_masses; // masses of every maximizing entry
};

/// The dual value rewritten over (c, Q) in [0,1] x M_1 with mu = c Q.
NormalizedDual normalized_dual(const SubPenaltyTable& table, const Position& x);

/// c -> rho_{T,c}(-X); -inf where the family is empty.
using ForwardFamily = std::function<double(double c, const Position& x)>;

struct WorstForward {
    double value;
    double best_c;
    double mesh_bound;
};

/// sup over c in the grid of c * rho_{T,c}(-X). `c_grid` must lie in (0, 1].
WorstForward worst_discounted_forward(const ForwardFamily& family, const Position& x, const Vector& c_grid,
                                      double mesh_bound = 0.0);
/// Family read off a table: each entry with mass m > 0 is assigned to the
/// nearest c in the grid. The reported mesh bound covers the m -> c rounding.
WorstForward worst_discounted_forward(const SubPenaltyTable& table, const Position& x, const Vector& c_grid);
/// Exact family for an envelope reserve over a linear base: the inner
/// supremum is a box-constrained linear program solved greedily.
ForwardFamily envelope_forward_family(DiscountEnvelope env, ProbabilityWeights p);
/// Bound on the c-grid gap for envelope_forward_family.
double envelope_forward_mesh_bound(const DiscountEnvelope& env, const ProbabilityWeights& p, const Position& x,
                                   const Vector& c_grid);

}  // namespace subcash

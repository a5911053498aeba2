#pragma once

// The product-space extension rho~ of a cash sub-additive reserve, the
// decomposition of its penalty over (Q, D, Qbar), and the conditional risk
// measure generated by a convex discount function.

#include <functional>
#include <optional>

#include "subcash/cash_additive.hpp"
#include "subcash/subadditive.hpp"

namespace subcash {

/// Survival leg X1 paid on {theta = 1}, default leg X0 paid on {theta = 0}.
struct ProductPosition {
    Position survival;
    Position default_leg;
};

using PenaltyFn = std::function<double(const ProbabilityWeights&)>;
using SubPenaltyFn = std::function<double(const SubProbability&)>;

/// Closed-form penalty of a spec; throws for kinds without one.
PenaltyFn closed_form_penalty(RiskMeasureSpec spec);
PenaltyFn table_penalty(PenaltyTable table, double tol = kProbabilityTol);
SubPenaltyFn envelope_subprob_penalty(DiscountEnvelope env, ProbabilityWeights p);
SubPenaltyFn table_subprob_penalty(SubPenaltyTable table, double tol = kProbabilityTol);

/// R(X1 + rhobar(X0)) + rhobar(X0).
double tilde_rho(const Functional& reserve, const RiskMeasureSpec& rhobar, const ProductPosition& p);
/// tilde_rho on the diagonal (X, X); cash additive in X.
double diagonal_rho(const Functional& reserve, const RiskMeasureSpec& rhobar, const Position& x);

struct ProductMeasure {
    ProbabilityWeights q;
    DiscountFactor d;
    ProbabilityWeights qbar;
    Vector delta_bar;  // dQbar/dQ, empty when degenerate
    bool degenerate;   // Q(D) == 1: the default leg carries no mass
    double consistency_gap;
};

/// Qbar from Q(Y) = Q(D Y) + (1 - Q(D)) Qbar(Y), checked on the canonical basis.
ProductMeasure decompose_measure(const ProbabilityWeights& q, const DiscountFactor& d);

/// alpha^R(D Q) + (1 - Q(D)) alphabar(Qbar) with 0 * inf = 0.
double tilde_penalty(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar, const ProbabilityWeights& q,
                     const DiscountFactor& d);

struct PenaltyProjection {
    double value;  // grid infimum, an upper bound on the true one
    std::optional<DiscountFactor> d;
    std::optional<ProbabilityWeights> qbar;
    double mesh;  // D-grid spacing
};

/// inf over D in a per-atom grid on [0, 1] of tilde_penalty(Q, D). Qbar is
/// pinned by (Q, D), so only D is searched.
PenaltyProjection penalty_projection(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar,
                                     const ProbabilityWeights& q, int d_resolution);

/// E_Q[-D X] - tilde_penalty(Q, D).
double tilde_dual_term(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar, const Position& x,
                       const ProbabilityWeights& q, const DiscountFactor& d);

struct TildeDual {
    double value;
    std::optional<ProbabilityWeights> q;
    std::optional<DiscountFactor> d;
};

/// sup of tilde_dual_term over Q in simplex_grid(n, q_resolution) and D in a
/// per-atom grid on [0, 1]; a lower bound on R(X).
TildeDual tilde_dual(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar, const Position& x, int q_resolution,
                     int d_resolution);

/// V(X1 - X0) - X0 atomwise.
Position conditional_from_V(const ConvexDiscountFunction& v, const ProductPosition& p);

struct ComposedReport {
    double direct;       // rho(-V(X1 - X0) + X0)
    double conditional;  // rho(-conditional_from_V(X1, X0))
    double restriction_gap;  // |rho_check(X1, 0) - rho(-V(X1))|
    double diagonal_gap;     // |rho_check(X1, X1) - rho(X1)|
    double max_gap;
    bool passed;
};

ComposedReport composed_check(const RiskMeasureSpec& rho, const ConvexDiscountFunction& v, const ProductPosition& p,
                              double tol = 1e-12);

}  // namespace subcash

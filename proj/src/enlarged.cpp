#include "subcash/enlarged.hpp"

#include <cmath>
#include <numeric>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

constexpr double kDegenerateTol = 1e-12;

DiscountFactor grid_discount(std::size_t index, std::size_t n, int resolution) {
    std::vector<int> digits(n);
    grid_digits(index, resolution, digits);
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(digits[i]) / (resolution - 1);
    return DiscountFactor(std::move(d));
}

}  // namespace

PenaltyFn closed_form_penalty(RiskMeasureSpec spec) {
    if (spec.get_if<RobustFamily>()) throw ValidationError("robust family penalties have no closed form");
    return [spec = std::move(spec)](const ProbabilityWeights& q) {
        return minimal_penalty(spec, q, GridSpec(2, 1.0)).value;
    };
}

PenaltyFn table_penalty(PenaltyTable table, double tol) {
    return [table = std::move(table), tol](const ProbabilityWeights& q) { return lookup_penalty(table, q, tol); };
}

SubPenaltyFn envelope_subprob_penalty(DiscountEnvelope env, ProbabilityWeights p) {
    auto spec = RiskMeasureSpec::linear(std::move(p));
    return [spec = std::move(spec), env = std::move(env)](const SubProbability& mu) {
        return minimal_penalty_subprob(spec, env, mu, GridSpec(2, 1.0)).value;
    };
}

SubPenaltyFn table_subprob_penalty(SubPenaltyTable table, double tol) {
    return [table = std::move(table), tol](const SubProbability& mu) {
        return lookup_subprob_penalty(table, mu, tol);
    };
}

double tilde_rho(const Functional& reserve, const RiskMeasureSpec& rhobar, const ProductPosition& p) {
    if (p.survival.size() != p.default_leg.size()) throw ValidationError("product position legs differ in length");
    const double shift = evaluate_rho(rhobar, p.default_leg);
    return reserve(p.survival + shift) + shift;
}

double diagonal_rho(const Functional& reserve, const RiskMeasureSpec& rhobar, const Position& x) {
    return tilde_rho(reserve, rhobar, {x, x});
}

ProductMeasure decompose_measure(const ProbabilityWeights& q, const DiscountFactor& d) {
    const std::size_t n = q.size();
    if (d.size() != n) throw ValidationError("measure and discount factor differ in length");
    const double qd = expectation(q, Position(d.values()));
    ProductMeasure out{q, d, q, {}, false, 0.0};
    if (1.0 - qd <= kDegenerateTol) {
        out.degenerate = true;
    } else {
        Vector delta(n), qbar(n);
        for (std::size_t i = 0; i < n; ++i) {
            delta[i] = (1.0 - d[i]) / (1.0 - qd);
            qbar[i] = delta[i] * q[i];
        }
        const double total = std::accumulate(qbar.begin(), qbar.end(), 0.0);
        for (double& w : qbar) w /= total;
        out.delta_bar = std::move(delta);
        out.qbar = ProbabilityWeights(std::move(qbar));
    }
    // Q(e_j) = Q(D e_j) + (1 - Q(D)) Qbar(e_j) on the canonical basis.
    const double weight = out.degenerate ? 0.0 : 1.0 - qd;
    for (std::size_t j = 0; j < n; ++j) {
        const double rhs = q[j] * d[j] + weight * out.qbar[j];
        out.consistency_gap = std::max(out.consistency_gap, std::abs(q[j] - rhs));
    }
    return out;
}

double tilde_penalty(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar, const ProbabilityWeights& q,
                     const DiscountFactor& d) {
    const ProductMeasure pm = decompose_measure(q, d);
    Vector dq(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) dq[i] = d[i] * q[i];
    const double first = alpha_r(SubProbability(std::move(dq)));
    if (pm.degenerate) return first;
    if (first == kInf) return kInf;
    const double weight = 1.0 - expectation(q, Position(d.values()));
    return first + weight * alpha_bar(pm.qbar);
}

PenaltyProjection penalty_projection(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar,
                                     const ProbabilityWeights& q, int d_resolution) {
    const std::size_t n = q.size();
    const std::size_t count = grid_cardinality(n, d_resolution);
    const GridOptimum best = parallel_minimize(count, [&](std::size_t k) {
        return tilde_penalty(alpha_r, alpha_bar, q, grid_discount(k, n, d_resolution));
    });
    PenaltyProjection out{best.value, std::nullopt, std::nullopt, 1.0 / (d_resolution - 1)};
    if (best.value < kInf) {
        DiscountFactor d = grid_discount(best.index, n, d_resolution);
        out.qbar = decompose_measure(q, d).qbar;
        out.d = std::move(d);
    }
    return out;
}

double tilde_dual_term(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar, const Position& x,
                       const ProbabilityWeights& q, const DiscountFactor& d) {
    const double penalty = tilde_penalty(alpha_r, alpha_bar, q, d);
    if (penalty == kInf) return -kInf;
    return -expectation(q, hadamard(x, d.span())) - penalty;
}

TildeDual tilde_dual(const SubPenaltyFn& alpha_r, const PenaltyFn& alpha_bar, const Position& x, int q_resolution,
                     int d_resolution) {
    const std::size_t n = x.size();
    const std::vector<ProbabilityWeights> qs = simplex_grid(n, q_resolution);
    const std::size_t dcount = grid_cardinality(n, d_resolution);
    if (static_cast<double>(dcount) * static_cast<double>(qs.size()) > kGridBudget) {
        throw CapacityError("(Q, D) grid exceeds the enumeration budget");
    }
    const GridOptimum best = parallel_maximize(qs.size() * dcount, [&](std::size_t k) {
        return tilde_dual_term(alpha_r, alpha_bar, x, qs[k / dcount], grid_discount(k % dcount, n, d_resolution));
    });
    TildeDual out{best.value, std::nullopt, std::nullopt};
    if (best.value > -kInf) {
        out.q = qs[best.index / dcount];
        out.d = grid_discount(best.index % dcount, n, d_resolution);
    }
    return out;
}

Position conditional_from_V(const ConvexDiscountFunction& v, const ProductPosition& p) {
    return v.apply(p.survival - p.default_leg) - p.default_leg;
}

ComposedReport composed_check(const RiskMeasureSpec& rho, const ConvexDiscountFunction& v, const ProductPosition& p,
                              double tol) {
    ComposedReport r{};
    r.direct = evaluate_rho(rho, -v.apply(p.survival - p.default_leg) + p.default_leg);
    r.conditional = evaluate_rho(rho, -conditional_from_V(v, p));

    const Position zero = Position::constant(p.survival.size(), 0.0);
    const double on_survival = evaluate_rho(rho, -conditional_from_V(v, {p.survival, zero}));
    r.restriction_gap = std::abs(on_survival - compose_with_convex(rho, v, p.survival));
    const double on_diagonal = evaluate_rho(rho, -conditional_from_V(v, {p.survival, p.survival}));
    r.diagonal_gap = std::abs(on_diagonal - evaluate_rho(rho, p.survival));

    r.max_gap = std::max({std::abs(r.direct - r.conditional), r.restriction_gap, r.diagonal_gap});
    r.passed = r.max_gap <= tol;
    return r;
}

}  // namespace subcash

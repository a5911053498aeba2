#include <doctest.h>

#include <cmath>

#include "subcash/enlarged.hpp"
#include "subcash/errors.hpp"
#include "support.hpp"

using namespace subcash;

namespace {

const ProbabilityWeights kHalf{0.5, 0.5};
const DiscountEnvelope kEnv = DiscountEnvelope::constant(2, 0.9, 1.0);

}  // namespace

TEST_CASE("product-space extension restricted to the survival leg") {
    const Functional R = envelope_reserve(RiskMeasureSpec::linear(kHalf), kEnv);
    const auto wc = RiskMeasureSpec::worst_case();
    const Position x{-10, 20};
    CHECK(tilde_rho(R, wc, {x, Position{0, 0}}) == R(x));
    // rhobar(X0) = 10 for X0 = (-10, 5) under the worst case.
    CHECK(tilde_rho(R, wc, {x, Position{-10, 5}}) == doctest::Approx(R(x + 10.0) + 10.0).epsilon(1e-12));
    CHECK_THROWS_AS(tilde_rho(R, wc, {x, Position{1, 2, 3}}), ValidationError);
}

TEST_CASE("the diagonal is cash additive") {
    support::Random rnd(51);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        const Functional R = envelope_reserve(RiskMeasureSpec::linear(p), rnd.envelope(n));
        const auto rhobar = RiskMeasureSpec::entropic(p, rnd.uniform(0.5, 4));
        const Position x = rnd.position(n, 20);
        const double m = rnd.uniform(-10, 10);
        CHECK(std::abs(diagonal_rho(R, rhobar, x + m) - (diagonal_rho(R, rhobar, x) - m)) <= 1e-12 * 20);
    }
}

TEST_CASE("a cash additive reserve is its own diagonal") {
    support::Random rnd(52);
    for (int trial = 0; trial < 50; ++trial) {
        const ProbabilityWeights p = rnd.probability(3);
        const auto base = RiskMeasureSpec::linear(p);
        const Functional R = [base](const Position& y) { return evaluate_rho(base, y); };
        const Position x = rnd.position(3, 20);
        CHECK(diagonal_rho(R, RiskMeasureSpec::worst_case(), x) == doctest::Approx(R(x)).epsilon(1e-12));
    }
}

TEST_CASE("decomposition of a product measure") {
    const ProductMeasure pm = decompose_measure(kHalf, DiscountFactor{0.9, 0.8});
    CHECK_FALSE(pm.degenerate);
    CHECK(pm.qbar[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(pm.qbar[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(pm.delta_bar[0] == doctest::Approx(0.1 / 0.15).epsilon(1e-12));
    CHECK(pm.consistency_gap <= 1e-15);

    const ProductMeasure flat = decompose_measure(kHalf, DiscountFactor{1.0, 1.0});
    CHECK(flat.degenerate);
    CHECK(flat.delta_bar.empty());
    CHECK(flat.consistency_gap == 0.0);

    support::Random rnd(53);
    for (int trial = 0; trial < 200; ++trial) {
        const ProbabilityWeights q = rnd.probability(4);
        Vector d(4);
        for (double& v : d) v = rnd.uniform(0, 1);
        CHECK(decompose_measure(q, DiscountFactor(d)).consistency_gap <= 1e-12);
    }
    CHECK_THROWS_AS(decompose_measure(kHalf, DiscountFactor{1.0}), ValidationError);
}

TEST_CASE("penalty on the product space") {
    const SubPenaltyFn alpha_r = envelope_subprob_penalty(kEnv, kHalf);
    const PenaltyFn zero = closed_form_penalty(RiskMeasureSpec::worst_case());
    const PenaltyFn at_p = closed_form_penalty(RiskMeasureSpec::linear(kHalf));

    CHECK(tilde_penalty(alpha_r, at_p, kHalf, DiscountFactor{0.9, 0.9}) == 0.0);
    CHECK(tilde_penalty(alpha_r, zero, kHalf, DiscountFactor{0.5, 0.5}) == kInf);
    // Qbar = (0, 1) is not the base measure.
    CHECK(tilde_penalty(alpha_r, at_p, kHalf, DiscountFactor{1.0, 0.9}) == kInf);
    CHECK(tilde_penalty(alpha_r, zero, kHalf, DiscountFactor{1.0, 0.9}) == 0.0);
    // No mass on the default leg: the second term vanishes even when infinite.
    CHECK(tilde_penalty(alpha_r, at_p, kHalf, DiscountFactor{1.0, 1.0}) == 0.0);

    const auto ent = RiskMeasureSpec::entropic(kHalf, 2.0);
    const PenaltyFn alpha_ent = closed_form_penalty(ent);
    const DiscountFactor d{0.95, 0.9};
    const ProductMeasure pm = decompose_measure(kHalf, d);
    CHECK(tilde_penalty(alpha_r, alpha_ent, kHalf, d) ==
          doctest::Approx((1.0 - 0.925) * minimal_penalty(ent, pm.qbar, GridSpec()).value).epsilon(1e-12));
    CHECK_THROWS_AS(closed_form_penalty(RiskMeasureSpec::robust({{kHalf, 0.0}})), ValidationError);
}

TEST_CASE("projection of the product penalty") {
    const SubPenaltyFn alpha_r = envelope_subprob_penalty(kEnv, kHalf);
    const PenaltyFn zero = closed_form_penalty(RiskMeasureSpec::worst_case());
    const PenaltyProjection inside = penalty_projection(alpha_r, zero, kHalf, 11);
    CHECK(inside.value == 0.0);
    REQUIRE(inside.d.has_value());
    CHECK(kEnv.contains(inside.d->span(), 1e-12));
    CHECK(inside.mesh == doctest::Approx(0.1));

    const PenaltyProjection outside = penalty_projection(alpha_r, zero, ProbabilityWeights{0.2, 0.8}, 11);
    CHECK(outside.value == kInf);
    CHECK_FALSE(outside.d.has_value());
}

TEST_CASE("the product dual bounds the reserve from below") {
    const SubPenaltyFn alpha_r = envelope_subprob_penalty(kEnv, kHalf);
    const PenaltyFn zero = closed_form_penalty(RiskMeasureSpec::worst_case());
    const Position x{-10, 20};
    const TildeDual td = tilde_dual(alpha_r, zero, x, 21, 11);
    CHECK(td.value == doctest::Approx(-4.0).epsilon(1e-12));
    REQUIRE(td.d.has_value());
    CHECK((*td.d)[0] == 1.0);
    CHECK((*td.d)[1] == doctest::Approx(0.9));

    support::Random rnd(54);
    const Functional R = envelope_reserve(RiskMeasureSpec::linear(kHalf), kEnv);
    for (int trial = 0; trial < 20; ++trial) {
        const Position y = rnd.position(2, 20);
        CHECK(tilde_dual(alpha_r, zero, y, 11, 11).value <= R(y) + 1e-12);
    }
    CHECK_THROWS_AS(tilde_dual(alpha_r, zero, Position::constant(6, 1.0), 41, 41), CapacityError);
}

TEST_CASE("conditional risk measure generated by V") {
    const auto v = ConvexDiscountFunction::from_envelope(kEnv);
    const Position c = conditional_from_V(v, {Position{10, -10}, Position{0, 0}});
    CHECK(c[0] == doctest::Approx(-9.0));
    CHECK(c[1] == doctest::Approx(10.0));
    const Position diag = conditional_from_V(v, {Position{3, -4}, Position{3, -4}});
    CHECK(diag[0] == doctest::Approx(-3.0));
    CHECK(diag[1] == doctest::Approx(4.0));

    support::Random rnd(55);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        const std::vector<RiskMeasureSpec> bases{RiskMeasureSpec::worst_case(), RiskMeasureSpec::linear(p),
                                                 RiskMeasureSpec::entropic(p, rnd.uniform(0.5, 4))};
        const auto& rho = bases[static_cast<std::size_t>(rnd.integer(0, 2))];
        const ComposedReport r = composed_check(rho, rnd.convex(n), {rnd.position(n, 20), rnd.position(n, 20)});
        CAPTURE(rho.name());
        CHECK(r.passed);
    }
}

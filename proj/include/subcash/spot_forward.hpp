#pragma once

// Spot and forward risk measures under a non-ambiguous stochastic discount
// factor D and a zero coupon bond with price B:
//   q_T(X) = B^{-1} rho_0(D X),   q_0(Y) = B rho_T(Y / D).

#include <optional>
#include <vector>

#include "subcash/cash_additive.hpp"
#include "subcash/scenario.hpp"

namespace subcash {

inline constexpr double kBoundedAwayEps = 1e-6;

class DiscountFactor {
public:
    explicit DiscountFactor(Vector values);
    DiscountFactor(std::initializer_list<double> values);
    static DiscountFactor constant(std::size_t n, double d);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const Vector& values() const noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }
    bool bounded_away(double eps = kBoundedAwayEps) const noexcept;

private:
    Vector values_;
};

class BondQuote {
public:
    explicit BondQuote(double price);
    double price() const noexcept { return price_; }

private:
    double price_;
};

double forward_from_spot(const RiskMeasureSpec& rho0, const DiscountFactor& d, const BondQuote& b,
                         const Position& x);
/// The forward measure q_T as a functional.
Functional forward_measure(RiskMeasureSpec rho0, DiscountFactor d, BondQuote b);

/// Requires D bounded away from zero; throws ValidationError otherwise.
double spot_from_forward(const Functional& rhoT, const DiscountFactor& d, const BondQuote& b,
                         const Position& y, double eps = kBoundedAwayEps);
double spot_from_forward(const RiskMeasureSpec& rhoT, const DiscountFactor& d, const BondQuote& b,
                         const Position& y, double eps = kBoundedAwayEps);

inline const std::vector<double> kDefaultCalibrationLambdas{-2.0, -1.0, 0.0, 1.0, 2.0};

struct ForwardCalibrationReport {
    bool passed = true;
    double max_gap = 0.0;
    std::optional<double> failing_lambda;
};

/// rho_0(l D) == -l B for every tested l. The grid must hold a negative, a zero
/// and a positive multiplier.
ForwardCalibrationReport check_forward_calibration(const RiskMeasureSpec& rho0, const DiscountFactor& d,
                                                   const BondQuote& b,
                                                   const std::vector<double>& lambdas = kDefaultCalibrationLambdas,
                                                   double tol = kClosedFormTol);

/// First shift m with q_T(X + m) != q_T(X) - m, if any.
std::optional<double> forward_cash_additivity_witness(const RiskMeasureSpec& rho0, const DiscountFactor& d,
                                                      const BondQuote& b, const Position& x,
                                                      const std::vector<double>& shifts,
                                                      double tol = kClosedFormTol);

/// alpha_T(Q_T) = B^{-1} alpha_0(Q_0) with (Q_0)_i = (B / D_i) (Q_T)_i. Candidates
/// are the simplex grid of `alpha0` together with the preimages of its finite
/// entries; anything that does not land in the table gets +inf.
PenaltyTable transform_penalty(const PenaltyTable& alpha0, const DiscountFactor& d, const BondQuote& b,
                               double eps = kBoundedAwayEps);

}  // namespace subcash

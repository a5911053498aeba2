#include "subcash/spot_forward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

// Density-transformed measures are rebuilt through divisions, so table
// lookups use a looser match than the 1e-12 equality of grid points.
constexpr double kTransformMatchTol = 1e-9;

void require_guard(const DiscountFactor& d, double eps) {
    if (!d.bounded_away(eps)) {
        throw ValidationError("discount factor is not bounded away from zero (min below " +
                              std::to_string(eps) + ")");
    }
}

}  // namespace

DiscountFactor::DiscountFactor(Vector values) : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("discount factor is empty");
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("discount factor entries must lie in [0, 1]");
    }
}

DiscountFactor::DiscountFactor(std::initializer_list<double> values) : DiscountFactor(Vector(values)) {}

DiscountFactor DiscountFactor::constant(std::size_t n, double d) { return DiscountFactor(Vector(n, d)); }

bool DiscountFactor::bounded_away(double eps) const noexcept {
    return *std::min_element(values_.begin(), values_.end()) >= eps;
}

BondQuote::BondQuote(double price) : price_(price) {
    if (!(price > 0.0 && price <= 1.0)) throw ValidationError("bond price must lie in (0, 1]");
}

double forward_from_spot(const RiskMeasureSpec& rho0, const DiscountFactor& d, const BondQuote& b,
                         const Position& x) {
    return evaluate_rho(rho0, hadamard(x, d.span())) / b.price();
}

Functional forward_measure(RiskMeasureSpec rho0, DiscountFactor d, BondQuote b) {
    return [rho0 = std::move(rho0), d = std::move(d), b](const Position& x) {
        return forward_from_spot(rho0, d, b, x);
    };
}

double spot_from_forward(const Functional& rhoT, const DiscountFactor& d, const BondQuote& b,
                         const Position& y, double eps) {
    require_guard(d, eps);
    return b.price() * rhoT(divide(y, d.span()));
}

double spot_from_forward(const RiskMeasureSpec& rhoT, const DiscountFactor& d, const BondQuote& b,
                         const Position& y, double eps) {
    return spot_from_forward([&](const Position& z) { return evaluate_rho(rhoT, z); }, d, b, y, eps);
}

ForwardCalibrationReport check_forward_calibration(const RiskMeasureSpec& rho0, const DiscountFactor& d,
                                                   const BondQuote& b, const std::vector<double>& lambdas,
                                                   double tol) {
    const bool has_neg = std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l < 0.0; });
    const bool has_zero = std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l == 0.0; });
    const bool has_pos = std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l > 0.0; });
    if (!(has_neg && has_zero && has_pos)) {
        throw ValidationError("calibration multipliers need a negative, a zero and a positive value");
    }
    ForwardCalibrationReport report;
    const Position discount(d.values());
    for (double lambda : lambdas) {
        double gap = std::abs(evaluate_rho(rho0, lambda * discount) + lambda * b.price());
        report.max_gap = std::max(report.max_gap, gap);
        if (gap > tol && report.passed) {
            report.passed = false;
            report.failing_lambda = lambda;
        }
    }
    return report;
}

std::optional<double> forward_cash_additivity_witness(const RiskMeasureSpec& rho0, const DiscountFactor& d,
                                                      const BondQuote& b, const Position& x,
                                                      const std::vector<double>& shifts, double tol) {
    const double base = forward_from_spot(rho0, d, b, x);
    for (double m : shifts) {
        if (std::abs(forward_from_spot(rho0, d, b, x + m) - (base - m)) > tol) return m;
    }
    return std::nullopt;
}

PenaltyTable transform_penalty(const PenaltyTable& alpha0, const DiscountFactor& d, const BondQuote& b,
                               double eps) {
    require_guard(d, eps);
    const std::size_t n = d.size();
    const double bond = b.price();

    std::vector<ProbabilityWeights> candidates = simplex_grid(n, alpha0.simplex_resolution);
    auto add_candidate = [&](Vector w) {
        double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (std::abs(total - 1.0) > kTransformMatchTol) return;
        for (double& x : w) x /= total;
        for (const auto& c : candidates) {
            if (approx_equal(c.weights(), w, kTransformMatchTol)) return;
        }
        candidates.emplace_back(std::move(w));
    };
    // Preimages of finite entries: (Q_T)_i = (D_i / B) (Q_0)_i.
    for (const auto& e : alpha0.entries) {
        if (e.alpha == kInf) continue;
        if (e.q.size() != n) throw ValidationError("penalty table and discount factor differ in length");
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = d[i] / bond * e.q[i];
        add_candidate(std::move(w));
    }

    PenaltyTable out{{}, alpha0.grid, alpha0.simplex_resolution, alpha0.exact};
    out.entries.reserve(candidates.size());
    for (auto& qt : candidates) {
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = bond / d[i] * qt[i];
        double alpha = kInf;
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (std::abs(total - 1.0) <= kTransformMatchTol) {
            for (const auto& e : alpha0.entries) {
                if (approx_equal(e.q.weights(), w, kTransformMatchTol)) {
                    alpha = e.alpha / bond;
                    break;
                }
            }
        }
        out.entries.push_back({std::move(qt), alpha});
    }
    return out;
}

}  // namespace subcash

#include "subcash/cash_additive.hpp"

#include <algorithm>
#include <cmath>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dim(std::size_t expected, const Position& x) {
    if (expected != x.size()) {
        throw ValidationError("risk measure on " + std::to_string(expected) +
                              " atoms applied to a position of length " + std::to_string(x.size()));
    }
}

double entropic_value(const Entropic& e, const Position& x) {
    require_dim(e.base.size(), x);
    // gamma * log sum Q_i exp(-x_i / gamma), shifted for stability.
    double shift = -kInf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (e.base[i] > 0.0) shift = std::max(shift, -x[i] / e.temperature);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (e.base[i] > 0.0) acc += e.base[i] * std::exp(-x[i] / e.temperature - shift);
    }
    return e.temperature * (shift + std::log(acc));
}

double relative_entropy(const ProbabilityWeights& q, const ProbabilityWeights& base) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        if (base[i] == 0.0) return kInf;
        acc += q[i] * std::log(q[i] / base[i]);
    }
    return std::max(acc, 0.0);
}

}  // namespace

RiskMeasureSpec RiskMeasureSpec::worst_case() { return RiskMeasureSpec(WorstCase{}); }

RiskMeasureSpec RiskMeasureSpec::linear(ProbabilityWeights base) {
    return RiskMeasureSpec(Linear{std::move(base)});
}

RiskMeasureSpec RiskMeasureSpec::entropic(ProbabilityWeights base, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ValidationError("entropic temperature must be positive and finite");
    }
    return RiskMeasureSpec(Entropic{std::move(base), temperature});
}

RiskMeasureSpec RiskMeasureSpec::robust(std::vector<RobustMember> members) {
    if (members.empty()) throw ValidationError("robust family needs at least one member");
    const std::size_t n = members.front().measure.size();
    for (const auto& m : members) {
        if (m.measure.size() != n) throw ValidationError("robust family members differ in length");
        if (!(m.penalty >= 0.0) || !std::isfinite(m.penalty)) {
            throw ValidationError("robust family penalties must be finite and nonnegative");
        }
    }
    return RiskMeasureSpec(RobustFamily{std::move(members)});
}

std::string RiskMeasureSpec::name() const {
    return std::visit(overloaded{
                          [](const WorstCase&) { return std::string("worst_case"); },
                          [](const Linear&) { return std::string("linear"); },
                          [](const Entropic&) { return std::string("entropic"); },
                          [](const RobustFamily&) { return std::string("robust"); },
                      },
                      kind_);
}

std::optional<std::size_t> RiskMeasureSpec::dimension() const {
    return std::visit(overloaded{
                          [](const WorstCase&) -> std::optional<std::size_t> { return std::nullopt; },
                          [](const Linear& l) -> std::optional<std::size_t> { return l.base.size(); },
                          [](const Entropic& e) -> std::optional<std::size_t> { return e.base.size(); },
                          [](const RobustFamily& r) -> std::optional<std::size_t> {
                              return r.members.front().measure.size();
                          },
                      },
                      kind_);
}

double evaluate_rho(const RiskMeasureSpec& spec, const Position& x) {
    return std::visit(overloaded{
                          [&](const WorstCase&) {
                              if (x.size() == 0) throw ValidationError("empty position");
                              double worst = -kInf;
                              for (double v : x) worst = std::max(worst, -v);
                              return worst;
                          },
                          [&](const Linear& l) {
                              require_dim(l.base.size(), x);
                              return -expectation(l.base, x);
                          },
                          [&](const Entropic& e) { return entropic_value(e, x); },
                          [&](const RobustFamily& r) {
                              double best = -kInf;
                              for (const auto& m : r.members) {
                                  require_dim(m.measure.size(), x);
                                  best = std::max(best, -expectation(m.measure, x) - m.penalty);
                              }
                              return best;
                          },
                      },
                      spec.kind());
}

double grid_penalty(const RiskMeasureSpec& spec, const ProbabilityWeights& q, const GridSpec& grid) {
    const std::size_t n = q.size();
    const std::size_t count = grid_cardinality(n, grid.resolution);
    auto objective = [&](std::size_t k) {
        Position x = grid_position(k, n, grid);
        return -expectation(q, x) - evaluate_rho(spec, x);
    };
    return parallel_maximize(count, objective).value;
}

PenaltyValue minimal_penalty(const RiskMeasureSpec& spec, const ProbabilityWeights& q,
                             const GridSpec& grid) {
    if (auto dim = spec.dimension(); dim && *dim != q.size()) {
        throw ValidationError("penalty evaluated at a measure of the wrong length");
    }
    return std::visit(
        overloaded{
            [](const WorstCase&) { return PenaltyValue{0.0, true}; },
            [&](const Linear& l) {
                bool same = approx_equal(l.base.weights(), q.weights(), kProbabilityTol);
                return PenaltyValue{same ? 0.0 : kInf, true};
            },
            [&](const Entropic& e) {
                return PenaltyValue{e.temperature * relative_entropy(q, e.base), true};
            },
            [&](const RobustFamily&) { return PenaltyValue{grid_penalty(spec, q, grid), false}; },
        },
        spec.kind());
}

PenaltyTable build_penalty_table(const RiskMeasureSpec& spec, std::size_t n, int simplex_resolution,
                                 const GridSpec& grid) {
    if (auto dim = spec.dimension(); dim && *dim != n) {
        throw ValidationError("penalty table dimension does not match the measure");
    }
    std::vector<ProbabilityWeights> candidates = simplex_grid(n, simplex_resolution);
    auto add_anchor = [&](const ProbabilityWeights& q) {
        for (const auto& c : candidates) {
            if (approx_equal(c.weights(), q.weights(), kProbabilityTol)) return;
        }
        candidates.push_back(q);
    };
    if (const auto* l = spec.get_if<Linear>()) add_anchor(l->base);
    if (const auto* e = spec.get_if<Entropic>()) add_anchor(e->base);
    if (const auto* r = spec.get_if<RobustFamily>()) {
        for (const auto& m : r->members) add_anchor(m.measure);
    }

    PenaltyTable table{{}, grid, simplex_resolution, true};
    table.entries.reserve(candidates.size());
    for (auto& q : candidates) {
        PenaltyValue p = minimal_penalty(spec, q, grid);
        table.exact = table.exact && p.exact;
        table.entries.push_back({std::move(q), p.value});
    }
    return table;
}

double lookup_penalty(const PenaltyTable& table, const ProbabilityWeights& q, double tol) {
    for (const auto& e : table.entries) {
        if (approx_equal(e.q.weights(), q.weights(), tol)) return e.alpha;
    }
    return kInf;
}

double dual_evaluate(const PenaltyTable& table, const Position& x) {
    if (table.entries.empty()) throw ValidationError("dual evaluation over an empty penalty table");
    double best = -kInf;
    for (const auto& e : table.entries) {
        if (e.alpha == kInf) continue;
        best = std::max(best, -expectation(e.q, x) - e.alpha);
    }
    return best;
}

CalibrationReport check_calibration(const RiskMeasureSpec& spec, const Position& w,
                                    const std::vector<double>& lambdas,
                                    const std::vector<Position>& probes, double tol) {
    CalibrationReport report;
    const double rho_w = evaluate_rho(spec, w);
    for (double lambda : lambdas) {
        double gap = std::abs(evaluate_rho(spec, lambda * w) - lambda * rho_w);
        report.max_gap = std::max(report.max_gap, gap);
        if (gap > tol && report.homogeneous) {
            report.homogeneous = false;
            report.failing_lambda = lambda;
        }
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
        double gap = std::abs(evaluate_rho(spec, probes[k] + w) - (evaluate_rho(spec, probes[k]) + rho_w));
        report.max_gap = std::max(report.max_gap, gap);
        if (gap > tol && report.invariant) {
            report.invariant = false;
            report.failing_probe = k;
        }
    }
    return report;
}

}  // namespace subcash

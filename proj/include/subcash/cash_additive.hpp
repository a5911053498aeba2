#pragma once

// Convex cash additive risk measures on a finite scenario space, their
// minimal penalties and the Fenchel dual evaluation.

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "subcash/scenario.hpp"

namespace subcash {

struct WorstCase {};

struct Linear {
    ProbabilityWeights base;
};

struct Entropic {
    ProbabilityWeights base;
    double temperature;
};

struct RobustMember {
    ProbabilityWeights measure;
    double penalty;
};

struct RobustFamily {
    std::vector<RobustMember> members;
};

class RiskMeasureSpec {
public:
    using Kind = std::variant<WorstCase, Linear, Entropic, RobustFamily>;

    static RiskMeasureSpec worst_case();
    static RiskMeasureSpec linear(ProbabilityWeights base);
    static RiskMeasureSpec entropic(ProbabilityWeights base, double temperature);
    static RiskMeasureSpec robust(std::vector<RobustMember> members);

    const Kind& kind() const noexcept { return kind_; }
    std::string name() const;
    /// Atom count the spec is tied to; nullopt for the worst case.
    std::optional<std::size_t> dimension() const;

    template <class T>
    const T* get_if() const noexcept {
        return std::get_if<T>(&kind_);
    }

private:
    explicit RiskMeasureSpec(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

/// rho(x) for the four shipped kinds.
double evaluate_rho(const RiskMeasureSpec& spec, const Position& x);

/// A penalty value together with whether it is exact or only a grid lower bound.
struct PenaltyValue {
    double value;
    bool exact;
};

/// alpha(q) = sup_X { E_q[-X] - rho(X) }. Closed form for the worst case,
/// linear and entropic kinds; grid supremum over `grid` otherwise.
PenaltyValue minimal_penalty(const RiskMeasureSpec& spec, const ProbabilityWeights& q,
                             const GridSpec& grid);

/// alpha(q) by brute force over position_grid; always a lower bound.
double grid_penalty(const RiskMeasureSpec& spec, const ProbabilityWeights& q, const GridSpec& grid);

struct PenaltyEntry {
    ProbabilityWeights q;
    double alpha;
};

struct PenaltyTable {
    std::vector<PenaltyEntry> entries;
    GridSpec grid;           // position grid used for non-closed-form entries
    int simplex_resolution;  // probability grid the entries were drawn from
    bool exact = true;
};

/// Minimal penalty on the simplex grid plus the spec's own anchor measures.
PenaltyTable build_penalty_table(const RiskMeasureSpec& spec, std::size_t n, int simplex_resolution,
                                 const GridSpec& grid);

/// Penalty of `q` in the table (max-norm tolerance `tol`), +inf if absent.
double lookup_penalty(const PenaltyTable& table, const ProbabilityWeights& q,
                      double tol = kProbabilityTol);

/// max over entries of E_q[-x] - alpha(q). Throws ValidationError on an empty table.
double dual_evaluate(const PenaltyTable& table, const Position& x);

struct CalibrationReport {
    bool homogeneous = true;  // rho(l w) == l rho(w) for every tested l
    bool invariant = true;    // rho(X + w) == rho(X) + rho(w) for every probe
    double max_gap = 0.0;
    std::optional<double> failing_lambda;
    std::optional<std::size_t> failing_probe;

    bool passed() const noexcept { return homogeneous && invariant; }
};

/// Sampled check that rho is linear along w and invariant under adding w.
CalibrationReport check_calibration(const RiskMeasureSpec& spec, const Position& w,
                                    const std::vector<double>& lambdas,
                                    const std::vector<Position>& probes, double tol = kClosedFormTol);

}  // namespace subcash

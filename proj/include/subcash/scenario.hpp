#pragma once

// Finite scenario spaces, positions, (sub-)probability weights and the grid
// enumerators used by the brute-force dual checks.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace subcash {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute tolerance for closed-form identities.
inline constexpr double kClosedFormTol = 1e-9;
/// Max-norm tolerance when comparing probability vectors.
inline constexpr double kProbabilityTol = 1e-12;

class ScenarioSpace {
public:
    explicit ScenarioSpace(std::vector<std::string> labels);
    /// Atoms labelled "w0", "w1", ...
    static ScenarioSpace anonymous(std::size_t n);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    /// Index of `label`, or size() when absent.
    std::size_t index_of(const std::string& label) const;

private:
    std::vector<std::string> labels_;
};

/// Payoff vector at the horizon, one finite entry per atom.
class Position {
public:
    Position() = default;
    explicit Position(Vector values);
    Position(std::initializer_list<double> values);
    static Position constant(std::size_t n, double c);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const Vector& values() const noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    double max_abs() const noexcept;

    Position& operator+=(const Position& rhs);
    Position& operator-=(const Position& rhs);
    Position& operator+=(double m);
    Position& operator-=(double m);
    Position& operator*=(double s);

    friend Position operator+(Position lhs, const Position& rhs) { return lhs += rhs; }
    friend Position operator-(Position lhs, const Position& rhs) { return lhs -= rhs; }
    friend Position operator+(Position lhs, double m) { return lhs += m; }
    friend Position operator-(Position lhs, double m) { return lhs -= m; }
    friend Position operator*(double s, Position x) { return x *= s; }
    friend Position operator-(Position x) { return x *= -1.0; }
    friend bool operator==(const Position&, const Position&) = default;

private:
    Vector values_;
};

/// A scalar-valued functional of positions (risk measures, reserves).
using Functional = std::function<double(const Position&)>;

/// Entrywise product.
Position hadamard(const Position& a, std::span<const double> b);
/// Entrywise quotient; callers guard against zero divisors.
Position divide(const Position& a, std::span<const double> b);

/// Nonnegative weights summing to one.
class ProbabilityWeights {
public:
    explicit ProbabilityWeights(Vector weights);
    ProbabilityWeights(std::initializer_list<double> weights);
    static ProbabilityWeights uniform(std::size_t n);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const Vector& weights() const noexcept { return weights_; }
    double mass() const noexcept { return 1.0; }

private:
    Vector weights_;
};

/// Nonnegative weights with total mass in [0, 1].
class SubProbability {
public:
    explicit SubProbability(Vector weights);
    SubProbability(std::initializer_list<double> weights);
    static SubProbability zero(std::size_t n);
    static SubProbability from(const ProbabilityWeights& q, double scale = 1.0);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const Vector& weights() const noexcept { return weights_; }
    double mass() const noexcept { return mass_; }

private:
    Vector weights_;
    double mass_ = 0.0;
};

/// sum_i w_i x_i; throws ValidationError on a length mismatch.
double expectation(std::span<const double> weights, const Position& x);
double expectation(const ProbabilityWeights& q, const Position& x);
double expectation(const SubProbability& mu, const Position& x);

bool approx_equal(std::span<const double> a, std::span<const double> b, double tol);

struct SignSplit {
    Position positive;
    Position negative;
};
/// x = positive - negative with both parts nonnegative and complementary.
SignSplit pos_neg_parts(const Position& x);

struct GridSpec {
    int resolution = 2;
    double bound = 1.0;

    GridSpec() = default;
    GridSpec(int resolution, double bound);
    double step() const noexcept { return 2.0 * bound / (resolution - 1); }
};

/// Largest grid the enumerators accept (resolution^n).
inline constexpr double kGridBudget = 1e7;

/// resolution^n, throwing CapacityError beyond the budget.
std::size_t grid_cardinality(std::size_t n, int resolution);
/// Base-`resolution` digits of `index`, least significant first.
void grid_digits(std::size_t index, int resolution, std::vector<int>& digits);

/// Entries in {0, 1/(res-1), ..., 1} with total mass <= 1.
std::vector<SubProbability> subprob_grid(std::size_t n, int resolution);
/// Entries in {0, 1/(res-1), ..., 1} summing to one.
std::vector<ProbabilityWeights> simplex_grid(std::size_t n, int resolution);
/// Entries in a uniform grid on [-bound, bound].
std::vector<Position> position_grid(std::size_t n, const GridSpec& grid);
/// The `index`-th point of position_grid(n, grid), without materializing the grid.
Position grid_position(std::size_t index, std::size_t n, const GridSpec& grid);

/// Worker count for grid sweeps; capped by SUBCASH_THREADS.
unsigned worker_count();

struct GridOptimum {
    double value;
    std::size_t index;
};

/// Max of f over [0, count); ties resolve to the lowest index so results do
/// not depend on the worker split. f must be reentrant.
GridOptimum parallel_maximize(std::size_t count, const std::function<double(std::size_t)>& f);
GridOptimum parallel_minimize(std::size_t count, const std::function<double(std::size_t)>& f);

}  // namespace subcash

#include "subcash/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <thread>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                              " vs " + std::to_string(b) + ")");
    }
}

void require_finite(const Vector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite entry");
    }
}

void require_nonnegative(const Vector& v, const char* what) {
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw ValidationError(std::string(what) + ": weights must be finite and nonnegative");
        }
    }
}

}  // namespace

ScenarioSpace::ScenarioSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw ValidationError("scenario space needs at least one atom");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw ValidationError("scenario labels must be distinct");
}

ScenarioSpace ScenarioSpace::anonymous(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
    return ScenarioSpace(std::move(labels));
}

std::size_t ScenarioSpace::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    return static_cast<std::size_t>(it - labels_.begin());
}

Position::Position(Vector values) : values_(std::move(values)) {
    require_finite(values_, "position");
}

Position::Position(std::initializer_list<double> values) : Position(Vector(values)) {}

Position Position::constant(std::size_t n, double c) { return Position(Vector(n, c)); }

double Position::max_abs() const noexcept {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

Position& Position::operator+=(const Position& rhs) {
    require_same_length(size(), rhs.size(), "position sum");
    for (std::size_t i = 0; i < size(); ++i) values_[i] += rhs.values_[i];
    return *this;
}

Position& Position::operator-=(const Position& rhs) {
    require_same_length(size(), rhs.size(), "position difference");
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= rhs.values_[i];
    return *this;
}

Position& Position::operator+=(double m) {
    for (double& x : values_) x += m;
    return *this;
}

Position& Position::operator-=(double m) {
    for (double& x : values_) x -= m;
    return *this;
}

Position& Position::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

Position hadamard(const Position& a, std::span<const double> b) {
    require_same_length(a.size(), b.size(), "entrywise product");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return Position(std::move(out));
}

Position divide(const Position& a, std::span<const double> b) {
    require_same_length(a.size(), b.size(), "entrywise quotient");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / b[i];
    return Position(std::move(out));
}

ProbabilityWeights::ProbabilityWeights(Vector weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw ValidationError("probability weights are empty");
    require_nonnegative(weights_, "probability");
    double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > kProbabilityTol) {
        throw ValidationError("probability weights sum to " + std::to_string(total) + ", not 1");
    }
}

ProbabilityWeights::ProbabilityWeights(std::initializer_list<double> weights)
    : ProbabilityWeights(Vector(weights)) {}

ProbabilityWeights ProbabilityWeights::uniform(std::size_t n) {
    return ProbabilityWeights(Vector(n, 1.0 / static_cast<double>(n)));
}

SubProbability::SubProbability(Vector weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw ValidationError("sub-probability weights are empty");
    require_nonnegative(weights_, "sub-probability");
    mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (mass_ > 1.0 + kProbabilityTol) {
        throw ValidationError("sub-probability mass " + std::to_string(mass_) + " exceeds 1");
    }
}

SubProbability::SubProbability(std::initializer_list<double> weights)
    : SubProbability(Vector(weights)) {}

SubProbability SubProbability::zero(std::size_t n) { return SubProbability(Vector(n, 0.0)); }

SubProbability SubProbability::from(const ProbabilityWeights& q, double scale) {
    Vector w = q.weights();
    for (double& x : w) x *= scale;
    return SubProbability(std::move(w));
}

double expectation(std::span<const double> weights, const Position& x) {
    require_same_length(weights.size(), x.size(), "expectation");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += weights[i] * x[i];
    return acc;
}

double expectation(const ProbabilityWeights& q, const Position& x) {
    return expectation(std::span<const double>(q.weights()), x);
}

double expectation(const SubProbability& mu, const Position& x) {
    return expectation(std::span<const double>(mu.weights()), x);
}

bool approx_equal(std::span<const double> a, std::span<const double> b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > tol) return false;
    }
    return true;
}

SignSplit pos_neg_parts(const Position& x) {
    Vector plus(x.size()), minus(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        plus[i] = std::max(x[i], 0.0);
        minus[i] = std::max(-x[i], 0.0);
    }
    return {Position(std::move(plus)), Position(std::move(minus))};
}

GridSpec::GridSpec(int res, double b) : resolution(res), bound(b) {
    if (resolution < 2) throw ValidationError("grid resolution must be at least 2");
    if (!(bound > 0.0) || !std::isfinite(bound)) throw ValidationError("grid bound must be positive");
}

std::size_t grid_cardinality(std::size_t n, int resolution) {
    if (resolution < 2) throw ValidationError("grid resolution must be at least 2");
    double count = std::pow(static_cast<double>(resolution), static_cast<double>(n));
    if (count > kGridBudget) {
        throw CapacityError("grid of " + std::to_string(resolution) + "^" + std::to_string(n) +
                            " points exceeds the enumeration budget");
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(resolution);
    return total;
}

void grid_digits(std::size_t index, int resolution, std::vector<int>& digits) {
    const auto base = static_cast<std::size_t>(resolution);
    for (int& d : digits) {
        d = static_cast<int>(index % base);
        index /= base;
    }
}

std::vector<SubProbability> subprob_grid(std::size_t n, int resolution) {
    const std::size_t count = grid_cardinality(n, resolution);
    const int top = resolution - 1;
    std::vector<SubProbability> out;
    std::vector<int> digits(n);
    for (std::size_t k = 0; k < count; ++k) {
        grid_digits(k, resolution, digits);
        if (std::accumulate(digits.begin(), digits.end(), 0) > top) continue;
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(digits[i]) / top;
        out.emplace_back(std::move(w));
    }
    return out;
}

std::vector<ProbabilityWeights> simplex_grid(std::size_t n, int resolution) {
    const std::size_t count = grid_cardinality(n, resolution);
    const int top = resolution - 1;
    std::vector<ProbabilityWeights> out;
    std::vector<int> digits(n);
    for (std::size_t k = 0; k < count; ++k) {
        grid_digits(k, resolution, digits);
        if (std::accumulate(digits.begin(), digits.end(), 0) != top) continue;
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(digits[i]) / top;
        out.emplace_back(std::move(w));
    }
    return out;
}

Position grid_position(std::size_t index, std::size_t n, const GridSpec& grid) {
    std::vector<int> digits(n);
    grid_digits(index, grid.resolution, digits);
    const double h = grid.step();
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) {
        // The last node is pinned to +bound so the grid is symmetric.
        v[i] = digits[i] == grid.resolution - 1 ? grid.bound : -grid.bound + h * digits[i];
    }
    return Position(std::move(v));
}

std::vector<Position> position_grid(std::size_t n, const GridSpec& grid) {
    const std::size_t count = grid_cardinality(n, grid.resolution);
    std::vector<Position> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(grid_position(k, n, grid));
    return out;
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SUBCASH_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) hw = std::min(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

namespace {

template <class Better>
GridOptimum parallel_best(std::size_t count, const std::function<double(std::size_t)>& f,
                          double init, Better better) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(count / 4096, 1)));
    auto sweep = [&](std::size_t lo, std::size_t hi) {
        GridOptimum best{init, count};
        for (std::size_t k = lo; k < hi; ++k) {
            double v = f(k);
            if (better(v, best.value)) best = {v, k};
        }
        return best;
    };
    if (workers <= 1) return sweep(0, count);

    std::vector<GridOptimum> partial(workers, GridOptimum{init, count});
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = std::min(count, w * chunk);
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&, w, lo, hi] { partial[w] = sweep(lo, hi); });
    }
    for (auto& t : pool) t.join();
    // Chunks are in index order, so strict comparison keeps the lowest index.
    GridOptimum best{init, count};
    for (const auto& p : partial) {
        if (better(p.value, best.value)) best = p;
    }
    return best;
}

}  // namespace

GridOptimum parallel_maximize(std::size_t count, const std::function<double(std::size_t)>& f) {
    return parallel_best(count, f, -kInf, [](double a, double b) { return a > b; });
}

GridOptimum parallel_minimize(std::size_t count, const std::function<double(std::size_t)>& f) {
    return parallel_best(count, f, kInf, [](double a, double b) { return a < b; });
}

}  // namespace subcash

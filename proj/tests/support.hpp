#pragma once

// Seeded random instances for property tests.

#include <algorithm>
#include <cstdint>
#include <random>

#include "subcash/scenario.hpp"
#include "subcash/subadditive.hpp"

namespace support {

class Random {
public:
    explicit Random(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

    subcash::Position position(std::size_t n, double bound) {
        subcash::Vector v(n);
        for (double& x : v) x = uniform(-bound, bound);
        return subcash::Position(std::move(v));
    }

    /// Strictly positive weights, normalized.
    subcash::ProbabilityWeights probability(std::size_t n) {
        subcash::Vector w(n);
        double total = 0.0;
        for (double& x : w) total += (x = std::exponential_distribution<double>(1.0)(gen_) + 1e-3);
        for (double& x : w) x /= total;
        // Absorb rounding into the last entry.
        double head = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) head += w[i];
        w.back() = 1.0 - head;
        return subcash::ProbabilityWeights(std::move(w));
    }

    /// Envelope with 0 <= low <= high <= 1 per atom.
    subcash::DiscountEnvelope envelope(std::size_t n) {
        subcash::Vector lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = uniform(0.0, 1.0), b = uniform(0.0, 1.0);
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
        }
        return {subcash::DiscountFactor(std::move(lo)), subcash::DiscountFactor(std::move(hi))};
    }

    /// Convex, nonincreasing, V(0) = 0, slopes in [-1, 0].
    subcash::PiecewiseConvex convex_piece() {
        const int kinks = integer(1, 4);
        subcash::Vector breaks(kinks), slopes(kinks + 1);
        for (double& b : breaks) b = uniform(-15.0, 15.0);
        std::sort(breaks.begin(), breaks.end());
        for (int k = 1; k < kinks; ++k) {
            if (breaks[k] <= breaks[k - 1]) breaks[k] = breaks[k - 1] + 0.5;
        }
        for (double& s : slopes) s = uniform(-1.0, 0.0);
        std::sort(slopes.begin(), slopes.end());
        return {std::move(breaks), std::move(slopes)};
    }

    subcash::ConvexDiscountFunction convex(std::size_t n) {
        std::vector<subcash::PiecewiseConvex> atoms;
        for (std::size_t i = 0; i < n; ++i) atoms.push_back(convex_piece());
        return subcash::ConvexDiscountFunction(std::move(atoms));
    }

    /// Sorted shifts in [lo, hi], both ends included.
    subcash::Vector sorted_grid(std::size_t k, double lo, double hi) {
        subcash::Vector g(k);
        g.front() = lo;
        g.back() = hi;
        for (std::size_t i = 1; i + 1 < k; ++i) g[i] = uniform(lo, hi);
        std::sort(g.begin(), g.end());
        return g;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace support

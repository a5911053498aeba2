#include "subcash/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace subcash {

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr int kMaxExpansions = 60;

Vector axpy(const Vector& x, double t, const Vector& dir) {
    Vector out(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * dir[i];
    return out;
}

std::vector<Vector> search_directions(std::size_t d, bool pairs) {
    std::vector<Vector> dirs;
    for (std::size_t i = 0; i < d; ++i) {
        Vector e(d, 0.0);
        e[i] = 1.0;
        dirs.push_back(std::move(e));
    }
    if (!pairs) return dirs;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            Vector plus(d, 0.0), minus(d, 0.0);
            plus[i] = plus[j] = 1.0;
            minus[i] = 1.0;
            minus[j] = -1.0;
            dirs.push_back(std::move(plus));
            dirs.push_back(std::move(minus));
        }
    }
    if (d > 2) dirs.emplace_back(d, 1.0);
    return dirs;
}

class LineSearch {
public:
    LineSearch(const std::function<double(const Vector&)>& f, const DescentConfig& config)
        : f_(f), config_(config) {}

    // Returns the step t and the objective at x + t dir; t = 0 when no descent.
    std::pair<double, double> run(const Vector& x, const Vector& dir, double f0, double width) const {
        auto phi = [&](double t) { return f_(axpy(x, t, dir)); };

        // Grow the bracket while an endpoint is still better than the interior.
        double lo = -width, hi = width;
        double f_lo = phi(lo), f_hi = phi(hi);
        for (int side = 0; side < 2; ++side) {
            double& edge = side == 0 ? hi : lo;
            double& f_edge = side == 0 ? f_hi : f_lo;
            const double sign = side == 0 ? 1.0 : -1.0;
            if (f_edge >= f0) continue;
            double prev_t = 0.0, prev_f = f0;
            double first_slope = (prev_f - f_edge) / std::abs(edge);
            for (int k = 0; k < kMaxExpansions; ++k) {
                const double t = 2.0 * edge;
                const double ft = phi(t);
                if (!(ft < f_edge)) {
                    // Minimum lies in [prev_t, t].
                    if (side == 0) {
                        lo = prev_t;
                        f_lo = prev_f;
                    } else {
                        hi = prev_t;
                        f_hi = prev_f;
                    }
                    edge = t;
                    f_edge = ft;
                    break;
                }
                const double slope = (f_edge - ft) / std::abs(t - edge);
                if (k + 1 >= config_.unbounded_doublings && slope >= first_slope * (1.0 - 1e-9)) {
                    std::ostringstream msg;
                    msg << "objective decreases without bound along a ray (value " << ft << " at step "
                        << sign * std::abs(t) << ")";
                    throw UnboundedError(msg.str());
                }
                prev_t = edge;
                prev_f = f_edge;
                edge = t;
                f_edge = ft;
                if (k + 1 == kMaxExpansions) throw UnboundedError("line search bracket failed to close");
            }
        }

        // Golden-section search on [lo, hi].
        const double tol = std::max(config_.line_tol * width, 1e-300);
        double a = lo, b = hi;
        double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
        double fc = phi(c), fd = phi(d);
        while (b - a > tol) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - kGolden * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + kGolden * (b - a);
                fd = phi(d);
            }
        }
        double best_t = 0.0, best_f = f0;
        for (auto [t, ft] : {std::pair{c, fc}, std::pair{d, fd}, std::pair{lo, f_lo}, std::pair{hi, f_hi}}) {
            if (ft < best_f) {
                best_t = t;
                best_f = ft;
            }
        }
        return {best_t, best_f};
    }

private:
    const std::function<double(const Vector&)>& f_;
    const DescentConfig& config_;
};

}  // namespace

double indifference_price(const Functional& reserve_b, const Position& exposure_b, const Position& h) {
    return reserve_b(exposure_b) - reserve_b(exposure_b + h);
}

Minimum minimize_convex(const std::function<double(const Vector&)>& objective, std::vector<Vector> starts,
                        double box, const DescentConfig& config) {
    if (starts.empty()) throw ValidationError("minimizer needs at least one start");
    const std::size_t d = starts.front().size();
    const std::vector<Vector> dirs = search_directions(d, config.pair_directions);
    const LineSearch line(objective, config);

    std::optional<Minimum> best;
    for (Vector& x : starts) {
        double fx = objective(x);
        int sweep = 0;
        bool converged = false;
        for (; sweep < config.max_sweeps; ++sweep) {
            const double before = fx;
            for (const Vector& dir : dirs) {
                auto [t, ft] = line.run(x, dir, fx, box);
                // Rounding noise along flat directions must not move the iterate.
                if (t != 0.0 && ft < fx - 1e-14 * std::max(1.0, std::abs(fx))) {
                    x = axpy(x, t, dir);
                    fx = ft;
                }
            }
            if (before - fx <= config.value_tol * std::max(1.0, std::abs(fx))) {
                converged = true;
                ++sweep;
                break;
            }
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "coordinate descent did not converge in " << config.max_sweeps << " sweeps (best value " << fx
                << ")";
            throw NumericError(msg.str());
        }
        if (!best || fx < best->value) best = Minimum{fx, x, false, sweep};
    }

    // A direction along which the objective does not move marks a non-unique minimizer.
    const double probe = 1e-3 * box;
    const double flat_tol = 1e-10 * std::max(1.0, std::abs(best->value));
    for (const Vector& dir : dirs) {
        const double up = objective(axpy(best->argmin, probe, dir));
        const double down = objective(axpy(best->argmin, -probe, dir));
        if (std::abs(up - best->value) <= flat_tol || std::abs(down - best->value) <= flat_tol) {
            best->non_unique = true;
            break;
        }
    }
    return *best;
}

InfConvolution inf_convolution(const Functional& reserve_a, const Functional& reserve_b, const Position& psi,
                               const DescentConfig& config, const std::optional<Position>& extra_start) {
    const std::size_t n = psi.size();
    const double box = config.box > 0.0 ? config.box : 4.0 * std::max(psi.max_abs(), 1.0);
    auto objective = [&](const Vector& f) {
        Position pf(f);
        return reserve_a(psi - pf) + reserve_b(pf);
    };
    std::vector<Vector> starts{Vector(n, 0.0), (0.5 * psi).values()};
    if (extra_start) {
        if (extra_start->size() != n) throw ValidationError("start point has the wrong length");
        starts.push_back(extra_start->values());
    }
    Minimum m = minimize_convex(objective, std::move(starts), box, config);
    InfConvolution out{m.value, Position(m.argmin), m.non_unique, m.sweeps, std::nullopt, 0.0};

    if (config.grid_resolution > 0) {
        if (n > 3) throw CapacityError("grid certificate is limited to three atoms");
        const GridSpec grid(config.grid_resolution, config.grid_bound > 0.0 ? config.grid_bound : box);
        const std::size_t count = grid_cardinality(n, grid.resolution);
        const GridOptimum g = parallel_minimize(count, [&](std::size_t k) {
            return objective(grid_position(k, n, grid).values());
        });
        out.grid_value = g.value;
        // The objective is 2-Lipschitz in the sup norm; grid points are h/2 apart at worst.
        out.grid_mesh = grid.step();
    }
    return out;
}

TransferSolution solve_transfer(const TransferProblem& problem, const DescentConfig& config) {
    if (problem.exposure_a.size() != problem.exposure_b.size()) {
        throw ValidationError("exposures differ in length");
    }
    const Position psi = problem.exposure_a + problem.exposure_b;
    InfConvolution conv = inf_convolution(problem.reserve_a, problem.reserve_b, psi, config, problem.exposure_b);
    TransferSolution out{conv.minimizer - problem.exposure_b, 0.0, conv.value,
                         problem.reserve_a(problem.exposure_a) + problem.reserve_b(problem.exposure_b),
                         std::move(conv)};
    out.price = indifference_price(problem.reserve_b, problem.exposure_b, out.contract);
    return out;
}

PenaltySumReport penalty_sum_check(const std::function<double(const SubProbability&)>& alpha_a,
                                   const std::function<double(const SubProbability&)>& alpha_b,
                                   const Functional& conv_value, const std::vector<SubProbability>& mu_grid,
                                   const GridSpec& positions, double tol) {
    PenaltySumReport report;
    report.mesh_bound = positions.step();
    if (mu_grid.empty()) throw ValidationError("penalty sum check needs a non-empty mu-grid");
    const std::size_t n = mu_grid.front().size();
    try {
        const double at_zero = conv_value(Position::constant(n, 0.0));
        if (!std::isfinite(at_zero)) throw UnboundedError("non-finite value at zero");
    } catch (const UnboundedError& e) {
        report.precondition_ok = false;
        report.precondition_note = std::string("inf-convolution is unbounded below at 0: ") + e.what();
        return report;
    }

    const std::vector<Position> grid = position_grid(n, positions);
    std::vector<double> conv_at(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) conv_at[k] = conv_value(grid[k]);

    for (const auto& mu : mu_grid) {
        const double sum = alpha_a(mu) + alpha_b(mu);
        if (sum == kInf) {
            ++report.infinite_entries;
            continue;
        }
        ++report.finite_entries;
        double brute = -kInf;
        for (std::size_t k = 0; k < grid.size(); ++k) brute = std::max(brute, -expectation(mu, grid[k]) - conv_at[k]);
        report.max_gap = std::max(report.max_gap, std::abs(brute - sum));
    }
    report.passed = report.finite_entries > 0 && report.max_gap <= tol;
    return report;
}

HatEquivalenceReport hat_equivalence_check(const Functional& reserve_a, const Functional& reserve_b,
                                           const Position& psi, const DescentConfig& config, double tol) {
    const std::size_t n = psi.size();
    const double box = config.box > 0.0 ? config.box : 4.0 * std::max(psi.max_abs(), 1.0);
    const InfConvolution direct = inf_convolution(reserve_a, reserve_b, psi, config);

    // v = (F, x): rho_hat_A((Psi - F, -x)) + rho_hat_B((F, x)).
    auto objective = [&](const Vector& v) {
        Position f(Vector(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)));
        const double x = v[n];
        return extend_to_hat(reserve_a, {psi - f, -x}) + extend_to_hat(reserve_b, {f, x});
    };
    Vector half = (0.5 * psi).values();
    half.push_back(0.0);
    const Minimum extended = minimize_convex(objective, {Vector(n + 1, 0.0), half}, box, config);

    HatEquivalenceReport report{direct.value, extended.value, std::abs(direct.value - extended.value), false};
    report.passed = report.gap <= tol;
    return report;
}

}  // namespace subcash

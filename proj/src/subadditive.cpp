#include "subcash/subadditive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

constexpr double kSlopeTol = 1e-12;

void require_dim(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw ValidationError(std::string(what) + ": expected " + std::to_string(expected) + " atoms, got " +
                              std::to_string(got));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Envelopes

DiscountEnvelope::DiscountEnvelope(DiscountFactor low, DiscountFactor high)
    : low_(std::move(low)), high_(std::move(high)) {
    require_dim(low_.size(), high_.size(), "discount envelope");
    for (std::size_t i = 0; i < low_.size(); ++i) {
        if (low_[i] > high_[i]) throw ValidationError("discount envelope has low > high");
    }
}

DiscountEnvelope DiscountEnvelope::constant(std::size_t n, double low, double high) {
    return DiscountEnvelope(DiscountFactor::constant(n, low), DiscountFactor::constant(n, high));
}

bool DiscountEnvelope::contains(std::span<const double> d, double tol) const {
    if (d.size() != size()) return false;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < low_[i] - tol || d[i] > high_[i] + tol) return false;
    }
    return true;
}

DiscountFactor worst_discount(const DiscountEnvelope& env, const Position& x) {
    require_dim(env.size(), x.size(), "worst discount");
    Vector d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] >= 0.0 ? env.low()[i] : env.high()[i];
    return DiscountFactor(std::move(d));
}

double ambiguous_discount_reserve(const RiskMeasureSpec& rho0, const DiscountEnvelope& env, const Position& x) {
    require_dim(env.size(), x.size(), "ambiguous discount reserve");
    const auto [plus, minus] = pos_neg_parts(x);
    return evaluate_rho(rho0, hadamard(plus, env.low().span()) - hadamard(minus, env.high().span()));
}

Functional envelope_reserve(RiskMeasureSpec rho0, DiscountEnvelope env) {
    return [rho0 = std::move(rho0), env = std::move(env)](const Position& x) {
        return ambiguous_discount_reserve(rho0, env, x);
    };
}

double put_premium(const ProbabilityWeights& p, double gross_rate, const Position& x, double strike) {
    if (!(gross_rate >= 1.0) || !std::isfinite(gross_rate)) {
        throw ValidationError("gross rate must be finite and at least 1");
    }
    require_dim(p.size(), x.size(), "put premium");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += p[i] * std::max(strike - x[i], 0.0);
    return acc / gross_rate;
}

// ---------------------------------------------------------------------------
// Convex discount functions

PiecewiseConvex::PiecewiseConvex(Vector breakpoints, Vector slopes)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
    if (slopes_.size() != breakpoints_.size() + 1) {
        throw ValidationError("piecewise convex function needs one more slope than breakpoints");
    }
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
        if (!std::isfinite(breakpoints_[k])) throw ValidationError("breakpoints must be finite");
        if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1])) {
            throw ValidationError("breakpoints must be strictly increasing");
        }
    }
    for (std::size_t k = 0; k < slopes_.size(); ++k) {
        if (!(slopes_[k] >= -1.0 && slopes_[k] <= 0.0)) throw ValidationError("slopes must lie in [-1, 0]");
        if (k > 0 && slopes_[k] < slopes_[k - 1]) throw ValidationError("slopes must be nondecreasing");
    }
    // Integrate the slope from the anchor V(0) = 0 out to each breakpoint.
    knot_values_.resize(breakpoints_.size());
    const std::size_t zero_seg =
        static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), 0.0) - breakpoints_.begin());
    double value = 0.0, at = 0.0;
    for (std::size_t k = zero_seg; k < breakpoints_.size(); ++k) {
        value += slopes_[k] * (breakpoints_[k] - at);
        at = breakpoints_[k];
        knot_values_[k] = value;
    }
    value = 0.0;
    at = 0.0;
    for (std::size_t k = zero_seg; k-- > 0;) {
        value += slopes_[k + 1] * (breakpoints_[k] - at);
        at = breakpoints_[k];
        knot_values_[k] = value;
    }
}

PiecewiseConvex PiecewiseConvex::envelope(double low, double high) {
    return PiecewiseConvex({0.0}, {-high, -low});
}

PiecewiseConvex PiecewiseConvex::linear(double slope) { return PiecewiseConvex({}, {slope}); }

double PiecewiseConvex::operator()(double x) const {
    if (breakpoints_.empty()) return slopes_.front() * x;
    const std::size_t seg =
        static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
    if (seg == 0) return knot_values_.front() + slopes_.front() * (x - breakpoints_.front());
    return knot_values_[seg - 1] + slopes_[seg] * (x - breakpoints_[seg - 1]);
}

double PiecewiseConvex::conjugate(double y) const {
    if (y < min_slope() - kSlopeTol || y > max_slope() + kSlopeTol) return kInf;
    double best = 0.0;  // x = 0
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
        best = std::max(best, breakpoints_[k] * y - knot_values_[k]);
    }
    return best;
}

double PiecewiseConvex::breakpoint_radius() const noexcept {
    double r = 0.0;
    for (double b : breakpoints_) r = std::max(r, std::abs(b));
    return r;
}

ConvexDiscountFunction::ConvexDiscountFunction(std::vector<PiecewiseConvex> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("convex discount function needs at least one atom");
}

ConvexDiscountFunction ConvexDiscountFunction::uniform(std::size_t n, const PiecewiseConvex& f) {
    return ConvexDiscountFunction(std::vector<PiecewiseConvex>(n, f));
}

ConvexDiscountFunction ConvexDiscountFunction::from_envelope(const DiscountEnvelope& env) {
    std::vector<PiecewiseConvex> atoms;
    atoms.reserve(env.size());
    for (std::size_t i = 0; i < env.size(); ++i) {
        atoms.push_back(PiecewiseConvex::envelope(env.low()[i], env.high()[i]));
    }
    return ConvexDiscountFunction(std::move(atoms));
}

Position ConvexDiscountFunction::apply(const Position& x) const {
    require_dim(size(), x.size(), "convex discount function");
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = atoms_[i](x[i]);
    return Position(std::move(out));
}

std::vector<ConjugateSample> fenchel_of_V(const ConvexDiscountFunction& v, std::size_t atom, const Vector& y_grid) {
    if (atom >= v.size()) throw ValidationError("atom index out of range");
    std::vector<ConjugateSample> out;
    out.reserve(y_grid.size());
    for (double y : y_grid) out.push_back({y, v[atom].conjugate(y)});
    return out;
}

double compose_with_convex(const RiskMeasureSpec& rho0, const ConvexDiscountFunction& v, const Position& x) {
    return evaluate_rho(rho0, -v.apply(x));
}

Functional convex_reserve(RiskMeasureSpec rho0, ConvexDiscountFunction v) {
    return [rho0 = std::move(rho0), v = std::move(v)](const Position& x) { return compose_with_convex(rho0, v, x); };
}

GridValue compose_representation(const RiskMeasureSpec& rho0, const ConvexDiscountFunction& v, const Position& x,
                                  int d_resolution) {
    const std::size_t n = x.size();
    require_dim(v.size(), n, "composition representation");
    if (d_resolution < 2) throw ValidationError("discount grid resolution must be at least 2");

    // Per-atom candidates: the uniform grid plus the kinks of beta_T(-D).
    std::vector<Vector> candidates(n);
    double radius = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vector& c = candidates[i];
        for (int k = 0; k < d_resolution; ++k) c.push_back(static_cast<double>(k) / (d_resolution - 1));
        for (double s : v[i].slopes()) c.push_back(-s);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        radius = std::max(radius, v[i].breakpoint_radius());
    }
    double total = 1.0;
    for (const auto& c : candidates) total *= static_cast<double>(c.size());
    if (total > kGridBudget) throw CapacityError("discount grid exceeds the enumeration budget");

    auto objective = [&](std::size_t index) {
        Vector z(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t radix = candidates[i].size();
            const double d = candidates[i][index % radix];
            index /= radix;
            const double beta = v[i].conjugate(-d);
            // An infinite penalty pushes rho0 down; such points never attain the sup.
            if (beta == kInf) return -kInf;
            z[i] = d * x[i] + beta;
        }
        return evaluate_rho(rho0, Position(std::move(z)));
    };
    const double h = 1.0 / (d_resolution - 1);
    const GridOptimum best = parallel_maximize(static_cast<std::size_t>(total), objective);
    return {best.value, h * (x.max_abs() + radius)};
}

// ---------------------------------------------------------------------------
// Axiom checks

SubadditivityReport check_cash_subadditive(const Functional& reserve, const Position& x, const Vector& m_grid,
                                           double tol) {
    if (!std::is_sorted(m_grid.begin(), m_grid.end())) throw ValidationError("m-grid must be sorted");
    SubadditivityReport report;
    const double base = reserve(x);
    double prev = -kInf;
    for (double m : m_grid) {
        const double shifted = reserve(x + m) + m;
        if (prev != -kInf) {
            const double drop = prev - shifted;
            if (drop > tol) {
                report.max_violation = std::max(report.max_violation, drop);
                if (report.monotone) report.witness = m;
                report.monotone = false;
            }
        }
        prev = shifted;

        const double a = std::abs(m);
        const double up = (base - a) - reserve(x + a);
        const double down = reserve(x - a) - (base + a);
        const double worst = std::max(up, down);
        if (worst > tol) {
            report.max_violation = std::max(report.max_violation, worst);
            if (report.inequalities && !report.witness) report.witness = m;
            report.inequalities = false;
        }
    }
    return report;
}

double convexity_violation(const Functional& reserve, const Position& x, const Position& y, const Vector& lambdas) {
    const double rx = reserve(x), ry = reserve(y);
    double worst = 0.0;
    for (double l : lambdas) {
        const double mixed = reserve(l * x + (1.0 - l) * y);
        worst = std::max(worst, mixed - (l * rx + (1.0 - l) * ry));
    }
    return worst;
}

double monotonicity_violation(const Functional& reserve, const Position& lo, const Position& hi) {
    require_dim(lo.size(), hi.size(), "monotonicity check");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) throw ValidationError("monotonicity check needs lo <= hi entrywise");
    }
    return std::max(0.0, reserve(hi) - reserve(lo));
}

double extend_to_hat(const Functional& reserve, const ExtendedPosition& xhat) {
    return reserve(xhat.survival - xhat.default_leg) - xhat.default_leg;
}

// ---------------------------------------------------------------------------
// Sub-probability duality

double grid_penalty_subprob(const Functional& reserve, const SubProbability& mu, const GridSpec& grid) {
    const std::size_t n = mu.size();
    const std::size_t count = grid_cardinality(n, grid.resolution);
    return parallel_maximize(count,
                             [&](std::size_t k) {
                                 Position x = grid_position(k, n, grid);
                                 return -expectation(mu, x) - reserve(x);
                             })
        .value;
}

namespace {

double envelope_linear_penalty(const DiscountEnvelope& env, const ProbabilityWeights& p, const SubProbability& mu) {
    require_dim(env.size(), mu.size(), "sub-probability penalty");
    require_dim(p.size(), mu.size(), "sub-probability penalty");
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double lo = env.low()[i] * p[i];
        const double hi = env.high()[i] * p[i];
        if (mu[i] < lo - kProbabilityTol || mu[i] > hi + kProbabilityTol) return kInf;
    }
    return 0.0;
}

}  // namespace

PenaltyValue minimal_penalty_subprob(const RiskMeasureSpec& rho0, const DiscountEnvelope& env,
                                     const SubProbability& mu, const GridSpec& grid) {
    if (const auto* lin = rho0.get_if<Linear>()) return {envelope_linear_penalty(env, lin->base, mu), true};
    return {grid_penalty_subprob(envelope_reserve(rho0, env), mu, grid), false};
}

PenaltyValue minimal_penalty_subprob(const Functional& reserve, const SubProbability& mu, const GridSpec& grid) {
    return {grid_penalty_subprob(reserve, mu, grid), false};
}

SubPenaltyTable envelope_penalty_table(const DiscountEnvelope& env, const ProbabilityWeights& p, int resolution) {
    SubPenaltyTable table;
    for (auto& mu : subprob_grid(env.size(), resolution)) {
        const double alpha = envelope_linear_penalty(env, p, mu);
        table.entries.push_back({std::move(mu), alpha});
    }
    return table;
}

SubPenaltyTable envelope_vertex_table(const DiscountEnvelope& env, const ProbabilityWeights& p) {
    const std::size_t n = env.size();
    require_dim(n, p.size(), "envelope vertex table");
    if (n >= 24) throw CapacityError("too many atoms for vertex enumeration");
    SubPenaltyTable table;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = ((mask >> i) & 1U ? env.high()[i] : env.low()[i]) * p[i];
        }
        table.entries.push_back({SubProbability(std::move(w)), 0.0});
    }
    return table;
}

SubPenaltyTable grid_penalty_table(const Functional& reserve, std::size_t n, int resolution, const GridSpec& grid) {
    SubPenaltyTable table;
    table.exact = false;
    for (auto& mu : subprob_grid(n, resolution)) {
        const double alpha = grid_penalty_subprob(reserve, mu, grid);
        table.entries.push_back({std::move(mu), alpha});
    }
    return table;
}

double lookup_subprob_penalty(const SubPenaltyTable& table, const SubProbability& mu, double tol) {
    for (const auto& e : table.entries) {
        if (approx_equal(e.mu.weights(), mu.weights(), tol)) return e.alpha;
    }
    return kInf;
}

double dual_evaluate_subprob(const SubPenaltyTable& table, const Position& x) {
    if (table.entries.empty()) throw ValidationError("dual evaluation over an empty penalty table");
    double best = -kInf;
    for (const auto& e : table.entries) {
        if (e.alpha == kInf) continue;
        best = std::max(best, -expectation(e.mu, x) - e.alpha);
    }
    return best;
}

NormalizedDual normalized_dual(const SubPenaltyTable& table, const Position& x) {
    if (table.entries.empty()) throw ValidationError("dual evaluation over an empty penalty table");
    const double value = dual_evaluate_subprob(table, x);
    const std::size_t n = table.entries.front().mu.size();
    NormalizedDual out{value, 0.0, ProbabilityWeights::uniform(n), {}};
    bool first = true;
    for (const auto& e : table.entries) {
        if (e.alpha == kInf) continue;
        const double v = -expectation(e.mu, x) - e.alpha;
        if (std::abs(v - value) > kProbabilityTol) continue;
        out.argmax_masses.push_back(e.mu.mass());
        if (first) {
            first = false;
            out.mass = e.mu.mass();
            if (out.mass > 0.0) {
                Vector q = e.mu.weights();
                for (double& w : q) w /= out.mass;
                const double total = std::accumulate(q.begin(), q.end(), 0.0);
                for (double& w : q) w /= total;
                out.measure = ProbabilityWeights(std::move(q));
            }
        }
    }
    std::sort(out.argmax_masses.begin(), out.argmax_masses.end());
    out.argmax_masses.erase(std::unique(out.argmax_masses.begin(), out.argmax_masses.end()),
                            out.argmax_masses.end());
    return out;
}

namespace {

void require_c_grid(const Vector& c_grid) {
    if (c_grid.empty()) throw ValidationError("c-grid is empty");
    for (double c : c_grid) {
        if (!(c > 0.0 && c <= 1.0)) throw ValidationError("c-grid values must lie in (0, 1]");
    }
}

}  // namespace

WorstForward worst_discounted_forward(const ForwardFamily& family, const Position& x, const Vector& c_grid,
                                      double mesh_bound) {
    require_c_grid(c_grid);
    WorstForward out{-kInf, c_grid.front(), mesh_bound};
    for (double c : c_grid) {
        const double rho = family(c, x);
        if (rho == -kInf) continue;
        if (c * rho > out.value) {
            out.value = c * rho;
            out.best_c = c;
        }
    }
    return out;
}

WorstForward worst_discounted_forward(const SubPenaltyTable& table, const Position& x, const Vector& c_grid) {
    require_c_grid(c_grid);
    Vector sorted = c_grid;
    std::sort(sorted.begin(), sorted.end());
    auto nearest = [&](double m) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), m);
        if (it == sorted.end()) return sorted.back();
        if (it == sorted.begin()) return *it;
        return (*it - m) < (m - *std::prev(it)) ? *it : *std::prev(it);
    };
    // rho_{T,c}(-X) = sup over entries binned at c of (mu(-X) - alpha) / m.
    std::vector<double> family(sorted.size(), -kInf);
    double bound = 0.0;
    for (const auto& e : table.entries) {
        const double m = e.mu.mass();
        if (e.alpha == kInf || m <= 0.0) continue;
        const double c = nearest(m);
        const std::size_t slot = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
        const double inner = -expectation(e.mu, x) - e.alpha;
        family[slot] = std::max(family[slot], inner / m);
        bound = std::max(bound, std::abs(c / m - 1.0) * std::abs(inner));
    }
    return worst_discounted_forward(
        [&](double c, const Position&) {
            const std::size_t slot =
                static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
            return family[slot];
        },
        x, sorted, bound);
}

ForwardFamily envelope_forward_family(DiscountEnvelope env, ProbabilityWeights p) {
    require_dim(env.size(), p.size(), "envelope forward family");
    return [env = std::move(env), p = std::move(p)](double c, const Position& x) {
        require_dim(env.size(), x.size(), "envelope forward family");
        const std::size_t n = x.size();
        Vector lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = env.low()[i] * p[i];
            hi[i] = env.high()[i] * p[i];
        }
        const double lo_mass = std::accumulate(lo.begin(), lo.end(), 0.0);
        const double hi_mass = std::accumulate(hi.begin(), hi.end(), 0.0);
        if (c < lo_mass - kProbabilityTol || c > hi_mass + kProbabilityTol) return -kInf;

        // max mu(-X) over lo <= mu <= hi, sum mu = c: fill the largest losses first.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
        Vector mu = lo;
        double remaining = std::max(0.0, c - lo_mass);
        for (std::size_t i : order) {
            const double add = std::min(remaining, hi[i] - lo[i]);
            mu[i] += add;
            remaining -= add;
        }
        return -expectation(std::span<const double>(mu), x) / c;
    };
}

double envelope_forward_mesh_bound(const DiscountEnvelope& env, const ProbabilityWeights& p, const Position& x,
                                   const Vector& c_grid) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        a += env.low()[i] * p[i];
        b += env.high()[i] * p[i];
    }
    b = std::min(b, 1.0);
    Vector inside;
    for (double c : c_grid) {
        if (c >= a - kProbabilityTol && c <= b + kProbabilityTol) inside.push_back(c);
    }
    if (inside.empty()) return kInf;
    std::sort(inside.begin(), inside.end());
    double gap = std::max(inside.front() - a, b - inside.back());
    for (std::size_t k = 1; k < inside.size(); ++k) gap = std::max(gap, 0.5 * (inside[k] - inside[k - 1]));
    return std::max(gap, 0.0) * x.max_abs();
}

}  // namespace subcash

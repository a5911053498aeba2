#include "subcash/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_path(const Vector& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string(what) + " path is empty");
    for (double v : path) {
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + " path has a non-finite entry");
    }
}

double fixed_point(const GeneratorSpec& g, int step, double mean, double z, double dt, int& iterations) {
    double y = mean;
    for (int it = 1; it <= kFixedPointMaxIter; ++it) {
        const double next = mean + g(step, y, z) * dt;
        if (!std::isfinite(next)) throw NumericError("generator produced a non-finite value");
        if (std::abs(next - y) <= kFixedPointTol * std::max(1.0, std::abs(next))) {
            iterations = std::max(iterations, it);
            return next;
        }
        y = next;
    }
    std::ostringstream msg;
    msg << "fixed point did not converge at step " << step << " within " << kFixedPointMaxIter << " iterations";
    throw NumericError(msg.str());
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

}  // namespace

double Lattice::node_probability(int layer, int node) const {
    if (layer < 0 || layer > steps || node < 0 || node > layer) throw ValidationError("node outside the lattice");
    const double log_p = std::lgamma(layer + 1.0) - std::lgamma(node + 1.0) - std::lgamma(layer - node + 1.0) -
                         layer * std::log(2.0);
    return std::exp(log_p);
}

Lattice build_lattice(int steps, double horizon) {
    if (steps < 1) throw ValidationError("lattice needs at least one step");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be positive");
    const double dt = horizon / steps;
    return Lattice{steps, horizon, dt, std::sqrt(dt)};
}

double rate_at(const Vector& path, int step) {
    return path.size() == 1 ? path.front() : path.at(static_cast<std::size_t>(step));
}

GeneratorSpec ambiguous_rate_generator(Vector low, Vector high) {
    check_path(low, "low rate");
    check_path(high, "high rate");
    if (low.size() != high.size() && low.size() != 1 && high.size() != 1) {
        throw ValidationError("rate paths differ in length");
    }
    const std::size_t len = std::max(low.size(), high.size());
    double c = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double r = low.size() == 1 ? low[0] : low[i];
        const double R = high.size() == 1 ? high[0] : high[i];
        if (r < 0.0 || r > R) throw ValidationError("rates must satisfy 0 <= r <= R at every step");
        c = std::max(c, R);
    }
    return GeneratorSpec(AmbiguousRate{std::move(low), std::move(high)}, c, 0.0);
}

GeneratorSpec GeneratorSpec::linear(Vector beta) {
    check_path(beta, "beta");
    double c = 0.0;
    for (double b : beta) {
        if (b < 0.0) throw ValidationError("linear rate must be nonnegative");
        c = std::max(c, b);
    }
    return GeneratorSpec(LinearRate{std::move(beta)}, c, 0.0);
}

GeneratorSpec GeneratorSpec::custom(GeneratorFn g, double lipschitz_y, double growth_z, bool convex_decreasing) {
    if (!g) throw ValidationError("custom generator is empty");
    if (!(lipschitz_y >= 0.0) || !(growth_z >= 0.0)) throw ValidationError("growth constants must be nonnegative");
    return GeneratorSpec(CustomGenerator{std::move(g), convex_decreasing}, lipschitz_y, growth_z);
}

double GeneratorSpec::operator()(int step, double y, double z) const {
    return std::visit(overloaded{
                          [&](const AmbiguousRate& a) {
                              const double r = rate_at(a.low, step), R = rate_at(a.high, step);
                              return y <= 0.0 ? -R * y : -r * y;
                          },
                          [&](const LinearRate& lin) { return -rate_at(lin.beta, step) * y; },
                          [&](const CustomGenerator& c) { return c.g(step, y, z); },
                      },
                      kind_);
}

std::string GeneratorSpec::name() const {
    return std::visit(overloaded{
                          [](const AmbiguousRate&) { return std::string("ambiguous-rate"); },
                          [](const LinearRate&) { return std::string("linear-rate"); },
                          [](const CustomGenerator&) { return std::string("custom"); },
                      },
                      kind_);
}

void GeneratorSpec::check_steps(int steps) const {
    auto ok = [steps](const Vector& p) { return p.size() == 1 || p.size() == static_cast<std::size_t>(steps); };
    const bool fine = std::visit(overloaded{
                                     [&](const AmbiguousRate& a) { return ok(a.low) && ok(a.high); },
                                     [&](const LinearRate& lin) { return ok(lin.beta); },
                                     [](const CustomGenerator&) { return true; },
                                 },
                                 kind_);
    if (!fine) throw ValidationError("rate path length must be 1 or the number of steps");
}

BsdeSolution solve_between(const Lattice& l, const GeneratorSpec& g, const Vector& values, int from, int to) {
    if (from < 0 || from > l.steps || to < 0 || to > from) throw ValidationError("invalid layer range");
    if (values.size() != static_cast<std::size_t>(from) + 1) {
        throw ValidationError("layer values must have one entry per node");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("terminal values must be finite");
    }
    g.check_steps(l.steps);
    if (g.lipschitz() * l.dt >= 1.0) {
        std::ostringstream msg;
        msg << "step too coarse: C*dt = " << g.lipschitz() * l.dt << " >= 1; increase the number of steps";
        throw ValidationError(msg.str());
    }

    BsdeSolution sol;
    sol.first_layer = to;
    sol.last_layer = from;
    sol.tolerance = kFixedPointTol;
    sol.Y.resize(static_cast<std::size_t>(from) + 1);
    sol.Z.resize(static_cast<std::size_t>(from) + 1);
    sol.Y[from] = values;

    for (int i = from - 1; i >= to; --i) {
        const Vector& next = sol.Y[i + 1];
        Vector y(static_cast<std::size_t>(i) + 1), z(static_cast<std::size_t>(i) + 1);
        for (int j = 0; j <= i; ++j) {
            const double up = next[j + 1], down = next[j];
            z[j] = (up - down) / (2.0 * l.sqrt_dt);
            y[j] = fixed_point(g, i, 0.5 * (up + down), z[j], l.dt, sol.max_iterations);
        }
        sol.Y[i] = std::move(y);
        sol.Z[i] = std::move(z);
    }
    return sol;
}

BsdeSolution solve_bsde(const Lattice& l, const GeneratorSpec& g, const Vector& terminal) {
    if (terminal.size() != static_cast<std::size_t>(l.steps) + 1) {
        throw ValidationError("terminal condition needs N + 1 values");
    }
    return solve_between(l, g, terminal, l.steps, 0);
}

Vector terminal_from_payoff(const Vector& payoff) {
    Vector out(payoff.size());
    std::transform(payoff.begin(), payoff.end(), out.begin(), [](double x) { return -x; });
    return out;
}

ComparisonReport comparison_check(const GeneratorSpec& g1, const GeneratorSpec& g2, const Vector& term1,
                                  const Vector& term2, const Lattice& l, double tol) {
    ComparisonReport report;
    if (term1.size() != term2.size()) throw ValidationError("terminal conditions differ in length");
    for (std::size_t j = 0; j < term1.size(); ++j) {
        if (term1[j] < term2[j]) {
            report.precondition_ok = false;
            report.precondition_note = "terminal order fails at node " + std::to_string(j);
            return report;
        }
    }
    const BsdeSolution s2 = solve_bsde(l, g2, term2);
    for (int i = 0; i < l.steps; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double y = s2.Y[i][j], z = s2.Z[i][j];
            if (g1(i, y, z) < g2(i, y, z) - tol) {
                report.precondition_ok = false;
                report.precondition_note =
                    "generator order fails at step " + std::to_string(i) + ", node " + std::to_string(j);
                return report;
            }
        }
    }
    const BsdeSolution s1 = solve_bsde(l, g1, term1);
    report.min_gap = kInf;
    for (int i = 0; i <= l.steps; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double gap = s1.Y[i][j] - s2.Y[i][j];
            report.min_gap = std::min(report.min_gap, gap);
            if (gap < -tol) {
                if (!report.first_violation) report.first_violation = NodeRef{i, j};
                ++report.violations;
            }
        }
    }
    report.passed = report.violations == 0;
    return report;
}

bool sampled_decreasing_in_y(const GeneratorSpec& g, int steps) {
    if (const auto* c = g.get_if<CustomGenerator>(); c && !c->declared_convex_decreasing) return false;
    constexpr int kYs = 41;
    const std::vector<int> sample_steps{0, steps / 2, std::max(steps - 1, 0)};
    for (int step : sample_steps) {
        for (double z : {-1.0, 0.0, 1.0}) {
            double prev = g(step, -10.0, z);
            for (int k = 1; k < kYs; ++k) {
                const double y = -10.0 + 20.0 * k / (kYs - 1);
                const double cur = g(step, y, z);
                if (cur > prev + 1e-12) return false;
                prev = cur;
            }
        }
    }
    return true;
}

DynamicSubadditivityReport dynamic_subadditivity_check(const GeneratorSpec& g, const Vector& payoff,
                                                       const std::vector<double>& m_grid, const Lattice& l,
                                                       double tol) {
    DynamicSubadditivityReport report;
    if (m_grid.size() < 2) throw ValidationError("m-grid needs at least two points");
    if (!std::is_sorted(m_grid.begin(), m_grid.end())) throw ValidationError("m-grid must be sorted");
    if (!sampled_decreasing_in_y(g, l.steps)) {
        report.precondition_ok = false;
        report.precondition_note = "generator is not decreasing in y; check skipped";
        return report;
    }
    std::optional<BsdeSolution> prev;
    double prev_m = 0.0;
    for (double m : m_grid) {
        Vector shifted(payoff);
        for (double& x : shifted) x += m;
        BsdeSolution cur = solve_bsde(l, g, terminal_from_payoff(shifted));
        if (prev) {
            for (int i = 0; i <= l.steps; ++i) {
                for (int j = 0; j <= i; ++j) {
                    const double drop = (prev->Y[i][j] + prev_m) - (cur.Y[i][j] + m);
                    if (drop > report.max_violation) {
                        report.max_violation = drop;
                        report.witness = NodeRef{i, j};
                    }
                }
            }
        }
        prev = std::move(cur);
        prev_m = m;
    }
    report.passed = report.max_violation <= tol;
    return report;
}

TimeConsistencyReport time_consistency_check(const GeneratorSpec& g, const Vector& terminal, int t1, int t2,
                                             const Lattice& l, double tol) {
    if (!(0 <= t1 && t1 < t2 && t2 <= l.steps)) throw ValidationError("need 0 <= t1 < t2 <= N");
    const BsdeSolution direct = solve_bsde(l, g, terminal);
    const BsdeSolution tail = solve_between(l, g, terminal, l.steps, t2);
    const BsdeSolution staged = solve_between(l, g, tail.Y[t2], t2, t1);
    double gap = 0.0;
    for (int j = 0; j <= t1; ++j) gap = std::max(gap, std::abs(direct.Y[t1][j] - staged.Y[t1][j]));
    return {gap, gap <= tol};
}

DualControl dual_control_recovery(const BsdeSolution& sol, const GeneratorSpec& g, const Lattice& l, double tol) {
    Vector low, high;
    if (const auto* a = g.get_if<AmbiguousRate>()) {
        low = a->low;
        high = a->high;
    } else if (const auto* lin = g.get_if<LinearRate>()) {
        low = high = lin->beta;
    } else {
        throw ValidationError("dual control recovery needs an ambiguous-rate or linear-rate generator");
    }
    const int from = sol.last_layer, to = sol.first_layer;
    DualControl out;
    out.beta_bar.resize(static_cast<std::size_t>(from) + 1);
    out.mu_bar.resize(static_cast<std::size_t>(from) + 1);
    out.y_hat.resize(static_cast<std::size_t>(from) + 1);
    out.y_hat[from] = sol.Y[from];
    out.max_gap = 0.0;
    for (int i = from - 1; i >= to; --i) {
        const Vector& next = out.y_hat[i + 1];
        Vector beta(static_cast<std::size_t>(i) + 1), yh(static_cast<std::size_t>(i) + 1);
        for (int j = 0; j <= i; ++j) {
            beta[j] = sol.Y[i][j] <= 0.0 ? rate_at(high, i) : rate_at(low, i);
            yh[j] = 0.5 * (next[j] + next[j + 1]) / (1.0 + beta[j] * l.dt);
            out.max_gap = std::max(out.max_gap, std::abs(yh[j] - sol.Y[i][j]));
        }
        out.beta_bar[i] = std::move(beta);
        out.mu_bar[i] = Vector(static_cast<std::size_t>(i) + 1, 0.0);
        out.y_hat[i] = std::move(yh);
    }
    out.passed = out.max_gap <= tol;
    return out;
}

FenchelValue fenchel_G(const GeneratorSpec& g, int step, double beta, double mu, const FenchelGrid& grid) {
    const double g00 = std::abs(g(step, 0.0, 0.0));
    const double k = g.growth();
    double bound = -g00;
    if (mu != 0.0) bound = k > 0.0 ? -g00 + mu * mu / (2.0 * k) : kInf;

    auto exact_rates = [&](double r, double R) {
        const bool inside = beta >= r - 1e-15 && beta <= R + 1e-15 && mu == 0.0;
        const double v = inside ? 0.0 : kInf;
        return FenchelValue{v, true, bound, v >= bound};
    };
    if (const auto* a = g.get_if<AmbiguousRate>()) return exact_rates(rate_at(a->low, step), rate_at(a->high, step));
    if (const auto* lin = g.get_if<LinearRate>()) {
        const double b = rate_at(lin->beta, step);
        return exact_rates(b, b);
    }

    if (beta < 0.0 || beta > g.lipschitz()) return {kInf, true, bound, true};
    if (grid.resolution < 2) throw ValidationError("Fenchel grid needs at least two points per axis");
    double best = -kInf;
    for (int a = 0; a < grid.resolution; ++a) {
        const double y = -grid.y_bound + 2.0 * grid.y_bound * a / (grid.resolution - 1);
        for (int b = 0; b < grid.resolution; ++b) {
            const double z = -grid.z_bound + 2.0 * grid.z_bound * b / (grid.resolution - 1);
            best = std::max(best, -beta * y - mu * z - g(step, y, z));
        }
    }
    return {best, false, bound, best >= bound - 1e-12};
}

void write_bsde_csv(std::ostream& out, const Lattice& l, const BsdeSolution& sol, const DualControl* control) {
    out << "step,node_index,W,Y,Z";
    if (control) out << ",beta_bar";
    out << '\n';
    for (int i = sol.first_layer; i <= sol.last_layer; ++i) {
        const bool terminal = i == sol.last_layer;
        for (int j = 0; j <= i; ++j) {
            out << i << ',' << j << ',' << format_number(l.W(i, j)) << ',' << format_number(sol.Y[i][j]) << ',';
            if (!terminal) out << format_number(sol.Z[i][j]);
            if (control) {
                out << ',';
                if (!terminal) out << format_number(control->beta_bar[i][j]);
            }
            out << '\n';
        }
    }
}

}  // namespace subcash

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Run with --update-goldens to rewrite the CLI reference outputs.

#include <CLI11.hpp>

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "subcash/bsde.hpp"
#include "subcash/errors.hpp"
#include "subcash/spot_forward.hpp"
#include "subcash/subadditive.hpp"
#include "subcash/transfer.hpp"
#include "support.hpp"

using namespace subcash;
namespace fs = std::filesystem;

namespace {

// Counts failed expectations and keeps the first message.
class Tally {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (first_.empty()) first_ = what;
    }
    bool passed() const { return failures_ == 0 && checks_ > 0; }
    std::string summary() const {
        std::ostringstream s;
        s << checks_ << " checks";
        if (failures_) s << ", " << failures_ << " failed; first: " << first_;
        return s.str();
    }

private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    std::string first_;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

Functional rho_of(RiskMeasureSpec spec) {
    return [spec = std::move(spec)](const Position& x) { return evaluate_rho(spec, x); };
}

// Convexity, monotonicity and cash sub-additivity on one (X, m) draw.
void reserve_axioms(Tally& t, const std::string& label, const Functional& R, support::Random& rnd, std::size_t n) {
    const Position x = rnd.position(n, 20), y = rnd.position(n, 20);
    const double m = std::abs(rnd.uniform(-10, 10));
    const SubadditivityReport sub = check_cash_subadditive(R, x, {-m, -0.5 * m, 0.0, 0.5 * m, m}, 1e-9);
    t.expect(sub.passed(), label + ": cash sub-additivity, violation " + num(sub.max_violation));
    const double conv = convexity_violation(R, x, y, {0.25, 0.5, 0.75});
    t.expect(conv <= 1e-9, label + ": convexity violation " + num(conv));
    Position up = x;
    for (std::size_t i = 0; i < n; ++i) up[i] += std::abs(y[i]);
    const double mono = monotonicity_violation(R, x, up);
    t.expect(mono <= 1e-9, label + ": monotonicity violation " + num(mono));
}

Tally envelope_worst_case() {
    Tally t;
    support::Random rnd(1001);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        const DiscountEnvelope env = rnd.envelope(n);
        const Position x = rnd.position(n, 50);
        const auto lin = RiskMeasureSpec::linear(p);
        const double value = ambiguous_discount_reserve(lin, env, x);

        // Per-atom sign: low factor on gains, high factor on losses.
        double closed = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] >= 0.0 ? env.low()[i] : env.high()[i];
            closed -= p[i] * d * x[i];
        }
        t.expect(std::abs(value - closed) <= 1e-12 * std::max(1.0, std::abs(closed)),
                 "closed form " + num(value) + " vs " + num(closed));
        const double self = evaluate_rho(lin, hadamard(x, worst_discount(env, x).span()));
        t.expect(std::abs(value - self) <= 1e-12 * std::max(1.0, std::abs(self)), "self-consistency");

        // sup over a res-21 per-atom D-grid of -E_P[D X].
        constexpr int kRes = 21;
        std::size_t count = 1;
        for (std::size_t i = 0; i < n; ++i) count *= kRes;
        double grid = -kInf, mesh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mesh += p[i] * std::abs(x[i]) * (env.high()[i] - env.low()[i]) / (kRes - 1);
        }
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t idx = k;
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = env.low()[i] + (env.high()[i] - env.low()[i]) * static_cast<double>(idx % kRes) /
                                                    (kRes - 1);
                idx /= kRes;
                v -= p[i] * d * x[i];
            }
            grid = std::max(grid, v);
        }
        t.expect(grid <= value + 1e-12 * std::max(1.0, std::abs(value)) && value - grid <= mesh + 1e-12,
                 "D-grid " + num(grid) + " vs " + num(value));
    }
    return t;
}

Tally put_identity() {
    Tally t;
    support::Random rnd(1002);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        const double r = rnd.uniform(1.0, 1.25);
        const Position x = rnd.position(n, 50);
        const double put = put_premium(p, r, x);
        const double env = ambiguous_discount_reserve(RiskMeasureSpec::linear(p),
                                                      DiscountEnvelope::constant(n, 0.0, 1.0 / r), x);
        t.expect(std::abs(put - env) <= 1e-12, "put " + num(put) + " vs envelope " + num(env));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", put_premium(ProbabilityWeights{0.5, 0.5}, 1.05, Position{-10, 20}));
    t.expect(std::string(buf) == "4.761904761905", std::string("printed put ") + buf);
    return t;
}

Tally subadditivity_suite() {
    Tally t;
    support::Random rnd(1003);
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        reserve_axioms(t, "envelope", envelope_reserve(RiskMeasureSpec::linear(p), rnd.envelope(n)), rnd, n);
        const double r = rnd.uniform(1.0, 1.2);
        reserve_axioms(t, "put", [p, r](const Position& x) { return put_premium(p, r, x); }, rnd, n);
    }
    for (int v = 0; v < 50; ++v) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        const std::vector<RiskMeasureSpec> bases{RiskMeasureSpec::worst_case(), RiskMeasureSpec::linear(p),
                                                 RiskMeasureSpec::entropic(p, rnd.uniform(0.5, 5))};
        const Functional R = convex_reserve(bases[static_cast<std::size_t>(v % 3)], rnd.convex(n));
        for (int draw = 0; draw < 100; ++draw) reserve_axioms(t, "rho0(-V)", R, rnd, n);
    }
    for (int draw = 0; draw < 100; ++draw) {
        // B's lower factors sit below -min_slope of V, so A and B share a dual measure.
        const ProbabilityWeights p = rnd.probability(2);
        const ConvexDiscountFunction v = rnd.convex(2);
        const DiscountEnvelope wide{DiscountFactor{-v[0].min_slope() * rnd.uniform(0, 1),
                                                   -v[1].min_slope() * rnd.uniform(0, 1)},
                                    DiscountFactor{1.0, 1.0}};
        const Functional a = convex_reserve(RiskMeasureSpec::entropic(p, rnd.uniform(0.5, 3)), v);
        const Functional b = envelope_reserve(RiskMeasureSpec::linear(p), wide);
        const Functional conv = [a, b](const Position& x) { return inf_convolution(a, b, x).value; };
        reserve_axioms(t, "inf-convolution", conv, rnd, 2);
    }
    return t;
}

Tally extension_duality() {
    Tally t;
    support::Random rnd(1004);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights p = rnd.probability(n);
        const double rate = rnd.uniform(1.0, 1.2);
        const std::vector<Functional> reserves{
            envelope_reserve(RiskMeasureSpec::linear(p), rnd.envelope(n)),
            [p, rate](const Position& x) { return put_premium(p, rate, x); },
            convex_reserve(RiskMeasureSpec::entropic(p, 2.0), rnd.convex(n)),
        };
        for (const Functional& R : reserves) {
            const ExtendedPosition a{rnd.position(n, 20), rnd.uniform(-10, 10)};
            const ExtendedPosition b{rnd.position(n, 20), rnd.uniform(-10, 10)};
            const double ha = extend_to_hat(R, a), hb = extend_to_hat(R, b);
            const double m = rnd.uniform(-10, 10);
            const double shifted = extend_to_hat(R, {a.survival + m, a.default_leg + m});
            t.expect(std::abs(shifted - (ha - m)) <= 1e-12 * std::max(1.0, std::abs(ha)),
                     "hat cash additivity gap " + num(shifted - (ha - m)));
            for (double l : {0.25, 0.5, 0.75}) {
                const ExtendedPosition mix{l * a.survival + (1 - l) * b.survival,
                                           l * a.default_leg + (1 - l) * b.default_leg};
                t.expect(extend_to_hat(R, mix) <= l * ha + (1 - l) * hb + 1e-9, "hat convexity");
            }
            ExtendedPosition up = a;
            for (std::size_t i = 0; i < n; ++i) up.survival[i] += std::abs(b.survival[i]);
            up.default_leg += std::abs(b.default_leg);
            t.expect(extend_to_hat(R, up) <= ha + 1e-9, "hat monotonicity");
            t.expect(std::abs(extend_to_hat(R, {Position::constant(n, 0.0), 0.0}) - R(Position::constant(n, 0.0))) ==
                         0.0,
                     "hat restriction at zero");
        }
    }
    for (int trial = 0; trial < 200; ++trial) {
        const ProbabilityWeights p = rnd.probability(2);
        const DiscountEnvelope env = rnd.envelope(2);
        const Position x = rnd.position(2, 50);
        const double primal = ambiguous_discount_reserve(RiskMeasureSpec::linear(p), env, x);
        const double dual = dual_evaluate_subprob(envelope_vertex_table(env, p), x);
        t.expect(std::abs(primal - dual) <= 1e-9, "sub-probability dual " + num(dual) + " vs " + num(primal));
    }
    return t;
}

Tally spot_forward_bridge() {
    Tally t;
    support::Random rnd(1005);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rnd.integer(2, 4));
        const ProbabilityWeights q = rnd.probability(n);
        Vector dv(n);
        for (double& v : dv) v = rnd.uniform(0.5, 1.0);
        const DiscountFactor d(dv);
        const auto spec = RiskMeasureSpec::linear(q);
        const BondQuote b(expectation(q, Position(dv)));
        const Position x = rnd.position(n, 30);
        const double m = rnd.uniform(-10, 10);
        const double fwd = forward_from_spot(spec, d, b, x);
        const double shifted = forward_from_spot(spec, d, b, x + m);
        t.expect(std::abs(shifted - (fwd - m)) <= 1e-9, "forward cash additivity gap " + num(shifted - fwd + m));
        const double back = spot_from_forward(forward_measure(spec, d, b), d, b, x);
        const double spot = evaluate_rho(spec, x);
        t.expect(std::abs(back - spot) <= 1e-9, "round trip " + num(back) + " vs " + num(spot));
        t.expect(check_forward_calibration(spec, d, b).passed, "calibrated bond flagged");

        const BondQuote off(b.price() * rnd.uniform(0.8, 0.95));
        const ForwardCalibrationReport bad = check_forward_calibration(spec, d, off);
        t.expect(!bad.passed && bad.failing_lambda.has_value(), "miscalibrated bond without a witness");
    }
    return t;
}

Tally inf_convolution_suite() {
    Tally t;
    support::Random rnd(1006);
    const Functional wc = rho_of(RiskMeasureSpec::worst_case());
    for (int trial = 0; trial < 5; ++trial) {
        const ProbabilityWeights q0 = trial == 0 ? ProbabilityWeights{0.4, 0.6} : rnd.probability(2);
        const Position xa = trial == 0 ? Position{12, -8} : rnd.position(2, 15);
        const Position xb = trial == 0 ? Position{-3, 5} : rnd.position(2, 15);
        const Functional lin = rho_of(RiskMeasureSpec::linear(q0));
        const Position psi = xa + xb;
        const TransferSolution s = solve_transfer({xa, xb, wc, lin});
        const double oracle = expectation(q0, -psi);
        t.expect(std::abs(s.residual - oracle) <= 1e-6, "residual " + num(s.residual) + " vs " + num(oracle));

        // Exhaustive res-101 grid over F; the objective is 2-Lipschitz in the sup norm.
        constexpr int kRes = 101;
        const double bound = 4.0 * std::max(psi.max_abs(), 1.0);
        const double step = 2.0 * bound / (kRes - 1);
        double grid = kInf;
        for (int i = 0; i < kRes; ++i) {
            for (int j = 0; j < kRes; ++j) {
                const Position f{-bound + step * i, -bound + step * j};
                grid = std::min(grid, wc(psi - f) + lin(f));
            }
        }
        t.expect(grid >= s.residual - 1e-9 && grid - s.residual <= step,
                 "F-grid " + num(grid) + " vs " + num(s.residual) + ", mesh " + num(step));

        const auto alpha_wc = [](const SubProbability& mu) { return std::abs(mu.mass() - 1.0) <= 1e-9 ? 0.0 : kInf; };
        const auto alpha_lin = [q0](const SubProbability& mu) {
            return std::abs(mu[0] - q0[0]) <= 1e-9 && std::abs(mu[1] - q0[1]) <= 1e-9 ? 0.0 : kInf;
        };
        const Functional conv = [&](const Position& x) { return inf_convolution(wc, lin, x).value; };
        std::vector<SubProbability> mus = subprob_grid(2, 11);
        mus.push_back(SubProbability::from(q0));
        const GridSpec positions(11, 10.0);
        const PenaltySumReport ps = penalty_sum_check(alpha_wc, alpha_lin, conv, mus, positions, positions.step());
        t.expect(ps.precondition_ok && ps.finite_entries > 0 && ps.max_gap <= ps.mesh_bound,
                 "penalty sum gap " + num(ps.max_gap) + " vs mesh " + num(ps.mesh_bound));

        const HatEquivalenceReport hat = hat_equivalence_check(wc, lin, psi);
        t.expect(hat.gap <= 1e-6, "hat equivalence gap " + num(hat.gap));
    }
    return t;
}

Tally bsde_oracles() {
    Tally t;
    const double exact = -100.0 * std::exp(-0.05);
    double prev = 0.0;
    for (int n : {25, 50, 100, 200}) {
        const Lattice l = build_lattice(n, 1.0);
        const double y0 = solve_bsde(l, GeneratorSpec::linear({0.05}), Vector(n + 1, -100.0)).root();
        const double err = std::abs(y0 - exact);
        if (n == 200) t.expect(err <= 0.5 && err <= 5e-3 * std::abs(exact), "Y0 error " + num(err));
        if (prev > 0.0) {
            const double ratio = err / prev;
            t.expect(ratio >= 0.4 && ratio <= 0.6, "convergence ratio " + num(ratio) + " at N=" + std::to_string(n));
        }
        prev = err;
    }
    const double r = 0.02, R = 0.08, T = 1.0;
    const GeneratorSpec g = ambiguous_rate_generator({r}, {R});
    const Lattice l = build_lattice(200, T);
    const double gain = solve_bsde(l, g, Vector(201, -100.0)).root();
    const double loss = solve_bsde(l, g, Vector(201, 100.0)).root();
    const double gain_exact = -100.0 * std::exp(-R * T), loss_exact = 100.0 * std::exp(-r * T);
    t.expect(std::abs(gain - gain_exact) <= std::min(0.5, 5e-3 * std::abs(gain_exact)),
             "gain discounted at R: " + num(gain) + " vs " + num(gain_exact));
    t.expect(std::abs(loss - loss_exact) <= std::min(0.5, 5e-3 * std::abs(loss_exact)),
             "loss discounted at r: " + num(loss) + " vs " + num(loss_exact));
    return t;
}

Tally bsde_structure() {
    Tally t;
    support::Random rnd(1008);
    const Lattice l = build_lattice(100, 1.0);
    std::vector<double> m_grid;
    for (int k = 0; k <= 10; ++k) m_grid.push_back(-5.0 + k);
    for (int trial = 0; trial < 20; ++trial) {
        const double r = rnd.uniform(0.0, 0.05), R = r + rnd.uniform(0.0, 0.15);
        const GeneratorSpec g = ambiguous_rate_generator({r}, {R});
        const double c = rnd.uniform(-5, 5), slope = rnd.uniform(5, 20);
        Vector payoff(101);
        for (int j = 0; j <= 100; ++j) payoff[j] = c + slope * l.W(100, j) + rnd.uniform(-1, 1);
        const Vector terminal = terminal_from_payoff(payoff);
        const std::string tag = " (trial " + std::to_string(trial) + ")";

        Vector higher(terminal);
        for (double& v : higher) v += rnd.uniform(0, 2);
        const ComparisonReport cmp =
            comparison_check(g, GeneratorSpec::linear({rnd.uniform(r, R)}), higher, terminal, l);
        t.expect(cmp.precondition_ok && cmp.passed, "comparison min gap " + num(cmp.min_gap) + tag);

        const DynamicSubadditivityReport sub = dynamic_subadditivity_check(g, payoff, m_grid, l);
        t.expect(sub.precondition_ok && sub.passed, "dynamic sub-additivity " + num(sub.max_violation) + tag);

        const TimeConsistencyReport tc = time_consistency_check(g, terminal, rnd.integer(0, 49), rnd.integer(50, 100), l);
        t.expect(tc.max_gap <= 1e-12, "time consistency gap " + num(tc.max_gap) + tag);

        const DualControl dc = dual_control_recovery(solve_bsde(l, g, terminal), g, l, 1e-10);
        t.expect(dc.max_gap <= 1e-10, "dual control gap " + num(dc.max_gap) + tag);
    }
    return t;
}

struct Proc {
    int code;
    std::string out;
};

Proc run(const fs::path& cwd, const std::string& args) {
    const std::string cmd = "cd '" + cwd.string() + "' && '" + SUBCASH_CLI + "' " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spill(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct GoldenCase {
    std::string name;
    std::string args;
    std::string csv;  // relative CSV path written by the command, if any
};

const std::vector<GoldenCase> kGoldenCases{
    {"two_state_envelope", "reserve --scenario fixtures/two_state.scn --measure linP --position X --envelope e09_10", ""},
    {"two_state_put", "reserve --scenario fixtures/two_state.scn --position X --put-rate 1.05", ""},
    {"two_state_dual",
     "dual --scenario fixtures/two_state.scn --measure linP --position X --envelope e09_10 --tolerance 1e-9", ""},
    {"two_state_bridge",
     "bridge --scenario fixtures/two_state.scn --measure linP --discount D --bond B --position X --strict", ""},
    {"two_state_lattice",
     "dynamic --scenario fixtures/two_state.scn --rate-low 0.02 --rate-high 0.06 --terminal-const 1 "
     "--terminal-slope 10 --steps 20 --dual --out lattice.csv",
     "lattice.csv"},
    {"three_state_robust", "reserve --scenario fixtures/three_state.scn --measure rob --position X", ""},
    {"three_state_convex",
     "reserve --scenario fixtures/three_state.scn --measure linP --position X --convex kinked --representation-res 21",
     ""},
    {"three_state_subadd",
     "check subadd --scenario fixtures/three_state.scn --measure ent --position Y --envelope wide", ""},
    {"transfer_wc_linear",
     "transfer --scenario fixtures/transfer.scn --measure-a wc --measure-b linQ --position-a XA --position-b XB "
     "--grid-res 101",
     ""},
    {"transfer_envelope",
     "transfer --scenario fixtures/transfer.scn --measure-a linQ --envelope-a tight --measure-b ent --position-a XA "
     "--position-b XB",
     ""},
};

Tally cli_goldens(bool update) {
    Tally t;
    const fs::path work = fs::current_path() / "acceptance_work";
    fs::remove_all(work);
    fs::create_directories(work / "fixtures");
    for (const auto& entry : fs::directory_iterator(SUBCASH_FIXTURE_DIR)) {
        fs::copy_file(entry.path(), work / "fixtures" / entry.path().filename());
    }
    const fs::path golden = SUBCASH_GOLDEN_DIR;
    if (update) fs::create_directories(golden);

    for (const GoldenCase& c : kGoldenCases) {
        const Proc first = run(work, c.args);
        const std::string csv1 = c.csv.empty() ? "" : slurp(work / c.csv);
        const Proc second = run(work, c.args);
        const std::string csv2 = c.csv.empty() ? "" : slurp(work / c.csv);
        t.expect(first.code == 0, c.name + ": exit " + std::to_string(first.code));
        t.expect(first.out == second.out && csv1 == csv2, c.name + ": output differs between runs");
        if (!c.csv.empty()) t.expect(!csv1.empty(), c.name + ": CSV missing");

        const fs::path report_file = golden / (c.name + ".txt");
        const fs::path csv_file = golden / (c.name + ".csv");
        if (update) {
            spill(report_file, first.out);
            if (!c.csv.empty()) spill(csv_file, csv1);
        }
        t.expect(fs::exists(report_file) && slurp(report_file) == first.out, c.name + ": report differs from golden");
        if (!c.csv.empty()) {
            t.expect(fs::exists(csv_file) && slurp(csv_file) == csv1, c.name + ": CSV differs from golden");
        }
    }

    const std::vector<std::pair<int, std::string>> exits{
        {0, "reserve --scenario fixtures/two_state.scn --measure wc --position X"},
        {1, "bridge --scenario fixtures/two_state.scn --measure linP --discount D --bond Boff --position X --strict"},
        {2, "reserve --scenario fixtures/bad_syntax.scn --measure m --position X"},
        {2, "reserve --no-such-flag"},
        {3, "reserve --scenario fixtures/bad_probabilities.scn --measure m --position X"},
        {3, "reserve --scenario fixtures/two_state.scn --measure missing --position X"},
        {4,
         "transfer --scenario fixtures/transfer.scn --measure-a linR --measure-b linQ --position-a XA --position-b XB"},
        {5, "dual --scenario fixtures/two_state.scn --measure ent --position X --simplex-res 5000"},
    };
    for (const auto& [want, args] : exits) {
        const Proc p = run(work, args);
        t.expect(p.code == want, "exit " + std::to_string(p.code) + " (want " + std::to_string(want) + ") for " + args);
    }
    return t;
}

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;
    std::function<Tally()> body;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    bool update = false;
    app.add_flag("--update-goldens", update, "Rewrite the CLI golden files before comparing");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "envelope worst case", 5, envelope_worst_case},
        {2, "put premium identity", 1, put_identity},
        {3, "cash sub-additivity suite", 30, subadditivity_suite},
        {4, "extension duality", 10, extension_duality},
        {5, "spot/forward bridge", 1, spot_forward_bridge},
        {6, "inf-convolution", 60, inf_convolution_suite},
        {7, "BSDE analytic oracles", 10, bsde_oracles},
        {8, "BSDE structural suite", 60, bsde_structure},
        {9, "CLI golden tests", 5, [update] { return cli_goldens(update); }},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Tally tally;
        std::string error;
        try {
            tally = c.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds <= c.budget_seconds;
        const bool ok = error.empty() && tally.passed() && in_time;
        failed += !ok;
        std::printf("criterion %d [%s] %s: %s; %.2fs of %.0fs%s\n", c.id, ok ? "PASS" : "FAIL", c.title.c_str(),
                    error.empty() ? tally.summary().c_str() : ("exception: " + error).c_str(), seconds,
                    c.budget_seconds, in_time ? "" : " (over budget)");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

#include "subcash/commands.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "subcash/bsde.hpp"
#include "subcash/document.hpp"
#include "subcash/errors.hpp"
#include "subcash/transfer.hpp"

namespace subcash {

std::string format_fixed(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

namespace {

std::string format_vector(std::span<const double> v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_fixed(v[i]);
    }
    return out + "]";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class Report {
public:
    void field(const std::string& key, const std::string& value) { body_ << key << ": " << value << '\n'; }
    void value(const std::string& key, double v) { field(key, format_fixed(v)); }
    void vector(const std::string& key, std::span<const double> v) { field(key, format_vector(v)); }
    void status(const std::string& key, bool ok) {
        field(key, ok ? "PASS" : "FAIL");
        all_passed_ = all_passed_ && ok;
    }
    bool all_passed() const { return all_passed_; }
    std::string text() const { return body_.str(); }

private:
    std::ostringstream body_;
    bool all_passed_ = true;
};

Vector parse_m_grid(const std::string& spec) {
    std::stringstream ss(spec);
    std::string a, b, k;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, k)) {
        throw ValidationError("m-grid must look like lo:hi:count");
    }
    double lo = 0.0, hi = 0.0;
    int count = 0;
    try {
        std::size_t used = 0;
        lo = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        hi = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        count = std::stoi(k, &used);
        if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::logic_error&) {
        throw ValidationError("m-grid must look like lo:hi:count");
    }
    if (count < 2 || !(hi > lo)) throw ValidationError("m-grid needs lo < hi and at least two points");
    Vector grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * i / (count - 1);
    return grid;
}

// Which reserve a command acts on: an envelope, the put, a convex V, or plain rho0.
struct ReserveFlags {
    std::string measure;
    std::string position;
    std::string envelope;
    std::string convex;
    std::optional<double> put_rate;
    double strike = 0.0;
};

struct ResolvedReserve {
    std::string mode;
    Functional reserve;
};

ResolvedReserve resolve_reserve(const ScenarioDocument& doc, const ReserveFlags& f) {
    const int chosen = !f.envelope.empty() + !f.convex.empty() + f.put_rate.has_value();
    if (chosen > 1) throw ValidationError("choose at most one of --envelope, --convex and --put-rate");
    if (f.put_rate) {
        const ProbabilityWeights p = doc.baseline;
        const double r = *f.put_rate, k = f.strike;
        if (r < 1.0) throw ValidationError("gross rate must be at least 1");
        return {"put", [p, r, k](const Position& x) { return put_premium(p, r, x, k); }};
    }
    if (f.measure.empty()) throw ValidationError("--measure is required");
    const RiskMeasureSpec& spec = doc.measure(f.measure);
    if (const auto dim = spec.dimension(); dim && *dim != doc.size()) {
        throw ValidationError("measure '" + f.measure + "' does not match the atom count");
    }
    if (!f.envelope.empty()) return {"envelope", envelope_reserve(spec, doc.envelope(f.envelope))};
    if (!f.convex.empty()) return {"convex", convex_reserve(spec, doc.convex_function(f.convex))};
    return {"cash-additive", [spec](const Position& x) { return evaluate_rho(spec, x); }};
}

struct DynamicFlags {
    int steps = 100;
    double horizon = 1.0;
    double rate_low = 0.0;
    std::optional<double> rate_high;
    double terminal_const = 0.0;
    double terminal_slope = 0.0;
};

struct DynamicSetup {
    Lattice lattice;
    GeneratorSpec generator;
    Vector payoff;
};

DynamicSetup resolve_dynamic(const DynamicFlags& f) {
    Lattice l = build_lattice(f.steps, f.horizon);
    GeneratorSpec g = ambiguous_rate_generator({f.rate_low}, {f.rate_high.value_or(f.rate_low)});
    Vector payoff(static_cast<std::size_t>(l.steps) + 1);
    for (int j = 0; j <= l.steps; ++j) payoff[j] = f.terminal_const + f.terminal_slope * l.W(l.steps, j);
    return {l, std::move(g), std::move(payoff)};
}

void add_reserve_flags(CLI::App* sub, ReserveFlags& f) {
    sub->add_option("--measure", f.measure, "Base measure name");
    sub->add_option("--position", f.position, "Position name")->required();
    sub->add_option("--envelope", f.envelope, "Discount envelope name");
    sub->add_option("--convex", f.convex, "Convex discount function name");
    sub->add_option("--put-rate", f.put_rate, "Gross rate r >= 1 for the put premium");
    sub->add_option("--strike", f.strike, "Put strike");
}

void add_dynamic_flags(CLI::App* sub, DynamicFlags& f) {
    sub->add_option("--steps", f.steps, "Lattice steps N");
    sub->add_option("--horizon", f.horizon, "Horizon T in years");
    sub->add_option("--rate-low", f.rate_low, "Lower rate r");
    sub->add_option("--rate-high", f.rate_high, "Upper rate R (defaults to r)");
    sub->add_option("--terminal-const", f.terminal_const, "Payoff X = c + s W_T: the constant c");
    sub->add_option("--terminal-slope", f.terminal_slope, "Payoff X = c + s W_T: the slope s");
}

std::string command_echo(const std::vector<std::string>& args) {
    std::string echo;
    for (const std::string& a : args) {
        if (!echo.empty()) echo += ' ';
        echo += a;
    }
    return echo;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cash sub-additive risk measures", "subcash"};
    app.require_subcommand(1);

    std::string scenario_path, out_path;
    auto add_common = [&](CLI::App* sub, bool needs_scenario) {
        auto* opt = sub->add_option("--scenario", scenario_path, "Scenario document");
        if (needs_scenario) opt->required();
        sub->add_option("--out", out_path, "CSV output path");
    };

    ReserveFlags rf;
    std::optional<int> rep_res;
    auto* reserve = app.add_subcommand("reserve", "Evaluate a reserve");
    add_common(reserve, true);
    add_reserve_flags(reserve, rf);
    reserve->add_option("--representation-res", rep_res, "D-grid resolution for the conjugate representation");

    std::string d_measure, d_position, d_envelope;
    int simplex_res = 21, grid_res = 21;
    std::optional<double> grid_bound, dual_tol;
    auto* dual = app.add_subcommand("dual", "Penalty table and dual round trip");
    add_common(dual, true);
    dual->add_option("--measure", d_measure, "Measure name")->required();
    dual->add_option("--position", d_position, "Position name")->required();
    dual->add_option("--envelope", d_envelope, "Discount envelope name");
    dual->add_option("--simplex-res", simplex_res, "Measure grid resolution");
    dual->add_option("--grid-res", grid_res, "Position grid resolution for grid penalties");
    dual->add_option("--grid-bound", grid_bound, "Position grid bound");
    dual->add_option("--tolerance", dual_tol, "Fail when the round-trip gap exceeds this");

    std::string b_measure, b_discount, b_bond, b_position;
    bool b_strict = false;
    auto* bridge = app.add_subcommand("bridge", "Spot and forward risk measures");
    add_common(bridge, true);
    bridge->add_option("--measure", b_measure, "Spot measure name")->required();
    bridge->add_option("--discount", b_discount, "Discount factor name")->required();
    bridge->add_option("--bond", b_bond, "Bond name")->required();
    bridge->add_option("--position", b_position, "Position name")->required();
    bridge->add_flag("--strict", b_strict, "Fail when calibration fails");

    std::string t_ma, t_mb, t_xa, t_xb, t_ea, t_eb, t_ca, t_cb;
    int t_grid = 0;
    auto* transfer = app.add_subcommand("transfer", "Optimal risk transfer");
    add_common(transfer, true);
    transfer->add_option("--measure-a", t_ma, "Agent A measure")->required();
    transfer->add_option("--measure-b", t_mb, "Agent B measure")->required();
    transfer->add_option("--position-a", t_xa, "Agent A exposure")->required();
    transfer->add_option("--position-b", t_xb, "Agent B exposure")->required();
    transfer->add_option("--envelope-a", t_ea, "Agent A envelope");
    transfer->add_option("--envelope-b", t_eb, "Agent B envelope");
    transfer->add_option("--convex-a", t_ca, "Agent A convex discount function");
    transfer->add_option("--convex-b", t_cb, "Agent B convex discount function");
    transfer->add_option("--grid-res", t_grid, "Exhaustive grid certificate resolution (n <= 3)");

    DynamicFlags df;
    bool dyn_dual = false;
    auto* dynamic = app.add_subcommand("dynamic", "BSDE on a binomial lattice");
    add_common(dynamic, false);
    add_dynamic_flags(dynamic, df);
    dynamic->add_flag("--dual", dyn_dual, "Recover the dual control and check it");

    std::string check_kind, m_grid = "-5:5:11";
    ReserveFlags cf;
    DynamicFlags cdf;
    std::optional<double> beta;
    std::optional<int> t1, t2;
    auto* check = app.add_subcommand("check", "Property checks");
    add_common(check, false);
    check->add_option("kind", check_kind, "subadd | comparison | time-consistency")
        ->required()
        ->check(CLI::IsMember({"subadd", "comparison", "time-consistency"}));
    check->add_option("--measure", cf.measure, "Base measure name");
    check->add_option("--position", cf.position, "Position name");
    check->add_option("--envelope", cf.envelope, "Discount envelope name");
    check->add_option("--convex", cf.convex, "Convex discount function name");
    check->add_option("--put-rate", cf.put_rate, "Gross rate for the put premium");
    check->add_option("--strike", cf.strike, "Put strike");
    check->add_option("--m-grid", m_grid, "Cash shifts lo:hi:count");
    add_dynamic_flags(check, cdf);
    check->add_option("--beta", beta, "Linear rate for the comparison generator");
    check->add_option("--t1", t1, "Earlier layer");
    check->add_option("--t2", t2, "Later layer");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, r;
        const int code = app.exit(e, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? 0 : static_cast<int>(ErrorKind::Parse);
    }

    const std::string echo = command_echo(args);
    Report report;
    std::string csv;
    try {
        std::string source;
        std::optional<ScenarioDocument> doc;
        if (!scenario_path.empty()) {
            source = read_file(scenario_path);
            doc = parse_scenario(source, scenario_path);
        }
        auto need_doc = [&]() -> const ScenarioDocument& {
            if (!doc) throw ValidationError("--scenario is required for this command");
            return *doc;
        };
        char digest[32];
        std::snprintf(digest, sizeof digest, "fnv1a64:%016" PRIx64, fnv1a64(source, fnv1a64(echo + '\n')));
        report.field("command", echo);
        if (doc) report.field("scenario", scenario_path);
        report.field("digest", digest);

        if (app.got_subcommand(reserve)) {
            const ScenarioDocument& d = need_doc();
            const Position& x = d.position(rf.position);
            const ResolvedReserve rr = resolve_reserve(d, rf);
            report.field("mode", rr.mode);
            report.value("reserve", rr.reserve(x));
            if (rr.mode == "envelope") {
                report.vector("worst_discount", worst_discount(d.envelope(rf.envelope), x).span());
            }
            if (rr.mode == "convex" && rep_res) {
                const GridValue gv = compose_representation(d.measure(rf.measure), d.convex_function(rf.convex), x,
                                                            *rep_res);
                report.value("representation", gv.value);
                report.value("representation_mesh", gv.mesh_bound);
            }
        } else if (app.got_subcommand(dual)) {
            const ScenarioDocument& d = need_doc();
            const Position& x = d.position(d_position);
            const RiskMeasureSpec& spec = d.measure(d_measure);
            const GridSpec grid(grid_res, grid_bound.value_or(4.0 * std::max(x.max_abs(), 1.0)));
            double primal = 0.0, dual_value = 0.0;
            if (d_envelope.empty()) {
                const PenaltyTable table = build_penalty_table(spec, d.size(), simplex_res, grid);
                primal = evaluate_rho(spec, x);
                dual_value = dual_evaluate(table, x);
                report.field("table", std::to_string(table.entries.size()) + " entries, " +
                                          (table.exact ? "exact" : "grid lower bounds"));
            } else {
                const DiscountEnvelope& env = d.envelope(d_envelope);
                primal = ambiguous_discount_reserve(spec, env, x);
                SubPenaltyTable table;
                if (const auto* lin = spec.get_if<Linear>()) {
                    table = envelope_vertex_table(env, lin->base);
                } else {
                    table = grid_penalty_table(envelope_reserve(spec, env), d.size(), simplex_res, grid);
                }
                dual_value = dual_evaluate_subprob(table, x);
                const NormalizedDual nd = normalized_dual(table, x);
                report.field("table", std::to_string(table.entries.size()) + " entries, " +
                                          (table.exact ? "exact" : "grid lower bounds"));
                report.value("mass", nd.mass);
            }
            report.value("primal", primal);
            report.value("dual", dual_value);
            report.value("gap", std::abs(primal - dual_value));
            if (dual_tol) report.status("round_trip", std::abs(primal - dual_value) <= *dual_tol);
        } else if (app.got_subcommand(bridge)) {
            const ScenarioDocument& d = need_doc();
            const RiskMeasureSpec& spec = d.measure(b_measure);
            const DiscountFactor& dfac = d.discount(b_discount);
            const BondQuote& bond = d.bond(b_bond);
            const Position& x = d.position(b_position);
            const double spot = evaluate_rho(spec, x);
            report.value("spot", spot);
            report.value("forward", forward_from_spot(spec, dfac, bond, x));
            if (dfac.bounded_away()) {
                const double back = spot_from_forward(forward_measure(spec, dfac, bond), dfac, bond, x);
                report.value("spot_round_trip", back);
                report.value("round_trip_gap", std::abs(back - spot));
            } else {
                report.field("spot_round_trip", "skipped (discount factor not bounded away from 0)");
            }
            const ForwardCalibrationReport cal = check_forward_calibration(spec, dfac, bond);
            report.value("calibration_gap", cal.max_gap);
            if (cal.failing_lambda) report.value("calibration_witness_lambda", *cal.failing_lambda);
            const auto witness = forward_cash_additivity_witness(spec, dfac, bond, x, {-2.0, -1.0, 1.0, 2.0});
            report.field("forward_cash_additive", witness ? "no (m = " + format_fixed(*witness) + ")" : "yes");
            if (b_strict) {
                report.status("calibration", cal.passed);
            } else {
                report.field("calibration", cal.passed ? "PASS" : "FAIL");
            }
        } else if (app.got_subcommand(transfer)) {
            const ScenarioDocument& d = need_doc();
            ReserveFlags fa{t_ma, t_xa, t_ea, t_ca, std::nullopt, 0.0};
            ReserveFlags fb{t_mb, t_xb, t_eb, t_cb, std::nullopt, 0.0};
            const ResolvedReserve ra = resolve_reserve(d, fa), rb = resolve_reserve(d, fb);
            DescentConfig config;
            config.grid_resolution = t_grid;
            const TransferSolution sol =
                solve_transfer({d.position(t_xa), d.position(t_xb), ra.reserve, rb.reserve}, config);
            report.field("mode", ra.mode + " / " + rb.mode);
            report.vector("contract", sol.contract.span());
            report.value("price", sol.price);
            report.value("residual", sol.residual);
            report.value("standalone", sol.standalone);
            report.field("non_unique", sol.diagnostics.non_unique ? "yes" : "no");
            if (sol.diagnostics.grid_value) {
                report.value("grid_value", *sol.diagnostics.grid_value);
                report.value("grid_mesh", sol.diagnostics.grid_mesh);
            }
        } else if (app.got_subcommand(dynamic)) {
            const DynamicSetup s = resolve_dynamic(df);
            const BsdeSolution sol = solve_bsde(s.lattice, s.generator, terminal_from_payoff(s.payoff));
            report.field("generator", s.generator.name());
            report.field("steps", std::to_string(s.lattice.steps));
            report.value("horizon", s.lattice.horizon);
            report.value("Y0", sol.root());
            report.value("Z0", sol.Z[0][0]);
            report.field("max_fixed_point_iterations", std::to_string(sol.max_iterations));
            std::optional<DualControl> control;
            if (dyn_dual) {
                control = dual_control_recovery(sol, s.generator, s.lattice);
                report.value("dual_gap", control->max_gap);
                report.status("dual_control", control->passed);
            }
            if (!out_path.empty()) {
                std::ostringstream csv_out;
                write_bsde_csv(csv_out, s.lattice, sol, control ? &*control : nullptr);
                csv = csv_out.str();
                report.field("csv", out_path);
            }
        } else if (app.got_subcommand(check)) {
            report.field("check", check_kind);
            if (check_kind == "subadd") {
                const ScenarioDocument& d = need_doc();
                if (cf.position.empty()) throw ValidationError("--position is required");
                const Position& x = d.position(cf.position);
                const ResolvedReserve rr = resolve_reserve(d, cf);
                const SubadditivityReport r = check_cash_subadditive(rr.reserve, x, parse_m_grid(m_grid));
                report.field("mode", rr.mode);
                report.value("max_violation", r.max_violation);
                if (r.witness) report.value("witness_m", *r.witness);
                report.status("result", r.passed());
            } else {
                const DynamicSetup s = resolve_dynamic(cdf);
                const Vector terminal = terminal_from_payoff(s.payoff);
                if (check_kind == "comparison") {
                    const double b = beta.value_or(cdf.rate_low);
                    const ComparisonReport r = comparison_check(s.generator, GeneratorSpec::linear({b}), terminal,
                                                                terminal, s.lattice);
                    if (!r.precondition_ok) {
                        report.field("precondition", r.precondition_note);
                        report.status("result", false);
                    } else {
                        report.value("min_gap", r.min_gap);
                        report.field("violations", std::to_string(r.violations));
                        report.status("result", r.passed);
                    }
                } else {
                    const int a = t1.value_or(0), b = t2.value_or(s.lattice.steps / 2);
                    const TimeConsistencyReport r = time_consistency_check(s.generator, terminal, a, b, s.lattice);
                    report.value("max_gap", r.max_gap);
                    report.status("result", r.passed);
                }
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Numeric);
    }

    if (!csv.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f || !(f << csv)) {
            err << "error: cannot write " << out_path << '\n';
            return static_cast<int>(ErrorKind::Validation);
        }
    }
    out << report.text();
    return report.all_passed() ? 0 : kExitCheckFailed;
}

}  // namespace subcash

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "subcash/bsde.hpp"
#include "subcash/commands.hpp"
#include "subcash/errors.hpp"
#include "subcash/spot_forward.hpp"
#include "subcash/subadditive.hpp"
#include "subcash/transfer.hpp"

namespace py = pybind11;
using namespace subcash;

namespace {

Functional reserve_for(const RiskMeasureSpec& spec, const std::optional<std::pair<Vector, Vector>>& env) {
    if (!env) return [spec](const Position& x) { return evaluate_rho(spec, x); };
    return envelope_reserve(spec, DiscountEnvelope(DiscountFactor(env->first), DiscountFactor(env->second)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cash sub-additive risk measures under ambiguous discounting.";

    auto base = py::register_exception<Error>(m, "SubcashError");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<CapacityError>(m, "CapacityError", base.ptr());

    py::class_<RiskMeasureSpec>(m, "RiskMeasure")
        .def_static("worst_case", &RiskMeasureSpec::worst_case)
        .def_static("linear", [](Vector q) { return RiskMeasureSpec::linear(ProbabilityWeights(std::move(q))); },
                    py::arg("q"))
        .def_static(
            "entropic",
            [](Vector q, double gamma) { return RiskMeasureSpec::entropic(ProbabilityWeights(std::move(q)), gamma); },
            py::arg("q"), py::arg("temperature"))
        .def_static(
            "robust",
            [](const std::vector<std::pair<Vector, double>>& members) {
                std::vector<RobustMember> out;
                for (const auto& [q, a] : members) out.push_back({ProbabilityWeights(q), a});
                return RiskMeasureSpec::robust(std::move(out));
            },
            py::arg("members"))
        .def_property_readonly("name", &RiskMeasureSpec::name)
        .def("__call__", [](const RiskMeasureSpec& s, Vector x) { return evaluate_rho(s, Position(std::move(x))); })
        .def("__repr__", [](const RiskMeasureSpec& s) { return "<RiskMeasure " + s.name() + ">"; });

    m.def(
        "ambiguous_discount_reserve",
        [](const RiskMeasureSpec& rho0, Vector low, Vector high, Vector x) {
            return ambiguous_discount_reserve(
                rho0, DiscountEnvelope(DiscountFactor(std::move(low)), DiscountFactor(std::move(high))),
                Position(std::move(x)));
        },
        py::arg("rho0"), py::arg("low"), py::arg("high"), py::arg("x"));

    m.def(
        "put_premium",
        [](Vector p, double r, Vector x, double strike) {
            return put_premium(ProbabilityWeights(std::move(p)), r, Position(std::move(x)), strike);
        },
        py::arg("p"), py::arg("gross_rate"), py::arg("x"), py::arg("strike") = 0.0);

    m.def(
        "forward_from_spot",
        [](const RiskMeasureSpec& rho0, Vector d, double b, Vector x) {
            return forward_from_spot(rho0, DiscountFactor(std::move(d)), BondQuote(b), Position(std::move(x)));
        },
        py::arg("rho0"), py::arg("d"), py::arg("bond"), py::arg("x"));

    m.def(
        "spot_from_forward",
        [](const RiskMeasureSpec& rhoT, Vector d, double b, Vector y) {
            return spot_from_forward(rhoT, DiscountFactor(std::move(d)), BondQuote(b), Position(std::move(y)));
        },
        py::arg("rho_t"), py::arg("d"), py::arg("bond"), py::arg("y"));

    m.def(
        "transfer",
        [](const RiskMeasureSpec& a, const RiskMeasureSpec& b, Vector xa, Vector xb,
           std::optional<std::pair<Vector, Vector>> env_a, std::optional<std::pair<Vector, Vector>> env_b) {
            const TransferSolution s = solve_transfer(
                {Position(std::move(xa)), Position(std::move(xb)), reserve_for(a, env_a), reserve_for(b, env_b)});
            py::dict out;
            out["contract"] = s.contract.values();
            out["price"] = s.price;
            out["residual"] = s.residual;
            out["standalone"] = s.standalone;
            out["non_unique"] = s.diagnostics.non_unique;
            return out;
        },
        py::arg("measure_a"), py::arg("measure_b"), py::arg("exposure_a"), py::arg("exposure_b"),
        py::arg("envelope_a") = py::none(), py::arg("envelope_b") = py::none());

    m.def(
        "solve_bsde",
        [](int steps, double horizon, double rate_low, double rate_high, Vector payoff) {
            const Lattice l = build_lattice(steps, horizon);
            const BsdeSolution s =
                solve_bsde(l, ambiguous_rate_generator({rate_low}, {rate_high}), terminal_from_payoff(payoff));
            py::dict out;
            out["Y0"] = s.root();
            out["Y"] = s.Y;
            out["iterations"] = s.max_iterations;
            return out;
        },
        py::arg("steps"), py::arg("horizon"), py::arg("rate_low"), py::arg("rate_high"), py::arg("payoff"),
        "Ambiguous-rate BSDE with terminal -payoff; returns Y on every layer.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a subcash subcommand in process; returns (exit_code, stdout, stderr).");
}

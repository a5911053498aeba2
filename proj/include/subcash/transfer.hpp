#pragma once

// Optimal risk transfer between two agents with cash sub-additive reserves:
// indifference pricing and the inf-convolution
//   (R_A [] R_B)(Psi) = inf_F { R_A(Psi - F) + R_B(F) }.

#include <optional>
#include <string>
#include <vector>

#include "subcash/errors.hpp"
#include "subcash/scenario.hpp"
#include "subcash/subadditive.hpp"

namespace subcash {

struct DescentConfig {
    int max_sweeps = 500;
    double value_tol = 1e-12;   // stop once a sweep improves less than this
    double line_tol = 1e-12;    // golden-section bracket width, relative to the box
    double box = 0.0;           // initial half-width of the line search; 0 = 4 max(|Psi|, 1)
    int unbounded_doublings = 3;
    bool pair_directions = true;  // also search along e_i +- e_j and the ones vector
    /// Exhaustive grid certificate for n <= 3; resolution 0 disables it.
    int grid_resolution = 0;
    double grid_bound = 0.0;    // 0 = box
};

/// Thrown when the objective keeps decreasing along a ray, i.e. R_A [] R_B is
/// not bounded below and the transfer problem has no finite value.
struct UnboundedError : NumericError {
    explicit UnboundedError(const std::string& what) : NumericError(what) {}
};

struct InfConvolution {
    double value;
    Position minimizer;         // F*
    bool non_unique;            // a flat direction was detected at F*
    int sweeps;
    std::optional<double> grid_value;  // exhaustive certificate, when requested
    double grid_mesh = 0.0;            // grid_value - value is at most this
};

/// pi*(H) = R_B(X_B) - R_B(X_B + H).
double indifference_price(const Functional& reserve_b, const Position& exposure_b, const Position& h);

/// Coordinate descent with golden-section line searches, restarted from
/// 0, Psi/2 and `extra_start`. Throws UnboundedError or NumericError.
InfConvolution inf_convolution(const Functional& reserve_a, const Functional& reserve_b, const Position& psi,
                               const DescentConfig& config = {},
                               const std::optional<Position>& extra_start = std::nullopt);

/// Generic convex minimizer behind inf_convolution, exposed for the extended
/// (F, x) problem.
struct Minimum {
    double value;
    Vector argmin;
    bool non_unique;
    int sweeps;
};
Minimum minimize_convex(const std::function<double(const Vector&)>& objective, std::vector<Vector> starts,
                        double box, const DescentConfig& config);

struct TransferProblem {
    Position exposure_a;
    Position exposure_b;
    Functional reserve_a;
    Functional reserve_b;
};

struct TransferSolution {
    Position contract;  // H* = F* - X_B
    double price;       // pi*(H*)
    double residual;    // R_{A,B}(X_A, X_B)
    double standalone;  // R_A(X_A) + R_B(X_B)
    InfConvolution diagnostics;
};

TransferSolution solve_transfer(const TransferProblem& problem, const DescentConfig& config = {});

struct PenaltySumReport {
    bool precondition_ok = true;  // R_{A,B}(0) > -inf
    std::string precondition_note;
    double max_gap = 0.0;          // over entries where alpha_A + alpha_B is finite
    std::size_t finite_entries = 0;
    std::size_t infinite_entries = 0;
    double mesh_bound = 0.0;
    bool passed = false;
};

/// Brute-force alpha_{A,B}(mu) = sup_X { mu(-X) - R_{A,B}(X) } over the
/// position grid, against alpha_A(mu) + alpha_B(mu) on `mu_grid`.
PenaltySumReport penalty_sum_check(const std::function<double(const SubProbability&)>& alpha_a,
                                   const std::function<double(const SubProbability&)>& alpha_b,
                                   const Functional& conv_value, const std::vector<SubProbability>& mu_grid,
                                   const GridSpec& positions, double tol);

struct HatEquivalenceReport {
    double direct;    // inf-convolution on X
    double extended;  // inf-convolution of the cash additive extensions
    double gap;
    bool passed;
};

/// Minimizes rho_hat_A((Psi, 0) - (F, x)) + rho_hat_B((F, x)) over (F, x) and
/// compares with the direct inf-convolution.
HatEquivalenceReport hat_equivalence_check(const Functional& reserve_a, const Functional& reserve_b,
                                           const Position& psi, const DescentConfig& config = {},
                                           double tol = 1e-6);

}  // namespace subcash

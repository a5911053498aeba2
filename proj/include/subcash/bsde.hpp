#pragma once

// Dynamic g-conditional risk measures on a recombining binomial lattice.
// Y solves -dY = g(t, Y, Z) dt - Z dW backwards from a terminal layer; with
// terminal -X, Y_t is the conditional reserve of X.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "subcash/scenario.hpp"

namespace subcash {

struct Lattice {
    int steps;
    double horizon;
    double dt;
    double sqrt_dt;

    double W(int layer, int node) const { return (2.0 * node - layer) * sqrt_dt; }
    double time(int layer) const { return layer * dt; }
    /// Probability of reaching node j at layer i (binomial weight).
    double node_probability(int layer, int node) const;
};

Lattice build_lattice(int steps, double horizon);

/// g(step, y, z), step in [0, N).
using GeneratorFn = std::function<double(int, double, double)>;

/// g(t, y) = R_t y^- - r_t y^+.
struct AmbiguousRate {
    Vector low;   // r, one value per step or a single constant
    Vector high;  // R
};

/// g(t, y) = -beta_t y.
struct LinearRate {
    Vector beta;
};

struct CustomGenerator {
    GeneratorFn g;
    bool declared_convex_decreasing = true;
};

class GeneratorSpec {
public:
    using Kind = std::variant<AmbiguousRate, LinearRate, CustomGenerator>;

    static GeneratorSpec linear(Vector beta);
    static GeneratorSpec custom(GeneratorFn g, double lipschitz_y, double growth_z, bool convex_decreasing = true);
    static GeneratorSpec zero() { return linear({0.0}); }

    double operator()(int step, double y, double z) const;
    /// C: Lipschitz constant in y, also the upper end of the admissible beta range.
    double lipschitz() const { return lipschitz_; }
    double growth() const { return growth_; }
    const Kind& kind() const { return kind_; }
    template <class T>
    const T* get_if() const { return std::get_if<T>(&kind_); }
    std::string name() const;

    /// Throws ValidationError unless every rate path has length 1 or `steps`.
    void check_steps(int steps) const;

private:
    GeneratorSpec(Kind kind, double lipschitz, double growth)
        : kind_(std::move(kind)), lipschitz_(lipschitz), growth_(growth) {}
    friend GeneratorSpec ambiguous_rate_generator(Vector low, Vector high);

    Kind kind_;
    double lipschitz_;
    double growth_;
};

/// Requires 0 <= r <= R per step; C = max R, k = 0.
GeneratorSpec ambiguous_rate_generator(Vector low, Vector high);

/// Rate at `step` of a path stored as one value per step or a single constant.
double rate_at(const Vector& path, int step);

struct BsdeSolution {
    int first_layer;                // earliest layer solved
    int last_layer;                 // layer holding the supplied terminal values
    std::vector<Vector> Y;          // Y[i] has i + 1 entries for first_layer <= i <= last_layer
    std::vector<Vector> Z;          // Z[i] for i < last_layer; Z[last_layer] is empty
    int max_iterations = 0;         // most fixed-point iterations used at any node
    double tolerance = 0.0;

    double root() const { return Y.at(first_layer).front(); }
};

constexpr double kFixedPointTol = 1e-13;
constexpr int kFixedPointMaxIter = 200;

/// Full backward induction from layer N to layer 0.
BsdeSolution solve_bsde(const Lattice& l, const GeneratorSpec& g, const Vector& terminal);

/// Backward induction from `values` at layer `from` down to layer `to`.
BsdeSolution solve_between(const Lattice& l, const GeneratorSpec& g, const Vector& values, int from, int to);

/// -X for a payoff given per terminal node.
Vector terminal_from_payoff(const Vector& payoff);

struct NodeRef {
    int layer;
    int node;
};

struct ComparisonReport {
    bool precondition_ok = true;
    std::string precondition_note;
    double min_gap = 0.0;  // min over nodes of Y1 - Y2
    std::size_t violations = 0;
    std::optional<NodeRef> first_violation;
    bool passed = false;
};

ComparisonReport comparison_check(const GeneratorSpec& g1, const GeneratorSpec& g2, const Vector& term1,
                                  const Vector& term2, const Lattice& l, double tol = 1e-12);

struct DynamicSubadditivityReport {
    bool precondition_ok = true;
    std::string precondition_note;
    double max_violation = 0.0;
    std::optional<NodeRef> witness;
    bool passed = false;
};

/// Samples g on a (y, z) grid; false if g increases in y anywhere sampled.
bool sampled_decreasing_in_y(const GeneratorSpec& g, int steps);

/// Y_t(X + m) + m must be nondecreasing in m at every node. `payoff` is X on
/// the terminal layer; `m_grid` must be sorted.
DynamicSubadditivityReport dynamic_subadditivity_check(const GeneratorSpec& g, const Vector& payoff,
                                                       const std::vector<double>& m_grid, const Lattice& l,
                                                       double tol = 1e-10);

struct TimeConsistencyReport {
    double max_gap;
    bool passed;
};

TimeConsistencyReport time_consistency_check(const GeneratorSpec& g, const Vector& terminal, int t1, int t2,
                                             const Lattice& l, double tol = 1e-12);

struct DualControl {
    std::vector<Vector> beta_bar;  // per interior layer
    std::vector<Vector> mu_bar;    // zero for z-free generators
    std::vector<Vector> y_hat;     // discounted-expectation recomputation, all layers
    double max_gap;                // max |Y_hat - Y|
    bool passed;
};

/// beta_bar = R where Y <= 0 and r where Y > 0, then Y_hat by implicit
/// discounting. Only for AmbiguousRate and LinearRate generators.
DualControl dual_control_recovery(const BsdeSolution& sol, const GeneratorSpec& g, const Lattice& l,
                                  double tol = 1e-10);

struct FenchelGrid {
    double y_bound = 10.0;
    double z_bound = 10.0;
    int resolution = 201;
};

struct FenchelValue {
    double value;
    bool exact;
    double lower_bound;  // -|g(t,0,0)| + mu^2 / (2k), or -|g(t,0,0)| when k = 0
    bool bound_holds;
};

/// G(t, beta, mu) = sup_{y,z} { -beta y - mu z - g(t, y, z) }.
FenchelValue fenchel_G(const GeneratorSpec& g, int step, double beta, double mu, const FenchelGrid& grid = {});

/// Per-node CSV: step,node_index,W,Y,Z[,beta_bar]. Z and beta_bar are empty on
/// the terminal layer.
void write_bsde_csv(std::ostream& out, const Lattice& l, const BsdeSolution& sol,
                    const DualControl* control = nullptr);

}  // namespace subcash

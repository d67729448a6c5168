#pragma once

#include <optional>
#include <vector>

#include "bpc/model.hpp"
#include "bpc/quadrature.hpp"
#include "bpc/simplex.hpp"

namespace bpc {

enum class Action : unsigned char { Stop, Continue };

enum class InitKind { LowerT, UpperU };

struct SolverOptions {
    double epsilon = 1e-4;
    int max_iterations = 20000;
    int quadrature_nodes = 96;
    double quadrature_range_sigmas = 8.0;
    bool accelerate = true;
    InitKind init = InitKind::LowerT;
    int workers = 1;
};

struct SweepTrace {
    int iteration = 0;
    double sup_delta = 0.0;
    long evaluated = 0;
    long skipped = 0;
    long stop_count = 0;
    double min_change = 0.0;  // min over points of V_new - V_old
    double max_change = 0.0;
    long region_entered = 0;  // Continue -> Stop switches
    long region_left = 0;     // Stop -> Continue switches
    double max_lower_violation = 0.0;  // max over points of (-Pi T) - V
    double max_upper_violation = 0.0;  // max over points of V - (-Pi U); absorbing models only
};

struct SolveStats {
    int iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
    long evaluated = 0;
    long skipped = 0;
    double seconds = 0.0;
};

struct Solution {
    ValueField field;
    std::vector<Action> actions;
    Vec stop_values;  // -Pi T per grid point
    SolveStats stats;
    std::vector<SweepTrace> traces;
    std::optional<double> certified_gap;
    bool do_not_initiate = false;

    explicit Solution(const SimplexGrid& grid) : field(grid) {}
};

struct CertifiedSolution {
    Solution lower;
    Solution upper;
    double gap = 0.0;
    long region_inclusion_violations = 0;  // grid points stopping in upper but not lower
};

// Precomputed sweep operator: for every grid point, the Bayes posteriors at
// all quadrature nodes are resolved once into sparse interpolation rows, so
// one sweep is a sparse matrix-vector product.
class ContinuationOperator {
  public:
    ContinuationOperator(const DecisionModel& model, const SimplexGrid& grid,
                         const SolverOptions& options);

    const SimplexGrid& grid() const { return *grid_; }
    double stop_value(int point) const { return stop_values_[point]; }
    double evaluate(const Vec& field_values, int point) const;
    const Vec& stop_values() const { return stop_values_; }

  private:
    const SimplexGrid* grid_;
    Vec stop_values_;
    Vec immediate_;  // rh - Pi q - d per point
    struct Entry {
        int index;
        double coeff;
    };
    std::vector<Entry> entries_;
    std::vector<size_t> offsets_;
};

// One-interval continuation value at an arbitrary belief, by direct quadrature.
double continuation_value(const DecisionModel& model, const ValueField& field, const Belief& belief,
                          const SolverOptions& options);
double continuation_value(const Model& model, const ValueField& field, const Belief& belief,
                          const SolverOptions& options);

struct SweepResult {
    ValueField field;
    std::vector<Action> actions;
    long evaluated = 0;
    long skipped = 0;
};

// Jacobi update of every grid point against the old field.
SweepResult sweep(const Model& model, const ValueField& field, const SolverOptions& options);

// Row-traversal sweep that skips quadrature beyond the previous control
// limit once the stop action is confirmed at the switch point.
SweepResult accelerated_sweep(const Model& model, const ValueField& field,
                              const std::vector<Action>& previous_actions,
                              const SolverOptions& options);

Solution solve(const Model& model, const SimplexGrid& grid, const SolverOptions& options);

// Value iteration for a generalized decision model (used by the simulator
// for chains with inter-transitions); lower initialization only.
Solution solve(const DecisionModel& model, const SimplexGrid& grid, const SolverOptions& options);

// Dual-bound run: lower- and upper-initialized iterations bracketing the
// fixed point from opposite directions.
CertifiedSolution certified_solve(const Model& model, const SimplexGrid& grid,
                                  const SolverOptions& options);

}  // namespace bpc

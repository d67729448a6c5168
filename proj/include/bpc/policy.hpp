#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpc/solver.hpp"

namespace bpc {

// Control-limit table for one cause: one entry per line of constant
// Pi_(-i), holding the smallest pi_i at which the action is Stop.
struct LimitTable {
    int cause = 0;  // i in 1..N
    struct Row {
        std::vector<int> fixed;  // t_j for j != 0, j != i
        std::optional<double> limit;  // smallest stopping pi_i; nullopt if the line never stops
    };
    std::vector<Row> rows;
};

struct Policy {
    const SimplexGrid* grid = nullptr;
    std::vector<Action> actions;
    Vec values;       // converged value field, used to resolve mixed cells in decide()
    Vec stop_values;  // -Pi T per grid point
    std::vector<LimitTable> limits;
    bool do_not_initiate = false;
};

struct StructureReport {
    long single_switch_violations = 0;
    long monotonicity_violations = 0;
    long convexity_violations = 0;
    bool stop_connected = true;
    bool continue_connected = true;
    int grid_resolution = 0;
    std::vector<std::string> details;
};

// Builds the control-limit tables from a converged solution. Throws
// ValidationError for unconverged input.
Policy extract(const Solution& solution);

StructureReport verify_structure(const Policy& policy);

Action decide(const Policy& policy, const Belief& belief);

}  // namespace bpc

#pragma once

#include <optional>
#include <vector>

#include "bpc/policy.hpp"
#include "bpc/solver.hpp"

namespace bpc {

struct IntervalAnalysis {
    std::optional<std::pair<double, double>> feasible;  // maximal interval with R0(h) <= T0
    struct CurvePoint {
        double h = 0.0;
        double reward = 0.0;       // V(e_0) at this h
        double upper_bound = 0.0;  // -R0(h)
        double lower_bound = 0.0;  // -T0
        bool solved = false;
        std::string error;
    };
    std::vector<CurvePoint> curve;
    std::optional<double> h_star;  // argmax of reward over solved points, ties to smaller h
};

// Closed-form perfect-information reward bound R0 as a function of the
// sampling interval, holding the rest of the spec fixed.
double r0_of_h(const ModelSpec& spec, double h);

// All brackets where R0(h) - T0 changes sign on [h_min, h_max], refined by
// bisection to relative tolerance 1e-3.
std::vector<std::pair<double, double>> feasible_brackets(const ModelSpec& spec, double h_min,
                                                         double h_max, int scan_points = 1000);

// Maximal subinterval of [h_min, h_max] where R0(h) <= T0, if any.
std::optional<std::pair<double, double>> feasible_interval(const ModelSpec& spec, double h_min,
                                                           double h_max, int scan_points = 1000);

// Solves the model at each h and records V(e_0) with the bound curves.
// Infeasible h values are recorded with reward -T0 and not solved when
// enforce_feasibility is set.
IntervalAnalysis optimize_h(const ModelSpec& spec, const std::vector<double>& h_values, int resolution,
                            const SolverOptions& options, bool enforce_feasibility = true);

}  // namespace bpc

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpc/policy.hpp"

namespace bpc {

// True process used by the Monte Carlo: the base spec plus optional
// transition rates between out-of-control states (zero matrix recovers the
// absorbing assumption of the decision model).
struct TrueProcessSpec {
    ModelSpec base;
    Matrix inter_rates;  // N x N, diagonal zero

    static TrueProcessSpec absorbing(ModelSpec spec);
};

void validate_true_spec(const TrueProcessSpec& spec);

// CTMC generator of the true process over states 0..N.
Matrix true_generator(const TrueProcessSpec& spec);

// One-interval decision model for the true dynamics (transition matrix by
// matrix exponential, expected occupancy costs by its integral). Used to
// solve charts for processes with inter-transitions.
DecisionModel true_decision_model(const TrueProcessSpec& spec);

struct SimResult {
    double mean_reward = 0.0;
    double ci_halfwidth = 0.0;  // 95%, normal approximation
    long n_reps = 0;
    double mean_stop_time = 0.0;  // sampling epochs
    double false_alarm_rate = 0.0;
    uint64_t seed = 0;
    long truncated = 0;  // replications cut at the horizon cap
};

struct SimOptions {
    long n_reps = 10000;
    uint64_t seed = 1;
    long horizon_cap = 100000;  // epochs per replication
    int workers = 1;
};

// Runs the policy on the true process. Beliefs are propagated with the
// supplied (design) decision model; rewards accrue from exact state
// occupancy times of the simulated chain.
SimResult simulate(const TrueProcessSpec& true_spec, const DecisionModel& belief_model,
                   const Policy& policy, const SimOptions& options);

struct MismatchRow {
    std::string label;
    SimResult approx;                    // design chart on the true process
    double exact_reward = 0.0;           // chart built from the true parameters
    bool exact_is_simulated = false;     // true for inter-transition rows
    std::optional<SimResult> exact_sim;  // present when exact_is_simulated
    double error_pct = 0.0;
    std::string error;  // per-row failure, empty on success
};

struct LabeledTrueSpec {
    std::string label;
    TrueProcessSpec spec;
};

std::vector<MismatchRow> mismatch_sweep(const ModelSpec& design_spec,
                                        const std::vector<LabeledTrueSpec>& true_specs, int resolution,
                                        const SolverOptions& solver_options, const SimOptions& sim_options);

}  // namespace bpc

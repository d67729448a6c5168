#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpc/common.hpp"

namespace bpc {

// Gaussian observation density. The second parameter is the variance,
// not the standard deviation (the shifted means mu + delta*sigma in the
// reference configurations only make sense under that reading).
struct NormalDensity {
    double mean = 0.0;
    double variance = 1.0;

    double operator()(double y) const;
    double support_lo(double n_sigmas) const;
    double support_hi(double n_sigmas) const;
};

struct ModelSpec {
    int n_causes = 0;               // N
    Vec rates;                      // lambda_i, size N
    Vec oc_costs;                   // c_i per unit time, size N (c_0 = 0 implicit)
    Vec term_costs;                 // T_0..T_N, size N+1
    double reward_rate = 0.0;       // r
    double sample_cost = 0.0;       // d
    double interval = 0.0;          // h
    std::vector<NormalDensity> densities;  // f_0..f_N, size N+1

    // Convenience constructor for the shift parameterization: state-i mean
    // is mu + delta_i * sigma, in-control mean is mu, common variance sigma^2.
    static ModelSpec with_shifts(Vec rates, Vec oc_costs, Vec term_costs, double reward_rate,
                                 double sample_cost, double interval, const Vec& deltas, double mu,
                                 double sigma);
};

struct Belief {
    Vec p;

    static Belief vertex(int i, int n_states);
    int n_states() const { return static_cast<int>(p.size()); }
    bool valid(double tol = 1e-12) const;
};

// State view the value-iteration core operates on. The absorbing-cause
// Model below provides one in closed form; the simulator also builds one
// numerically for chains with inter-transitions between out-of-control states.
struct DecisionModel {
    Matrix P;                        // one-interval transition matrix, row stochastic
    Vec interval_oc_cost;            // per start state: expected out-of-control cost over one interval
    Vec term_costs;                  // T
    double reward_rate = 0.0;
    double sample_cost = 0.0;
    double interval = 0.0;
    std::vector<NormalDensity> densities;

    int n_states() const { return P.rows; }
    double stop_value(const Belief& belief) const;        // -Pi T
    double continue_immediate(const Belief& belief) const;  // rh - Pi q - d
};

enum class ActionHint { Stop, Continue, Unknown };

struct Model {
    ModelSpec spec;
    Matrix P;
    Matrix Q;
    double gamma = 0.0;
    double lambda_total = 0.0;
    Vec lambda_vec;                 // (0, lambda_1/lambda, ..., lambda_N/lambda)
    double r0 = 0.0;
    Vec upper_costs;                // U = (R0, T_1, ..., T_N)
    bool do_not_initiate = false;   // R0 > T0

    int n_states() const { return spec.n_causes + 1; }
    DecisionModel decision_model() const;
};

// Validates the spec and computes all closed-form derived quantities.
// Throws ValidationError naming the offending field.
Model validate_and_build(const ModelSpec& spec);

// Posterior after one interval and observation y. Throws NumericalError
// when the predictive density underflows to zero.
Belief bayes_update(const Model& model, const Belief& belief, double y);
Belief bayes_update(const DecisionModel& model, const Belief& belief, double y);

// Pi P F(y), the density of the next observation given the current belief.
double predictive_density(const Model& model, const Belief& belief, double y);
double predictive_density(const DecisionModel& model, const Belief& belief, double y);

// Closed-form sufficient conditions for the optimal action at a belief.
ActionHint sufficient_action(const Model& model, const Belief& belief);

}  // namespace bpc

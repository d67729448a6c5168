#pragma once

// Shared reference configurations used across the test binaries.

#include <cmath>

#include "bpc/model.hpp"

namespace refs {

// Two-cause chart: r=5, T=(50,60,100), c=(10,20), rates (0.01,0.02),
// unit interval, shifts (-1,+2) in sigma units with sigma = sqrt(2).
inline bpc::ModelSpec two_cause() {
    return bpc::ModelSpec::with_shifts({0.01, 0.02}, {10.0, 20.0}, {50.0, 60.0, 100.0}, 5.0, 0.0,
                                       1.0, {-1.0, 2.0}, 0.0, std::sqrt(2.0));
}

// Three-cause chart: T=(50,60,70,80), c=(10,15,20), rates (0.01,0.02,0.03),
// shifts (-1, 1.5, 3) with sigma = sqrt(2).
inline bpc::ModelSpec three_cause() {
    return bpc::ModelSpec::with_shifts({0.01, 0.02, 0.03}, {10.0, 15.0, 20.0},
                                       {50.0, 60.0, 70.0, 80.0}, 5.0, 0.0, 1.0, {-1.0, 1.5, 3.0},
                                       0.0, std::sqrt(2.0));
}

// Low-margin chart used for the sampling-interval study: r=0.5, c=(1,2),
// T=(5,6,10), rates (0.01,0.02).
inline bpc::ModelSpec interval_study(double sample_cost = 0.0, double interval = 1.0) {
    return bpc::ModelSpec::with_shifts({0.01, 0.02}, {1.0, 2.0}, {5.0, 6.0, 10.0}, 0.5, sample_cost,
                                       interval, {-1.0, 2.0}, 0.0, std::sqrt(2.0));
}

// Sensitivity-study design chart: r=5, T=(10,20,30), c=(10,15), rates
// (0.01,0.02), shifts (-1,+2) with unit sigma.
inline bpc::ModelSpec sensitivity_design() {
    return bpc::ModelSpec::with_shifts({0.01, 0.02}, {10.0, 15.0}, {10.0, 20.0, 30.0}, 5.0, 0.0,
                                       1.0, {-1.0, 2.0}, 0.0, 1.0);
}

// Single-cause chart for threshold-reduction checks.
inline bpc::ModelSpec single_cause() {
    return bpc::ModelSpec::with_shifts({0.02}, {10.0}, {10.0, 30.0}, 5.0, 0.0, 1.0, {2.0}, 0.0,
                                       1.0);
}

}  // namespace refs

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bpc/simulate.hpp"
#include "bpc/solver.hpp"
#include "reference_configs.hpp"

using namespace bpc;

TEST_CASE("true spec validation") {
    TrueProcessSpec spec = TrueProcessSpec::absorbing(refs::sensitivity_design());
    CHECK_NOTHROW(validate_true_spec(spec));

    spec.inter_rates(0, 0) = 0.1;
    CHECK_THROWS_AS(validate_true_spec(spec), ValidationError);
    spec.inter_rates(0, 0) = 0.0;
    spec.inter_rates(0, 1) = -0.5;
    CHECK_THROWS_AS(validate_true_spec(spec), ValidationError);
    spec.inter_rates = Matrix(1, 1);
    CHECK_THROWS_AS(validate_true_spec(spec), ValidationError);
}

TEST_CASE("generator and one-interval model match the absorbing closed form") {
    const ModelSpec base = refs::sensitivity_design();
    const TrueProcessSpec spec = TrueProcessSpec::absorbing(base);
    const Model m = validate_and_build(base);
    const DecisionModel closed = m.decision_model();
    const DecisionModel numeric = true_decision_model(spec);

    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(numeric.P(i, j) == doctest::Approx(closed.P(i, j)).epsilon(1e-12));
    for (int i = 0; i < 3; ++i)
        CHECK(numeric.interval_oc_cost[i] ==
              doctest::Approx(closed.interval_oc_cost[i]).epsilon(1e-10));
}

TEST_CASE("stop-everywhere policy yields the initial terminal cost exactly") {
    const ModelSpec base = refs::interval_study(0.0, 25.0);  // do-not-initiate
    const Model m = validate_and_build(base);
    REQUIRE(m.do_not_initiate);
    const SimplexGrid grid = build_grid(2, 10);
    const Solution sol = solve(m, grid, SolverOptions{});
    const Policy policy = extract(sol);

    SimOptions opts;
    opts.n_reps = 500;
    const SimResult r =
        simulate(TrueProcessSpec::absorbing(base), m.decision_model(), policy, opts);
    CHECK(r.mean_reward == -base.term_costs[0]);
    CHECK(r.ci_halfwidth == 0.0);
    CHECK(r.mean_stop_time == 0.0);
    CHECK(r.truncated == 0);
}

TEST_CASE("same seed gives identical results independent of worker count") {
    const ModelSpec base = refs::sensitivity_design();
    const Model m = validate_and_build(base);
    const SimplexGrid grid = build_grid(2, 30);
    const Solution sol = solve(m, grid, SolverOptions{});
    const Policy policy = extract(sol);
    const TrueProcessSpec spec = TrueProcessSpec::absorbing(base);

    SimOptions a;
    a.n_reps = 2000;
    a.seed = 42;
    a.workers = 1;
    SimOptions b = a;
    b.workers = 4;
    const SimResult ra = simulate(spec, m.decision_model(), policy, a);
    const SimResult rb = simulate(spec, m.decision_model(), policy, b);
    CHECK(ra.mean_reward == rb.mean_reward);
    CHECK(ra.ci_halfwidth == rb.ci_halfwidth);
    CHECK(ra.mean_stop_time == rb.mean_stop_time);
    CHECK(ra.false_alarm_rate == rb.false_alarm_rate);

    SimOptions c = a;
    c.seed = 43;
    const SimResult rc = simulate(spec, m.decision_model(), policy, c);
    CHECK(rc.mean_reward != ra.mean_reward);
}

TEST_CASE("matched simulation reproduces the solved value at the clean-start vertex") {
    const ModelSpec base = refs::sensitivity_design();
    const Model m = validate_and_build(base);
    const SimplexGrid grid = build_grid(2, 60);
    SolverOptions sopts;
    sopts.workers = 2;
    const Solution sol = solve(m, grid, sopts);
    REQUIRE(sol.stats.converged);
    const Policy policy = extract(sol);
    std::vector<int> e0{60, 0, 0};
    const double v0 = sol.field.values[grid.index_of(e0.data())];

    SimOptions opts;
    opts.n_reps = 40000;
    opts.seed = 7;
    opts.workers = 4;
    const SimResult r =
        simulate(TrueProcessSpec::absorbing(base), m.decision_model(), policy, opts);
    // Discretization bias plus Monte Carlo noise; both are small here.
    CHECK(std::fabs(r.mean_reward - v0) <= 3.0 * r.ci_halfwidth + 1.0);
    CHECK(r.false_alarm_rate >= 0.0);
    CHECK(r.false_alarm_rate <= 1.0);
    CHECK(r.truncated == 0);
}

TEST_CASE("mismatch sweep: matched row has negligible error, mismatched rows stay ordered") {
    const ModelSpec design = refs::sensitivity_design();
    std::vector<LabeledTrueSpec> rows;
    rows.push_back({"matched", TrueProcessSpec::absorbing(design)});
    TrueProcessSpec inter = TrueProcessSpec::absorbing(design);
    inter.inter_rates(0, 1) = 0.08;
    rows.push_back({"inter_0.08", inter});

    SolverOptions sopts;
    sopts.workers = 2;
    SimOptions simopts;
    simopts.n_reps = 20000;
    simopts.seed = 3;
    simopts.workers = 4;
    const auto table = mismatch_sweep(design, rows, 50, sopts, simopts);
    REQUIRE(table.size() == 2);

    CHECK(table[0].error.empty());
    CHECK_FALSE(table[0].exact_is_simulated);
    // Matched chart: simulated reward against the solved value.
    CHECK(std::fabs(table[0].approx.mean_reward - table[0].exact_reward) <=
          3.0 * table[0].approx.ci_halfwidth + 1.0);
    CHECK(std::fabs(table[0].error_pct) < 3.0);

    CHECK(table[1].error.empty());
    CHECK(table[1].exact_is_simulated);
    REQUIRE(table[1].exact_sim.has_value());
    // Mismatched chart cannot beat the matched chart beyond noise.
    CHECK(table[1].approx.mean_reward <=
          table[1].exact_reward +
              2.0 * (table[1].approx.ci_halfwidth + table[1].exact_sim->ci_halfwidth));
}

TEST_CASE("per-row failures are recorded without aborting the sweep") {
    const ModelSpec design = refs::sensitivity_design();
    std::vector<LabeledTrueSpec> rows;
    TrueProcessSpec bad = TrueProcessSpec::absorbing(refs::single_cause());
    rows.push_back({"wrong_dimension", bad});
    rows.push_back({"matched", TrueProcessSpec::absorbing(design)});

    SimOptions simopts;
    simopts.n_reps = 200;
    const auto table = mismatch_sweep(design, rows, 20, SolverOptions{}, simopts);
    REQUIRE(table.size() == 2);
    CHECK_FALSE(table[0].error.empty());
    CHECK(table[1].error.empty());
}

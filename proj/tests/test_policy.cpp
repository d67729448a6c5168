#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <memory>
#include <random>

#include "bpc/policy.hpp"
#include "reference_configs.hpp"

using namespace bpc;

namespace {

Belief random_belief(int s, std::mt19937_64& rng) {
    std::exponential_distribution<double> exp_dist(1.0);
    Belief b;
    b.p.resize(s);
    double sum = 0.0;
    for (double& v : b.p) {
        v = exp_dist(rng);
        sum += v;
    }
    for (double& v : b.p) v /= sum;
    return b;
}

// Heap-allocated so the grid pointers inside Solution and Policy stay valid.
struct Solved {
    Model model;
    SimplexGrid grid;
    Solution solution;
    Policy policy;

    Solved(const ModelSpec& spec, int k)
        : model(validate_and_build(spec)),
          grid(build_grid(spec.n_causes, k)),
          solution([&] {
              SolverOptions opts;
              opts.workers = 2;
              return solve(model, grid, opts);
          }()),
          policy(extract(solution)) {
        if (!solution.stats.converged) throw std::runtime_error("fixture did not converge");
    }
};

const Solved& solve_two_cause(int k) {
    static std::map<int, std::unique_ptr<Solved>> cache;
    auto& slot = cache[k];
    if (!slot) slot = std::make_unique<Solved>(refs::two_cause(), k);
    return *slot;
}

}  // namespace

TEST_CASE("extract refuses unconverged solutions") {
    const Model m = validate_and_build(refs::two_cause());
    const SimplexGrid grid = build_grid(2, 15);
    SolverOptions opts;
    opts.max_iterations = 1;
    const Solution sol = solve(m, grid, opts);
    REQUIRE_FALSE(sol.stats.converged);
    CHECK_THROWS_AS(extract(sol), ValidationError);
}

TEST_CASE("control limit tables are non-increasing and reach zero") {
    const Solved& s = solve_two_cause(40);
    REQUIRE(s.policy.limits.size() == 2);
    const LimitTable& b1 = s.policy.limits[0];
    CHECK(b1.cause == 1);
    // Rows are keyed by t_2; the limit is non-increasing in pi_2 and hits 0
    // before pi_2 = 1 (the out-of-control face stops).
    double prev = 2.0;
    bool reached_zero = false;
    for (const auto& row : b1.rows) {
        REQUIRE(row.limit.has_value());
        CHECK(*row.limit <= prev + 1e-12);
        prev = *row.limit;
        if (*row.limit == 0.0 && row.fixed[0] < s.grid.resolution()) reached_zero = true;
    }
    CHECK(reached_zero);
}

TEST_CASE("structure verification is clean on the reference chart") {
    const Solved& s = solve_two_cause(40);
    const StructureReport report = verify_structure(s.policy);
    CHECK(report.single_switch_violations == 0);
    CHECK(report.monotonicity_violations == 0);
    CHECK(report.convexity_violations == 0);
    CHECK(report.stop_connected);
    CHECK(report.continue_connected);
    CHECK(report.grid_resolution == 40);
}

TEST_CASE("adversarial action map with a hole is reported") {
    const Solved& s = solve_two_cause(20);
    Policy broken = s.policy;
    // Punch a Continue hole inside the stopping part of the first row.
    const LimitTable& b1 = broken.limits[0];
    REQUIRE(b1.rows.front().limit.has_value());
    std::vector<int> t{0, 0, 0};
    const int k = s.grid.resolution();
    const int limit_steps = static_cast<int>(*b1.rows.front().limit * k + 0.5);
    REQUIRE(limit_steps + 1 <= k);
    t[1] = limit_steps + 1;
    t[0] = k - t[1];
    broken.actions[s.grid.index_of(t.data())] = Action::Continue;
    const StructureReport report = verify_structure(broken);
    CHECK(report.single_switch_violations > 0);
}

TEST_CASE("decide on vertices and grid round-trip") {
    const Solved& s = solve_two_cause(40);
    CHECK(decide(s.policy, Belief::vertex(0, 3)) == Action::Continue);
    CHECK(decide(s.policy, Belief::vertex(1, 3)) == Action::Stop);
    CHECK(decide(s.policy, Belief::vertex(2, 3)) == Action::Stop);
    for (int p = 0; p < static_cast<int>(s.grid.size()); ++p)
        CHECK(decide(s.policy, s.grid.point(p)) == s.policy.actions[p]);
}

TEST_CASE("decide agrees with the closed-form certificates") {
    const Solved& s = solve_two_cause(60);
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 10000; ++rep) {
        const Belief b = random_belief(3, rng);
        const ActionHint hint = sufficient_action(s.model, b);
        if (hint == ActionHint::Unknown) continue;
        const Action want = hint == ActionHint::Stop ? Action::Stop : Action::Continue;
        CHECK(decide(s.policy, b) == want);
    }
}

TEST_CASE("decide is monotone along rays of increasing fault probability") {
    const Solved& s = solve_two_cause(40);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 300; ++rep) {
        const double pi2 = unif(rng) * 0.5;
        bool stopped = false;
        for (double pi1 = 0.0; pi1 <= 1.0 - pi2 + 1e-12; pi1 += 0.02) {
            Belief b;
            b.p = {1.0 - pi2 - pi1, pi1, pi2};
            const Action a = decide(s.policy, b);
            if (stopped) CHECK(a == Action::Stop);
            if (a == Action::Stop) stopped = true;
        }
        CHECK(stopped);
    }
}

TEST_CASE("do-not-initiate policy stops everywhere with zero limits") {
    const Model m = validate_and_build(refs::interval_study(0.0, 25.0));
    const SimplexGrid grid = build_grid(2, 20);
    const Solution sol = solve(m, grid, SolverOptions{});
    const Policy policy = extract(sol);
    CHECK(policy.do_not_initiate);
    for (const LimitTable& table : policy.limits)
        for (const auto& row : table.rows) {
            REQUIRE(row.limit.has_value());
            CHECK(*row.limit == 0.0);
        }
    const StructureReport report = verify_structure(policy);
    CHECK(report.single_switch_violations == 0);
    CHECK(report.monotonicity_violations == 0);
    CHECK(report.convexity_violations == 0);
    CHECK(report.continue_connected);  // empty region is vacuously connected
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 20; ++rep)
        CHECK(decide(policy, random_belief(3, rng)) == Action::Stop);
}

TEST_CASE("single-cause chart reduces to one scalar threshold") {
    const Model m = validate_and_build(refs::single_cause());
    const SimplexGrid grid = build_grid(1, 200);
    const Solution sol = solve(m, grid, SolverOptions{});
    REQUIRE(sol.stats.converged);
    const Policy policy = extract(sol);
    REQUIRE(policy.limits.size() == 1);
    REQUIRE(policy.limits[0].rows.size() == 1);
    REQUIRE(policy.limits[0].rows[0].limit.has_value());
    const double threshold = *policy.limits[0].rows[0].limit;
    CHECK(threshold > 0.0);
    CHECK(threshold < 1.0);
    // Actions switch exactly once along pi_1.
    int switches = 0;
    for (size_t p = 1; p < grid.size(); ++p)
        if (policy.actions[p] != policy.actions[p - 1]) ++switches;
    CHECK(switches == 1);
}

// Command-line front end for the Bayesian process control toolkit.
//
// Subcommands: solve, interval, simulate, bench, query.
// Exit codes: 0 success, 1 validation error, 2 unconverged, 3 internal
// consistency failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bpc/io.hpp"
#include "bpc/policy.hpp"
#include "bpc/sampling.hpp"
#include "bpc/simulate.hpp"
#include "bpc/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    double epsilon = 0.0;
    int resolution = 0;
    bool no_accelerate = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "root RNG seed (overrides config)");
    cmd->add_option("--workers", args.workers, "worker thread count");
    cmd->add_option("--epsilon", args.epsilon, "sup-norm stopping threshold");
    cmd->add_option("--resolution", args.resolution, "grid resolution k");
    cmd->add_flag("--no-accelerate", args.no_accelerate, "disable the accelerated sweep");
}

bpc::RunConfig load_config(const CommonArgs& args) {
    bpc::RunConfig cfg = bpc::load_run_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.workers > 0) cfg.solver.workers = args.workers;
    if (args.epsilon > 0.0) cfg.solver.epsilon = args.epsilon;
    if (args.resolution > 0) cfg.resolution = args.resolution;
    if (args.no_accelerate) cfg.solver.accelerate = false;
    fs::create_directories(cfg.output_dir);
    return cfg;
}

int run_solve(const CommonArgs& args) {
    const bpc::RunConfig cfg = load_config(args);
    const bpc::Model model = bpc::validate_and_build(cfg.model);
    const bpc::SimplexGrid grid = bpc::build_grid(cfg.model.n_causes, cfg.resolution);
    const bpc::Solution solution = bpc::solve(model, grid, cfg.solver);

    bpc::write_solution_csv(cfg.output_dir / "solution.csv", solution);
    bpc::write_solve_stats_json(cfg.output_dir / "solve_stats.json", solution.stats);
    if (solution.stats.converged) {
        const bpc::Policy policy = bpc::extract(solution);
        bpc::write_limit_tables_csv(cfg.output_dir, policy);
        bpc::write_structure_report_json(cfg.output_dir / "structure_report.json",
                                         bpc::verify_structure(policy));
        bpc::save_policy(cfg.output_dir, policy, cfg.model, cfg.solver.epsilon);
    } else {
        std::cerr << "solve: unconverged after " << solution.stats.iterations
                  << " iterations, final delta " << solution.stats.final_delta << "\n";
        return 2;
    }
    std::cout << "solve: " << solution.stats.iterations << " iterations, delta "
              << solution.stats.final_delta
              << (solution.do_not_initiate ? " (do-not-initiate)" : "") << "\n";
    return 0;
}

int run_interval(const CommonArgs& args, double h_min, double h_max, int n_points) {
    const bpc::RunConfig cfg = load_config(args);
    bpc::validate_and_build(cfg.model);  // field-level validation only

    const auto brackets = bpc::feasible_brackets(cfg.model, h_min, h_max);
    json bracket_doc = json::array();
    for (const auto& [lo, hi] : brackets) bracket_doc.push_back({{"h_lo", lo}, {"h_hi", hi}});
    std::ofstream(cfg.output_dir / "feasible_brackets.json") << bracket_doc.dump(2) << "\n";

    std::vector<double> hs;
    const auto feasible = bpc::feasible_interval(cfg.model, h_min, h_max);
    const double lo = feasible ? feasible->first : h_min;
    const double hi = feasible ? feasible->second : h_max;
    for (int i = 0; i < n_points; ++i)
        hs.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n_points - 1.0)));
    const bpc::IntervalAnalysis analysis =
        bpc::optimize_h(cfg.model, hs, cfg.resolution, cfg.solver);
    bpc::write_interval_csv(cfg.output_dir / "reward_vs_h.csv", analysis);

    if (analysis.h_star) std::cout << "interval: h* = " << *analysis.h_star << "\n";
    for (const auto& [blo, bhi] : brackets)
        std::cout << "interval: feasible bracket (" << blo << ", " << bhi << ")\n";
    return 0;
}

int run_simulate(const CommonArgs& args, const std::string& true_overrides, long n_reps,
                 const std::string& sweep_path) {
    bpc::RunConfig cfg = load_config(args);
    if (args.seed_set) cfg.seed = args.seed;
    bpc::SimOptions sim;
    sim.n_reps = n_reps;
    sim.seed = cfg.seed;
    sim.workers = std::max(1, cfg.solver.workers);

    if (!sweep_path.empty()) {
        std::ifstream in(sweep_path);
        if (!in) throw bpc::ValidationError("cannot open sweep file " + sweep_path);
        json doc;
        in >> doc;
        std::vector<bpc::LabeledTrueSpec> specs;
        for (const auto& entry : doc) {
            bpc::LabeledTrueSpec item;
            item.label = entry.value("label", "row" + std::to_string(specs.size()));
            json overrides = entry;
            overrides.erase("label");
            item.spec = bpc::parse_true_spec(cfg.model, overrides);
            specs.push_back(std::move(item));
        }
        const auto rows = bpc::mismatch_sweep(cfg.model, specs, cfg.resolution, cfg.solver, sim);
        bpc::write_mismatch_csv(cfg.output_dir / "mismatch.csv", rows);
        bpc::write_mismatch_json(cfg.output_dir / "mismatch.json", rows);
        for (const auto& row : rows)
            std::cout << "simulate: " << row.label << " appr " << row.approx.mean_reward << " exact "
                      << row.exact_reward << " err% " << row.error_pct << "\n";
        return 0;
    }

    json overrides = json::object();
    if (!true_overrides.empty()) {
        if (fs::exists(true_overrides)) {
            std::ifstream in(true_overrides);
            in >> overrides;
        } else {
            overrides = json::parse(true_overrides);
        }
    }
    const bpc::TrueProcessSpec true_spec = bpc::parse_true_spec(cfg.model, overrides);

    const bpc::Model model = bpc::validate_and_build(cfg.model);
    const bpc::SimplexGrid grid = bpc::build_grid(cfg.model.n_causes, cfg.resolution);
    const bpc::Solution solution = bpc::solve(model, grid, cfg.solver);
    if (!solution.stats.converged) return 2;
    const bpc::Policy policy = bpc::extract(solution);

    const bpc::SimResult result = bpc::simulate(true_spec, model.decision_model(), policy, sim);
    bpc::write_sim_result_json(cfg.output_dir / "sim_result.json", result);
    std::cout << "simulate: mean reward " << result.mean_reward << " +/- " << result.ci_halfwidth
              << " (n=" << result.n_reps << ")\n";
    return 0;
}

int run_bench(const CommonArgs& args) {
    bpc::RunConfig cfg = load_config(args);
    const bpc::Model model = bpc::validate_and_build(cfg.model);
    const bpc::SimplexGrid grid = bpc::build_grid(cfg.model.n_causes, cfg.resolution);

    bpc::SolverOptions plain_opts = cfg.solver;
    plain_opts.accelerate = false;
    bpc::SolverOptions accel_opts = cfg.solver;
    accel_opts.accelerate = true;
    const bpc::Solution plain = bpc::solve(model, grid, plain_opts);
    const bpc::Solution accel = bpc::solve(model, grid, accel_opts);

    double max_diff = 0.0;
    bool actions_match = true;
    for (size_t p = 0; p < grid.size(); ++p) {
        max_diff = std::max(max_diff,
                            std::fabs(plain.field.values[p] - accel.field.values[p]));
        actions_match = actions_match && plain.actions[p] == accel.actions[p];
    }
    if (max_diff > cfg.solver.epsilon || !actions_match) {
        std::cerr << "bench: accelerated and plain solves disagree (max value diff " << max_diff
                  << ", actions " << (actions_match ? "match" : "differ") << ")\n";
        return 3;
    }

    json doc{{"plain_seconds", plain.stats.seconds},
             {"accel_seconds", accel.stats.seconds},
             {"plain_evaluated", plain.stats.evaluated},
             {"accel_evaluated", accel.stats.evaluated},
             {"accel_skipped", accel.stats.skipped},
             {"max_value_diff", max_diff},
             {"time_factor", plain.stats.seconds / std::max(accel.stats.seconds, 1e-12)},
             {"evaluation_factor", static_cast<double>(plain.stats.evaluated) /
                                       std::max<long>(accel.stats.evaluated, 1)}};
    std::ofstream(cfg.output_dir / "bench.json") << doc.dump(2) << "\n";
    std::cout << "bench: evaluation factor "
              << static_cast<double>(plain.stats.evaluated) / std::max<long>(accel.stats.evaluated, 1)
              << ", skipped " << accel.stats.skipped << "\n";
    return 0;
}

int run_query(const std::string& policy_dir, const std::string& belief_str) {
    std::ifstream hdr(fs::path(policy_dir) / "policy.json");
    if (!hdr) throw bpc::ValidationError("cannot open " + policy_dir + "/policy.json");
    json header;
    hdr >> header;
    const bpc::SimplexGrid grid =
        bpc::build_grid(header.at("n_causes").get<int>(), header.at("resolution").get<int>());
    const bpc::Policy policy = bpc::load_policy(policy_dir, grid);

    bpc::Belief belief;
    std::istringstream bs(belief_str);
    std::string cell;
    while (std::getline(bs, cell, ',')) belief.p.push_back(std::stod(cell));
    if (belief.n_states() != grid.n_states())
        throw bpc::ValidationError("query: belief has wrong dimension");
    belief = bpc::sanitize_belief(belief);
    if (!belief.valid())
        throw bpc::ValidationError("query: belief components must be nonnegative and sum to 1");

    std::cout << (bpc::decide(policy, belief) == bpc::Action::Stop ? "stop" : "continue") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian process control with multiple assignable causes"};
    app.require_subcommand(1);

    CommonArgs solve_args, interval_args, simulate_args, bench_args;
    double h_min = 0.01, h_max = 100.0;
    int interval_points = 60;
    std::string true_overrides, sweep_path;
    long n_reps = 10000;
    std::string policy_dir, belief_str;

    add_common(app.add_subcommand("solve", "compute the optimal policy"), solve_args);

    CLI::App* interval_cmd = app.add_subcommand("interval", "analyze the sampling interval");
    add_common(interval_cmd, interval_args);
    interval_cmd->add_option("--h-min", h_min, "scan lower bound");
    interval_cmd->add_option("--h-max", h_max, "scan upper bound");
    interval_cmd->add_option("--points", interval_points, "curve sample count");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo under the true process");
    add_common(simulate_cmd, simulate_args);
    simulate_cmd->add_option("--true-overrides", true_overrides,
                             "JSON file or inline JSON with true-process overrides");
    simulate_cmd->add_option("--sweep", sweep_path, "JSON file with labeled true-spec overrides");
    simulate_cmd->add_option("--n-reps", n_reps, "replications");

    add_common(app.add_subcommand("bench", "compare plain and accelerated solves"), bench_args);

    CLI::App* query_cmd = app.add_subcommand("query", "one-shot decision for a belief");
    query_cmd->add_option("--policy", policy_dir, "directory with a saved policy")->required();
    query_cmd->add_option("--belief", belief_str, "comma-separated belief vector")->required();

    CLI11_PARSE(app, argc, argv);
    for (CommonArgs* a : {&solve_args, &interval_args, &simulate_args, &bench_args})
        a->seed_set = a->seed != 0;

    try {
        if (app.got_subcommand("solve")) return run_solve(solve_args);
        if (app.got_subcommand("interval")) return run_interval(interval_args, h_min, h_max, interval_points);
        if (app.got_subcommand("simulate"))
            return run_simulate(simulate_args, true_overrides, n_reps, sweep_path);
        if (app.got_subcommand("bench")) return run_bench(bench_args);
        if (app.got_subcommand("query")) return run_query(policy_dir, belief_str);
    } catch (const bpc::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

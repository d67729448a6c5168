#include "bpc/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bpc {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!doc.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (const auto& [key, value] : doc.items())
        if (!allowed.contains(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
}

Vec parse_vec(const json& doc, const std::string& where) {
    if (!doc.is_array()) throw ValidationError(where + ": expected an array of numbers");
    Vec out;
    for (const auto& v : doc) {
        if (!v.is_number()) throw ValidationError(where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out << std::setprecision(17);
    return out;
}

const char* action_name(Action a) { return a == Action::Stop ? "stop" : "continue"; }

}  // namespace

ModelSpec parse_model_spec(const json& doc) {
    reject_unknown_keys(doc,
                        {"rates", "oc_costs", "term_costs", "reward_rate", "sample_cost", "interval",
                         "densities", "mu", "sigma"},
                        "model");
    for (const char* key : {"rates", "oc_costs", "term_costs", "reward_rate", "interval", "densities"})
        if (!doc.contains(key)) throw ValidationError(std::string("model: missing key \"") + key + "\"");

    ModelSpec spec;
    spec.rates = parse_vec(doc.at("rates"), "rates");
    spec.n_causes = static_cast<int>(spec.rates.size());
    spec.oc_costs = parse_vec(doc.at("oc_costs"), "oc_costs");
    spec.term_costs = parse_vec(doc.at("term_costs"), "term_costs");
    spec.reward_rate = doc.at("reward_rate").get<double>();
    spec.sample_cost = doc.value("sample_cost", 0.0);
    spec.interval = doc.at("interval").get<double>();

    const json& densities = doc.at("densities");
    if (!densities.is_array()) throw ValidationError("densities: expected an array");
    for (const auto& entry : densities) {
        if (entry.contains("delta")) {
            reject_unknown_keys(entry, {"delta"}, "densities entry");
            if (!doc.contains("mu") || !doc.contains("sigma"))
                throw ValidationError("densities: delta form requires top-level mu and sigma");
            const double mu = doc.at("mu").get<double>();
            const double sigma = doc.at("sigma").get<double>();
            spec.densities.push_back({mu + entry.at("delta").get<double>() * sigma, sigma * sigma});
        } else {
            reject_unknown_keys(entry, {"mean", "variance"}, "densities entry");
            if (!entry.contains("mean") || !entry.contains("variance"))
                throw ValidationError("densities: entry needs {mean, variance} or {delta}");
            spec.densities.push_back({entry.at("mean").get<double>(), entry.at("variance").get<double>()});
        }
    }
    return spec;
}

RunConfig parse_run_config(const json& doc) {
    reject_unknown_keys(doc, {"model", "grid", "solver", "output_dir", "seed"}, "config");
    if (!doc.contains("model")) throw ValidationError("config: missing key \"model\"");
    RunConfig cfg;
    cfg.model = parse_model_spec(doc.at("model"));
    if (doc.contains("grid")) {
        reject_unknown_keys(doc.at("grid"), {"resolution"}, "grid");
        cfg.resolution = doc.at("grid").value("resolution", cfg.resolution);
    }
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        reject_unknown_keys(s,
                            {"epsilon", "max_iterations", "quadrature_nodes", "quadrature_range_sigmas",
                             "accelerate", "init", "workers"},
                            "solver");
        cfg.solver.epsilon = s.value("epsilon", cfg.solver.epsilon);
        cfg.solver.max_iterations = s.value("max_iterations", cfg.solver.max_iterations);
        cfg.solver.quadrature_nodes = s.value("quadrature_nodes", cfg.solver.quadrature_nodes);
        cfg.solver.quadrature_range_sigmas =
            s.value("quadrature_range_sigmas", cfg.solver.quadrature_range_sigmas);
        cfg.solver.accelerate = s.value("accelerate", cfg.solver.accelerate);
        if (s.contains("init")) {
            const std::string init = s.at("init").get<std::string>();
            if (init == "lower_t")
                cfg.solver.init = InitKind::LowerT;
            else if (init == "upper_u")
                cfg.solver.init = InitKind::UpperU;
            else
                throw ValidationError("solver.init: expected \"lower_t\" or \"upper_u\"");
        }
        cfg.solver.workers = s.value("workers", cfg.solver.workers);
    }
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<uint64_t>();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ValidationError("config: malformed JSON: " + std::string(e.what()));
    }
    return parse_run_config(doc);
}

TrueProcessSpec parse_true_spec(const ModelSpec& design, const json& overrides) {
    reject_unknown_keys(overrides, {"rates", "oc_costs", "term_costs", "deltas", "densities", "inter_rates", "mu", "sigma"},
                        "true_spec");
    TrueProcessSpec out = TrueProcessSpec::absorbing(design);
    if (overrides.contains("rates")) out.base.rates = parse_vec(overrides.at("rates"), "rates");
    if (overrides.contains("oc_costs")) out.base.oc_costs = parse_vec(overrides.at("oc_costs"), "oc_costs");
    if (overrides.contains("term_costs"))
        out.base.term_costs = parse_vec(overrides.at("term_costs"), "term_costs");
    if (overrides.contains("deltas")) {
        const Vec deltas = parse_vec(overrides.at("deltas"), "deltas");
        const double mu = overrides.value("mu", design.densities[0].mean);
        const double sigma =
            overrides.value("sigma", std::sqrt(design.densities[0].variance));
        out.base.densities.clear();
        out.base.densities.push_back({mu, sigma * sigma});
        for (double d : deltas) out.base.densities.push_back({mu + d * sigma, sigma * sigma});
    }
    if (overrides.contains("densities")) {
        out.base.densities.clear();
        for (const auto& entry : overrides.at("densities")) {
            reject_unknown_keys(entry, {"mean", "variance"}, "densities entry");
            out.base.densities.push_back(
                {entry.at("mean").get<double>(), entry.at("variance").get<double>()});
        }
    }
    if (overrides.contains("inter_rates")) {
        const json& m = overrides.at("inter_rates");
        const int n = out.base.n_causes;
        if (!m.is_array() || static_cast<int>(m.size()) != n)
            throw ValidationError("inter_rates: expected an N x N matrix");
        out.inter_rates = Matrix(n, n);
        for (int i = 0; i < n; ++i) {
            const Vec row = parse_vec(m[i], "inter_rates row");
            if (static_cast<int>(row.size()) != n)
                throw ValidationError("inter_rates: expected an N x N matrix");
            for (int j = 0; j < n; ++j) out.inter_rates(i, j) = row[j];
        }
    }
    validate_true_spec(out);
    return out;
}

std::string model_spec_hash(const ModelSpec& spec) {
    std::ostringstream os;
    os << std::setprecision(17) << spec.n_causes << "|" << spec.reward_rate << "|" << spec.sample_cost
       << "|" << spec.interval;
    for (double v : spec.rates) os << "|" << v;
    for (double v : spec.oc_costs) os << "|" << v;
    for (double v : spec.term_costs) os << "|" << v;
    for (const auto& f : spec.densities) os << "|" << f.mean << "," << f.variance;
    const std::string s = os.str();
    uint64_t hash = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << hash;
    return hex.str();
}

namespace {

void write_point_header(std::ofstream& out, const SimplexGrid& grid) {
    for (int j = 0; j < grid.n_states(); ++j) out << "t_" << j << ",";
    for (int j = 0; j < grid.n_states(); ++j) out << "pi_" << j << ",";
    out << "value";
}

void write_point_row(std::ofstream& out, const SimplexGrid& grid, int p, double value) {
    const int* t = grid.tuple(p);
    for (int j = 0; j < grid.n_states(); ++j) out << t[j] << ",";
    const Belief b = grid.point(p);
    for (int j = 0; j < grid.n_states(); ++j) out << b.p[j] << ",";
    out << value;
}

}  // namespace

void write_value_field_csv(const std::filesystem::path& path, const ValueField& field) {
    std::ofstream out = open_out(path);
    const SimplexGrid& grid = *field.grid;
    write_point_header(out, grid);
    out << "\n";
    for (int p = 0; p < static_cast<int>(grid.size()); ++p) {
        write_point_row(out, grid, p, field.values[p]);
        out << "\n";
    }
}

void write_solution_csv(const std::filesystem::path& path, const Solution& solution) {
    std::ofstream out = open_out(path);
    const SimplexGrid& grid = *solution.field.grid;
    write_point_header(out, grid);
    out << ",stop_value,action\n";
    for (int p = 0; p < static_cast<int>(grid.size()); ++p) {
        write_point_row(out, grid, p, solution.field.values[p]);
        out << "," << solution.stop_values[p] << "," << action_name(solution.actions[p]) << "\n";
    }
}

void write_limit_tables_csv(const std::filesystem::path& dir, const Policy& policy) {
    const SimplexGrid& grid = *policy.grid;
    const double step = 1.0 / grid.resolution();
    for (const auto& table : policy.limits) {
        std::ofstream out = open_out(dir / ("limits_cause_" + std::to_string(table.cause) + ".csv"));
        for (int j = 1; j < grid.n_states(); ++j)
            if (j != table.cause) out << "t_" << j << ",pi_" << j << ",";
        out << "limit\n";
        for (const auto& row : table.rows) {
            for (int v : row.fixed) out << v << "," << v * step << ",";
            if (row.limit)
                out << *row.limit;
            else
                out << "none";
            out << "\n";
        }
    }
}

void write_structure_report_json(const std::filesystem::path& path, const StructureReport& report) {
    json doc{{"single_switch_violations", report.single_switch_violations},
             {"monotonicity_violations", report.monotonicity_violations},
             {"convexity_violations", report.convexity_violations},
             {"stop_connected", report.stop_connected},
             {"continue_connected", report.continue_connected},
             {"grid_resolution", report.grid_resolution},
             {"details", report.details}};
    open_out(path) << doc.dump(2) << "\n";
}

void write_solve_stats_json(const std::filesystem::path& path, const SolveStats& stats) {
    json doc{{"iterations", stats.iterations}, {"final_delta", stats.final_delta},
             {"converged", stats.converged},  {"evaluated", stats.evaluated},
             {"skipped", stats.skipped},      {"seconds", stats.seconds}};
    open_out(path) << doc.dump(2) << "\n";
}

void write_interval_csv(const std::filesystem::path& path, const IntervalAnalysis& analysis) {
    std::ofstream out = open_out(path);
    out << "h,reward,upper_bound,lower_bound,solved\n";
    for (const auto& pt : analysis.curve)
        out << pt.h << "," << pt.reward << "," << pt.upper_bound << "," << pt.lower_bound << ","
            << (pt.solved ? 1 : 0) << "\n";
}

void write_sim_result_json(const std::filesystem::path& path, const SimResult& result) {
    json doc{{"mean_reward", result.mean_reward},
             {"ci_halfwidth", result.ci_halfwidth},
             {"n_reps", result.n_reps},
             {"mean_stop_time", result.mean_stop_time},
             {"false_alarm_rate", result.false_alarm_rate},
             {"seed", result.seed},
             {"truncated", result.truncated}};
    open_out(path) << doc.dump(2) << "\n";
}

void write_mismatch_csv(const std::filesystem::path& path, const std::vector<MismatchRow>& rows) {
    std::ofstream out = open_out(path);
    out << "label,approx,exact,err_pct,error\n";
    for (const auto& row : rows)
        out << row.label << "," << row.approx.mean_reward << "," << row.exact_reward << ","
            << row.error_pct << "," << row.error << "\n";
}

void write_mismatch_json(const std::filesystem::path& path, const std::vector<MismatchRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json entry{{"label", row.label},
                   {"approx", row.approx.mean_reward},
                   {"approx_ci", row.approx.ci_halfwidth},
                   {"exact", row.exact_reward},
                   {"exact_is_simulated", row.exact_is_simulated},
                   {"err_pct", row.error_pct}};
        if (row.exact_sim) entry["exact_ci"] = row.exact_sim->ci_halfwidth;
        if (!row.error.empty()) entry["error"] = row.error;
        arr.push_back(entry);
    }
    open_out(path) << arr.dump(2) << "\n";
}

void save_policy(const std::filesystem::path& dir, const Policy& policy, const ModelSpec& spec,
                 double epsilon) {
    const SimplexGrid& grid = *policy.grid;
    std::ofstream out = open_out(dir / "policy.csv");
    write_point_header(out, grid);
    out << ",stop_value,action\n";
    for (int p = 0; p < static_cast<int>(grid.size()); ++p) {
        write_point_row(out, grid, p, policy.values[p]);
        out << "," << policy.stop_values[p] << "," << action_name(policy.actions[p]) << "\n";
    }
    json header{{"spec_hash", model_spec_hash(spec)},
                {"resolution", grid.resolution()},
                {"n_causes", grid.n_causes()},
                {"epsilon", epsilon},
                {"do_not_initiate", policy.do_not_initiate}};
    open_out(dir / "policy.json") << header.dump(2) << "\n";
}

Policy load_policy(const std::filesystem::path& dir, const SimplexGrid& grid,
                   std::string* expected_spec_hash) {
    std::ifstream hdr(dir / "policy.json");
    if (!hdr) throw ValidationError("cannot open " + (dir / "policy.json").string());
    json header;
    hdr >> header;
    if (header.at("resolution").get<int>() != grid.resolution() ||
        header.at("n_causes").get<int>() != grid.n_causes())
        throw ValidationError("load_policy: grid does not match the saved policy header");
    if (expected_spec_hash && *expected_spec_hash != header.at("spec_hash").get<std::string>())
        throw ValidationError("load_policy: spec hash mismatch");

    std::ifstream in(dir / "policy.csv");
    if (!in) throw ValidationError("cannot open " + (dir / "policy.csv").string());
    std::string line;
    std::getline(in, line);  // header
    Solution sol(grid);
    sol.field.values.assign(grid.size(), 0.0);
    sol.stop_values.assign(grid.size(), 0.0);
    sol.actions.assign(grid.size(), Action::Continue);
    const int s = grid.n_states();
    std::vector<int> t(s);
    size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        for (int j = 0; j < s; ++j) {
            std::getline(ls, cell, ',');
            t[j] = std::stoi(cell);
        }
        for (int j = 0; j < s; ++j) std::getline(ls, cell, ',');  // pi columns
        const int p = grid.index_of(t.data());
        std::getline(ls, cell, ',');
        sol.field.values[p] = std::stod(cell);
        std::getline(ls, cell, ',');
        sol.stop_values[p] = std::stod(cell);
        std::getline(ls, cell, ',');
        sol.actions[p] = cell == "stop" ? Action::Stop : Action::Continue;
        ++rows;
    }
    if (rows != grid.size()) throw ValidationError("load_policy: action map row count mismatch");
    sol.stats.converged = true;
    sol.do_not_initiate = header.value("do_not_initiate", false);
    return extract(sol);
}

}  // namespace bpc

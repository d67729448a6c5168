#pragma once

#include <filesystem>
#include <string>

#include "bpc/policy.hpp"
#include "bpc/sampling.hpp"
#include "bpc/simulate.hpp"
#include "bpc/solver.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bpc {

struct RunConfig {
    ModelSpec model;
    int resolution = 100;
    SolverOptions solver;
    std::filesystem::path output_dir = ".";
    uint64_t seed = 1;
};

// Parses a ModelSpec JSON document. Densities are given either as
// {mean, variance} objects or as {delta} objects together with top-level
// mu/sigma. Unknown keys are rejected.
ModelSpec parse_model_spec(const nlohmann::json& doc);
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

// Overrides for the true process in simulation runs: any of rates,
// oc_costs, deltas (with the design mu/sigma), densities, inter_rates.
TrueProcessSpec parse_true_spec(const ModelSpec& design, const nlohmann::json& overrides);

std::string model_spec_hash(const ModelSpec& spec);

// CSV/JSON writers. All CSVs carry a header row.
void write_value_field_csv(const std::filesystem::path& path, const ValueField& field);
void write_solution_csv(const std::filesystem::path& path, const Solution& solution);
void write_limit_tables_csv(const std::filesystem::path& dir, const Policy& policy);
void write_structure_report_json(const std::filesystem::path& path, const StructureReport& report);
void write_solve_stats_json(const std::filesystem::path& path, const SolveStats& stats);
void write_interval_csv(const std::filesystem::path& path, const IntervalAnalysis& analysis);
void write_sim_result_json(const std::filesystem::path& path, const SimResult& result);
void write_mismatch_csv(const std::filesystem::path& path, const std::vector<MismatchRow>& rows);
void write_mismatch_json(const std::filesystem::path& path, const std::vector<MismatchRow>& rows);

// Policy save format: action-map CSV plus a JSON header with the spec
// hash, grid resolution and epsilon.
void save_policy(const std::filesystem::path& dir, const Policy& policy, const ModelSpec& spec,
                 double epsilon);
Policy load_policy(const std::filesystem::path& dir, const SimplexGrid& grid,
                   std::string* expected_spec_hash = nullptr);

}  // namespace bpc

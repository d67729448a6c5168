#include "bpc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <string>

namespace bpc {

namespace {

// Lines of constant Pi_(-i): key is (t_j, j in 1..N, j != i), value is the
// list of (t_i, grid index) sorted by t_i.
using LineMap = std::map<std::vector<int>, std::vector<std::pair<int, int>>>;

LineMap collect_lines(const SimplexGrid& grid, int cause) {
    LineMap lines;
    const int s = grid.n_states();
    for (int p = 0; p < static_cast<int>(grid.size()); ++p) {
        const int* t = grid.tuple(p);
        std::vector<int> key;
        key.reserve(s - 2);
        for (int j = 1; j < s; ++j)
            if (j != cause) key.push_back(t[j]);
        lines[key].emplace_back(t[cause], p);
    }
    for (auto& [key, pts] : lines) std::sort(pts.begin(), pts.end());
    return lines;
}

std::string key_to_string(const std::vector<int>& key) {
    std::ostringstream os;
    os << "(";
    for (size_t j = 0; j < key.size(); ++j) os << (j ? "," : "") << key[j];
    os << ")";
    return os.str();
}

}  // namespace

Policy extract(const Solution& solution) {
    if (!solution.stats.converged)
        throw ValidationError("extract: solution did not converge; refusing to extract a policy");
    const SimplexGrid& grid = *solution.field.grid;
    Policy policy;
    policy.grid = &grid;
    policy.actions = solution.actions;
    policy.values = solution.field.values;
    policy.stop_values = solution.stop_values;
    policy.do_not_initiate = solution.do_not_initiate;

    const double step = 1.0 / grid.resolution();
    for (int cause = 1; cause <= grid.n_causes(); ++cause) {
        LimitTable table;
        table.cause = cause;
        for (const auto& [key, pts] : collect_lines(grid, cause)) {
            LimitTable::Row row;
            row.fixed = key;
            for (const auto& [ti, p] : pts)
                if (solution.actions[p] == Action::Stop) {
                    row.limit = ti * step;
                    break;
                }
            table.rows.push_back(std::move(row));
        }
        policy.limits.push_back(std::move(table));
    }
    return policy;
}

StructureReport verify_structure(const Policy& policy) {
    const SimplexGrid& grid = *policy.grid;
    StructureReport report;
    report.grid_resolution = grid.resolution();
    const double step = 1.0 / grid.resolution();

    for (int cause = 1; cause <= grid.n_causes(); ++cause) {
        const LineMap lines = collect_lines(grid, cause);

        // Single switch per line: Continue* Stop*.
        for (const auto& [key, pts] : lines) {
            int switches = 0;
            Action prev = Action::Continue;
            for (const auto& [ti, p] : pts) {
                const Action a = policy.actions[p];
                if (a != prev) {
                    ++switches;
                    prev = a;
                }
            }
            if (switches > 1) {
                ++report.single_switch_violations;
                report.details.push_back("cause " + std::to_string(cause) + " line " +
                                         key_to_string(key) + ": " + std::to_string(switches) +
                                         " switches");
            }
        }

        // B_i tables over the line keys, in integer grid steps so the
        // one-step convexity slack is exact.
        std::map<std::vector<int>, std::optional<long>> limit_of;
        const LimitTable& table = policy.limits[cause - 1];
        for (const auto& row : table.rows)
            limit_of[row.fixed] =
                row.limit ? std::optional<long>(std::lround(*row.limit / step)) : std::nullopt;

        const size_t dims = grid.n_causes() - 1;
        for (const auto& [key, limit] : limit_of) {
            for (size_t dim = 0; dim < dims; ++dim) {
                std::vector<int> up = key;
                ++up[dim];
                const auto next = limit_of.find(up);
                if (next == limit_of.end()) continue;
                // Non-increasing in each component of Pi_(-i).
                const long big = std::numeric_limits<long>::max() / 4;
                const long b0 = limit ? *limit : big;
                const long b1 = next->second ? *next->second : big;
                if (b1 > b0) {
                    ++report.monotonicity_violations;
                    report.details.push_back("cause " + std::to_string(cause) + " B not non-increasing at " +
                                             key_to_string(key) + " dim " + std::to_string(dim));
                }
                // Discrete convexity with one-grid-step slack.
                std::vector<int> up2 = up;
                ++up2[dim];
                const auto nnext = limit_of.find(up2);
                if (nnext == limit_of.end()) continue;
                if (!limit || !next->second || !nnext->second) continue;
                const long second_diff = *limit - 2 * (*next->second) + *nnext->second;
                if (second_diff < -1) {
                    ++report.convexity_violations;
                    report.details.push_back("cause " + std::to_string(cause) + " B not convex at " +
                                             key_to_string(key) + " dim " + std::to_string(dim));
                }
            }
        }
    }

    // Connectivity of the stop and continue sets under one-unit transfers.
    const int s = grid.n_states();
    auto connected = [&](Action which) {
        std::vector<int> members;
        for (int p = 0; p < static_cast<int>(grid.size()); ++p)
            if (policy.actions[p] == which) members.push_back(p);
        if (members.empty()) return true;
        std::vector<char> seen(grid.size(), 0);
        std::queue<int> frontier;
        frontier.push(members.front());
        seen[members.front()] = 1;
        size_t reached = 1;
        std::vector<int> t(s);
        while (!frontier.empty()) {
            const int p = frontier.front();
            frontier.pop();
            const int* tp = grid.tuple(p);
            for (int a = 0; a < s; ++a) {
                if (tp[a] == 0) continue;
                for (int b = 0; b < s; ++b) {
                    if (b == a) continue;
                    std::copy(tp, tp + s, t.begin());
                    --t[a];
                    ++t[b];
                    const int q = grid.index_of(t.data());
                    if (!seen[q] && policy.actions[q] == which) {
                        seen[q] = 1;
                        ++reached;
                        frontier.push(q);
                    }
                }
            }
        }
        return reached == members.size();
    };
    report.stop_connected = connected(Action::Stop);
    report.continue_connected = connected(Action::Continue);
    return report;
}

Action decide(const Policy& policy, const Belief& belief) {
    const SimplexGrid& grid = *policy.grid;
    if (policy.do_not_initiate) return Action::Stop;
    const SimplexGrid::Cell cell = grid.locate(belief);
    // Rounding in the cell coordinates can leak ~1e-16 weight onto corners
    // the belief does not actually touch; ignore those.
    constexpr double kWeightFloor = 1e-12;
    bool any_stop = false, any_continue = false;
    for (int c = 0; c < cell.count; ++c) {
        if (cell.weights[c] <= kWeightFloor) continue;
        if (policy.actions[cell.indices[c]] == Action::Stop)
            any_stop = true;
        else
            any_continue = true;
    }
    if (!any_continue) return Action::Stop;
    if (!any_stop) return Action::Continue;
    // Mixed cell: compare interpolated value against the stop hyperplane.
    double value = 0.0, stop = 0.0;
    for (int c = 0; c < cell.count; ++c) {
        if (cell.weights[c] <= kWeightFloor) continue;
        value += cell.weights[c] * policy.values[cell.indices[c]];
        stop += cell.weights[c] * policy.stop_values[cell.indices[c]];
    }
    return value > stop ? Action::Continue : Action::Stop;
}

}  // namespace bpc

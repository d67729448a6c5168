#include "bpc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace bpc {

namespace {

void parallel_for(int n, int workers, const std::function<void(int, int)>& body) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(body, begin, end);
    }
    for (auto& t : pool) t.join();
}

struct QuadRange {
    double lo;
    double hi;
};

QuadRange quad_range(const std::vector<NormalDensity>& densities, double n_sigmas) {
    double sigma_max = 0.0;
    double mean_lo = densities[0].mean;
    double mean_hi = densities[0].mean;
    for (const auto& f : densities) {
        sigma_max = std::max(sigma_max, std::sqrt(f.variance));
        mean_lo = std::min(mean_lo, f.mean);
        mean_hi = std::max(mean_hi, f.mean);
    }
    return {mean_lo - n_sigmas * sigma_max, mean_hi + n_sigmas * sigma_max};
}

QuadratureRule build_rule(const DecisionModel& model, const SolverOptions& options) {
    if (options.quadrature_nodes < 8)
        throw ValidationError("quadrature_nodes: at least 8 nodes are required");
    if (!(options.epsilon > 0.0)) throw ValidationError("epsilon: must be positive");
    const QuadRange range = quad_range(model.densities, options.quadrature_range_sigmas);
    QuadratureRule rule = composite_gauss_legendre(options.quadrature_nodes, range.lo, range.hi);
    // Every state density must integrate to one over the covered range.
    for (size_t i = 0; i < model.densities.size(); ++i) {
        double mass = 0.0;
        for (size_t q = 0; q < rule.size(); ++q) mass += rule.weights[q] * model.densities[i](rule.nodes[q]);
        if (std::fabs(mass - 1.0) > 1e-6)
            throw NumericalError("quadrature coverage: density of state " + std::to_string(i) +
                                 " integrates to " + std::to_string(mass) +
                                 " over the quadrature range; widen quadrature_range_sigmas");
    }
    return rule;
}

}  // namespace

ContinuationOperator::ContinuationOperator(const DecisionModel& model, const SimplexGrid& grid,
                                           const SolverOptions& options)
    : grid_(&grid) {
    const QuadratureRule rule = build_rule(model, options);
    const int s = model.n_states();
    const int n_points = static_cast<int>(grid.size());
    const size_t n_nodes = rule.size();

    // Density table, nodes x states.
    std::vector<double> dens(n_nodes * s);
    for (size_t q = 0; q < n_nodes; ++q)
        for (int i = 0; i < s; ++i) dens[q * s + i] = model.densities[i](rule.nodes[q]);

    stop_values_.resize(n_points);
    immediate_.resize(n_points);
    std::vector<std::vector<Entry>> rows(n_points);

    parallel_for(n_points, options.workers, [&](int begin, int end) {
        Belief posterior;
        posterior.p.resize(s);
        for (int p = begin; p < end; ++p) {
            const Belief pi = grid.point(p);
            stop_values_[p] = model.stop_value(pi);
            immediate_[p] = model.continue_immediate(pi);
            const Vec prior = left_mul(pi.p, model.P);
            auto& row = rows[p];
            row.reserve(n_nodes * s);
            for (size_t q = 0; q < n_nodes; ++q) {
                const double* f = &dens[q * s];
                double pred = 0.0;
                for (int i = 0; i < s; ++i) pred += prior[i] * f[i];
                if (pred <= 0.0) continue;
                for (int i = 0; i < s; ++i) posterior.p[i] = prior[i] * f[i] / pred;
                const SimplexGrid::Cell cell = grid.locate(posterior);
                const double scale = rule.weights[q] * pred;
                for (int c = 0; c < cell.count; ++c)
                    row.push_back({cell.indices[c], scale * cell.weights[c]});
            }
        }
    });

    offsets_.resize(n_points + 1);
    size_t total = 0;
    for (int p = 0; p < n_points; ++p) {
        offsets_[p] = total;
        total += rows[p].size();
    }
    offsets_[n_points] = total;
    entries_.resize(total);
    for (int p = 0; p < n_points; ++p)
        std::copy(rows[p].begin(), rows[p].end(), entries_.begin() + offsets_[p]);
}

double ContinuationOperator::evaluate(const Vec& field_values, int point) const {
    double s = immediate_[point];
    const size_t end = offsets_[point + 1];
    for (size_t e = offsets_[point]; e < end; ++e)
        s += entries_[e].coeff * field_values[entries_[e].index];
    return s;
}

double continuation_value(const DecisionModel& model, const ValueField& field, const Belief& belief,
                          const SolverOptions& options) {
    const QuadratureRule rule = build_rule(model, options);
    const Vec prior = left_mul(belief.p, model.P);
    const int s = model.n_states();
    Belief posterior;
    posterior.p.resize(s);
    double integral = 0.0;
    for (size_t q = 0; q < rule.size(); ++q) {
        const double y = rule.nodes[q];
        double pred = 0.0;
        for (int i = 0; i < s; ++i) pred += prior[i] * model.densities[i](y);
        if (pred <= 0.0) continue;
        for (int i = 0; i < s; ++i) posterior.p[i] = prior[i] * model.densities[i](y) / pred;
        integral += rule.weights[q] * pred * interpolate(field, posterior);
    }
    double v = model.continue_immediate(belief) + integral;
    if (!std::isfinite(v)) throw NumericalError("continuation_value: non-finite value");
    return v;
}

double continuation_value(const Model& model, const ValueField& field, const Belief& belief,
                          const SolverOptions& options) {
    return continuation_value(model.decision_model(), field, belief, options);
}

namespace {

struct SweepCore {
    const ContinuationOperator& op;
    const SimplexGrid& grid;

    void evaluate_point(const Vec& old_values, int p, double& value, Action& action) const {
        const double cont = op.evaluate(old_values, p);
        const double stop = op.stop_value(p);
        if (!std::isfinite(cont))
            throw NumericalError("sweep: non-finite value at grid point " + std::to_string(p));
        if (stop >= cont) {
            value = stop;
            action = Action::Stop;
        } else {
            value = cont;
            action = Action::Continue;
        }
    }

    // Plain Jacobi sweep over all points.
    void plain(const Vec& old_values, Vec& new_values, std::vector<Action>& new_actions, int workers,
               long& evaluated) const {
        const int n = static_cast<int>(grid.size());
        parallel_for(n, workers, [&](int begin, int end) {
            for (int p = begin; p < end; ++p) evaluate_point(old_values, p, new_values[p], new_actions[p]);
        });
        evaluated += n;
    }

    // Row traversal that fills -Pi T beyond the stopping boundary instead
    // of evaluating the quadrature there. Each row is evaluated in
    // increasing pi_1 until a point at or past the previous control limit
    // evaluates to Stop; the remainder of the row lies in the stopping
    // region and gets -Pi T directly. With trust_full_rows a row whose
    // previous actions were all Stop is filled without any evaluation;
    // inside the solve loop the first point is re-confirmed instead, since
    // the stopping region shrinks under the lower initialization and a row
    // may re-enter the continuation region.
    void accelerated(const Vec& old_values, const std::vector<Action>& prev_actions, Vec& new_values,
                     std::vector<Action>& new_actions, int workers, long& evaluated, long& skipped,
                     bool trust_full_rows) const {
        const int n_rows = grid.n_rows();
        std::vector<long> eval_per(n_rows, 0), skip_per(n_rows, 0);
        parallel_for(n_rows, workers, [&](int begin, int end) {
            for (int row = begin; row < end; ++row) {
                const int rb = grid.row_begin(row);
                const int re = grid.row_end(row);
                int prev_limit = re;  // first previously-stopped point of the row
                for (int p = rb; p < re; ++p)
                    if (prev_actions[p] == Action::Stop) {
                        prev_limit = p;
                        break;
                    }
                int p = rb;
                if (prev_limit > rb || !trust_full_rows) {
                    for (; p < re; ++p) {
                        evaluate_point(old_values, p, new_values[p], new_actions[p]);
                        ++eval_per[row];
                        if (p >= prev_limit && new_actions[p] == Action::Stop) {
                            ++p;
                            break;
                        }
                    }
                }
                for (; p < re; ++p) {
                    new_values[p] = op.stop_value(p);
                    new_actions[p] = Action::Stop;
                    ++skip_per[row];
                }
            }
        });
        for (int r = 0; r < n_rows; ++r) {
            evaluated += eval_per[r];
            skipped += skip_per[r];
        }
    }
};

SweepTrace make_trace(int iteration, const SimplexGrid& grid, const Vec& old_values,
                      const Vec& new_values, const std::vector<Action>& old_actions,
                      const std::vector<Action>& new_actions, const Vec& stop_values,
                      const Vec* upper_values) {
    SweepTrace t;
    t.iteration = iteration;
    t.min_change = std::numeric_limits<double>::infinity();
    t.max_change = -std::numeric_limits<double>::infinity();
    for (size_t p = 0; p < grid.size(); ++p) {
        const double change = new_values[p] - old_values[p];
        t.sup_delta = std::max(t.sup_delta, std::fabs(change));
        t.min_change = std::min(t.min_change, change);
        t.max_change = std::max(t.max_change, change);
        if (new_actions[p] == Action::Stop) ++t.stop_count;
        if (old_actions[p] == Action::Continue && new_actions[p] == Action::Stop) ++t.region_entered;
        if (old_actions[p] == Action::Stop && new_actions[p] == Action::Continue) ++t.region_left;
        t.max_lower_violation = std::max(t.max_lower_violation, stop_values[p] - new_values[p]);
        if (upper_values)
            t.max_upper_violation = std::max(t.max_upper_violation, new_values[p] - (*upper_values)[p]);
    }
    return t;
}

Solution solve_core(const DecisionModel& dm, const SimplexGrid& grid, const SolverOptions& options,
                    Vec init_values, const Vec* upper_values) {
    const auto t0 = std::chrono::steady_clock::now();
    const ContinuationOperator op(dm, grid, options);
    const SweepCore core{op, grid};
    const int n = static_cast<int>(grid.size());

    Solution sol(grid);
    Vec old_values = std::move(init_values);
    Vec new_values(n);
    std::vector<Action> old_actions(n, Action::Continue);
    std::vector<Action> new_actions(n, Action::Continue);

    const bool accel = options.accelerate && options.init == InitKind::LowerT;
    bool converged = false;
    int m = 0;
    while (m < options.max_iterations) {
        ++m;
        // The first sweep has no action map to skip from.
        if (accel && m > 1)
            core.accelerated(old_values, old_actions, new_values, new_actions, options.workers,
                             sol.stats.evaluated, sol.stats.skipped, /*trust_full_rows=*/false);
        else
            core.plain(old_values, new_values, new_actions, options.workers, sol.stats.evaluated);

        SweepTrace trace = make_trace(m, grid, old_values, new_values, old_actions, new_actions,
                                      op.stop_values(), upper_values);
        trace.evaluated = sol.stats.evaluated;
        trace.skipped = sol.stats.skipped;
        sol.traces.push_back(trace);
        sol.stats.final_delta = trace.sup_delta;

        std::swap(old_values, new_values);
        std::swap(old_actions, new_actions);
        if (trace.sup_delta < options.epsilon) {
            converged = true;
            break;
        }
    }
    sol.stats.iterations = m;
    sol.stats.converged = converged;
    sol.stop_values = op.stop_values();
    sol.field.values = std::move(old_values);
    sol.actions = std::move(old_actions);
    sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

Vec hyperplane_values(const SimplexGrid& grid, const Vec& coeffs) {
    Vec v(grid.size());
    for (size_t p = 0; p < grid.size(); ++p) v[p] = -dot(grid.point(static_cast<int>(p)).p, coeffs);
    return v;
}

Solution all_stop_solution(const DecisionModel& dm, const SimplexGrid& grid) {
    Solution sol(grid);
    const int n = static_cast<int>(grid.size());
    sol.actions.assign(n, Action::Stop);
    sol.field.values = hyperplane_values(grid, dm.term_costs);
    sol.stop_values = sol.field.values;
    sol.stats.converged = true;
    sol.do_not_initiate = true;
    return sol;
}

}  // namespace

SweepResult sweep(const Model& model, const ValueField& field, const SolverOptions& options) {
    const SimplexGrid& grid = *field.grid;
    const DecisionModel dm = model.decision_model();
    SweepResult out{ValueField(grid), std::vector<Action>(grid.size(), Action::Continue)};
    if (model.do_not_initiate) {
        out.field.values = hyperplane_values(grid, dm.term_costs);
        out.actions.assign(grid.size(), Action::Stop);
        return out;
    }
    const ContinuationOperator op(dm, grid, options);
    const SweepCore core{op, grid};
    core.plain(field.values, out.field.values, out.actions, options.workers, out.evaluated);
    return out;
}

SweepResult accelerated_sweep(const Model& model, const ValueField& field,
                              const std::vector<Action>& previous_actions,
                              const SolverOptions& options) {
    const SimplexGrid& grid = *field.grid;
    const DecisionModel dm = model.decision_model();
    const ContinuationOperator op(dm, grid, options);
    const SweepCore core{op, grid};
    SweepResult out{ValueField(grid), std::vector<Action>(grid.size(), Action::Continue)};
    core.accelerated(field.values, previous_actions, out.field.values, out.actions, options.workers,
                     out.evaluated, out.skipped, /*trust_full_rows=*/true);
    return out;
}

Solution solve(const Model& model, const SimplexGrid& grid, const SolverOptions& options) {
    const DecisionModel dm = model.decision_model();
    if (model.do_not_initiate) return all_stop_solution(dm, grid);
    const Vec upper = hyperplane_values(grid, model.upper_costs);
    Vec init = options.init == InitKind::LowerT ? hyperplane_values(grid, model.spec.term_costs) : upper;
    return solve_core(dm, grid, options, std::move(init), &upper);
}

Solution solve(const DecisionModel& model, const SimplexGrid& grid, const SolverOptions& options) {
    if (options.init != InitKind::LowerT)
        throw ValidationError("solve: generalized decision models support LowerT initialization only");
    return solve_core(model, grid, options, hyperplane_values(grid, model.term_costs), nullptr);
}

CertifiedSolution certified_solve(const Model& model, const SimplexGrid& grid,
                                  const SolverOptions& options) {
    CertifiedSolution cs{Solution(grid), Solution(grid)};
    SolverOptions lower_opts = options;
    lower_opts.init = InitKind::LowerT;
    SolverOptions upper_opts = options;
    upper_opts.init = InitKind::UpperU;
    upper_opts.accelerate = false;
    // A per-sweep residual of epsilon leaves each iterate up to
    // epsilon / (1 - beta) away from the fixed point, where beta is the
    // empirical geometric decay rate. Tighten the inner tolerance until the
    // certified gap itself is within the requested budget.
    const double target_gap = 10.0 * options.epsilon;
    for (int attempt = 0; attempt < 6; ++attempt) {
        cs.lower = solve(model, grid, lower_opts);
        cs.upper = solve(model, grid, upper_opts);
        cs.gap = -std::numeric_limits<double>::infinity();
        for (size_t p = 0; p < grid.size(); ++p)
            cs.gap = std::max(cs.gap, cs.upper.field.values[p] - cs.lower.field.values[p]);
        if (cs.gap <= target_gap || !cs.lower.stats.converged || !cs.upper.stats.converged) break;
        const double shrink = std::min(0.5, 0.5 * target_gap / cs.gap);
        lower_opts.epsilon *= shrink;
        upper_opts.epsilon *= shrink;
    }
    cs.region_inclusion_violations = 0;
    for (size_t p = 0; p < grid.size(); ++p)
        if (cs.upper.actions[p] == Action::Stop && cs.lower.actions[p] == Action::Continue)
            ++cs.region_inclusion_violations;
    cs.lower.certified_gap = cs.gap;
    cs.upper.certified_gap = cs.gap;
    return cs;
}

}  // namespace bpc

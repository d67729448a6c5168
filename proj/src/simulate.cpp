#include "bpc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace bpc {

TrueProcessSpec TrueProcessSpec::absorbing(ModelSpec spec) {
    TrueProcessSpec t;
    t.inter_rates = Matrix(spec.n_causes, spec.n_causes);
    t.base = std::move(spec);
    return t;
}

void validate_true_spec(const TrueProcessSpec& spec) {
    const int n = spec.base.n_causes;
    if (spec.inter_rates.rows != n || spec.inter_rates.cols != n)
        throw ValidationError("inter_rates: expected an N x N matrix");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j && spec.inter_rates(i, j) != 0.0)
                throw ValidationError("inter_rates: diagonal must be zero");
            if (spec.inter_rates(i, j) < 0.0)
                throw ValidationError("inter_rates: entries must be nonnegative");
        }
}

Matrix true_generator(const TrueProcessSpec& spec) {
    validate_true_spec(spec);
    const int n = spec.base.n_causes;
    Matrix g(n + 1, n + 1);
    double lambda = 0.0;
    for (int i = 0; i < n; ++i) {
        g(0, i + 1) = spec.base.rates[i];
        lambda += spec.base.rates[i];
    }
    g(0, 0) = -lambda;
    for (int i = 1; i <= n; ++i) {
        double out = 0.0;
        for (int j = 1; j <= n; ++j) {
            if (j == i) continue;
            g(i, j) = spec.inter_rates(i - 1, j - 1);
            out += g(i, j);
        }
        g(i, i) = -out;
    }
    return g;
}

DecisionModel true_decision_model(const TrueProcessSpec& spec) {
    const Matrix g = true_generator(spec);
    const double h = spec.base.interval;
    const int s = g.rows;
    DecisionModel dm;
    Matrix gh = g;
    for (double& v : gh.data) v *= h;
    dm.P = expm(gh);
    const Matrix occupancy = expm_integral(g, h);  // expected time in each state over one interval
    Vec c(s, 0.0);
    for (int i = 0; i < spec.base.n_causes; ++i) c[i + 1] = spec.base.oc_costs[i];
    dm.interval_oc_cost = right_mul(occupancy, c);
    dm.term_costs = spec.base.term_costs;
    dm.reward_rate = spec.base.reward_rate;
    dm.sample_cost = spec.base.sample_cost;
    dm.interval = spec.base.interval;
    dm.densities = spec.base.densities;
    return dm;
}

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Continuous-time chain with exact exponential event times.
struct ChainState {
    int state = 0;
    double t = 0.0;
    double next_event = 0.0;
    int next_state = 0;
    Vec occupancy;
};

struct ChainRates {
    // Per state: total exit rate and cumulative jump weights.
    Vec exit_rate;
    std::vector<Vec> jump_cum;  // cumulative rates to states 0..N
};

ChainRates make_rates(const TrueProcessSpec& spec) {
    const Matrix g = true_generator(spec);
    const int s = g.rows;
    ChainRates rates;
    rates.exit_rate.assign(s, 0.0);
    rates.jump_cum.assign(s, Vec(s, 0.0));
    for (int i = 0; i < s; ++i) {
        double total = 0.0;
        for (int j = 0; j < s; ++j) {
            if (j != i) total += g(i, j);
            rates.jump_cum[i][j] = total;
        }
        rates.exit_rate[i] = total;
    }
    return rates;
}

void schedule_event(ChainState& chain, const ChainRates& rates, std::mt19937_64& rng) {
    const double rate = rates.exit_rate[chain.state];
    if (rate <= 0.0) {
        chain.next_event = std::numeric_limits<double>::infinity();
        return;
    }
    std::exponential_distribution<double> exp_dist(rate);
    chain.next_event = chain.t + exp_dist(rng);
    std::uniform_real_distribution<double> unif(0.0, rate);
    const double u = unif(rng);
    const Vec& cum = rates.jump_cum[chain.state];
    int next = 0;
    while (next < static_cast<int>(cum.size()) - 1 && u >= cum[next]) ++next;
    chain.next_state = next;
}

void advance_to(ChainState& chain, const ChainRates& rates, double target, std::mt19937_64& rng) {
    while (chain.next_event < target) {
        chain.occupancy[chain.state] += chain.next_event - chain.t;
        chain.t = chain.next_event;
        chain.state = chain.next_state;
        schedule_event(chain, rates, rng);
    }
    chain.occupancy[chain.state] += target - chain.t;
    chain.t = target;
}

// Log-space posterior for observations far in the density tails.
Belief log_space_update(const DecisionModel& model, const Belief& belief, double y) {
    const Vec prior = left_mul(belief.p, model.P);
    const int s = model.n_states();
    Vec logw(s, -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < s; ++i) {
        if (prior[i] <= 0.0) continue;
        const auto& f = model.densities[i];
        const double logf = -0.5 * std::log(2.0 * std::numbers::pi * f.variance) -
                            (y - f.mean) * (y - f.mean) / (2.0 * f.variance);
        logw[i] = std::log(prior[i]) + logf;
        best = std::max(best, logw[i]);
    }
    Belief post;
    post.p.assign(s, 0.0);
    double denom = 0.0;
    for (int i = 0; i < s; ++i) {
        if (std::isfinite(logw[i])) post.p[i] = std::exp(logw[i] - best);
        denom += post.p[i];
    }
    for (double& v : post.p) v /= denom;
    return post;
}

struct Replication {
    double reward = 0.0;
    long stop_epoch = 0;
    int terminal_state = 0;
    bool truncated = false;
};

Replication run_replication(const TrueProcessSpec& true_spec, const ChainRates& rates,
                            const DecisionModel& belief_model, const Policy& policy,
                            long horizon_cap, std::mt19937_64& rng) {
    const int s = belief_model.n_states();
    const double h = true_spec.base.interval;
    ChainState chain;
    chain.occupancy.assign(s, 0.0);
    schedule_event(chain, rates, rng);

    Belief belief = Belief::vertex(0, s);
    long n = 0;
    bool truncated = false;
    while (decide(policy, belief) == Action::Continue) {
        if (n >= horizon_cap) {
            truncated = true;
            break;
        }
        advance_to(chain, rates, (n + 1) * h, rng);
        const NormalDensity& f = true_spec.base.densities[chain.state];
        std::normal_distribution<double> obs(f.mean, std::sqrt(f.variance));
        const double y = obs(rng);
        try {
            belief = bayes_update(belief_model, belief, y);
        } catch (const NumericalError&) {
            belief = log_space_update(belief_model, belief, y);
        }
        ++n;
    }

    Replication rep;
    rep.stop_epoch = n;
    rep.terminal_state = chain.state;
    rep.truncated = truncated;
    double oc_cost = 0.0;
    for (int i = 1; i < s; ++i) oc_cost += true_spec.base.oc_costs[i - 1] * chain.occupancy[i];
    rep.reward = true_spec.base.reward_rate * h * n - true_spec.base.sample_cost * n - oc_cost -
                 true_spec.base.term_costs[chain.state];
    return rep;
}

// Order-independent pairwise summation.
double pairwise_sum(const Vec& values, size_t begin, size_t end) {
    if (end - begin <= 8) {
        double s = 0.0;
        for (size_t i = begin; i < end; ++i) s += values[i];
        return s;
    }
    const size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(values, begin, mid) + pairwise_sum(values, mid, end);
}

}  // namespace

SimResult simulate(const TrueProcessSpec& true_spec, const DecisionModel& belief_model,
                   const Policy& policy, const SimOptions& options) {
    validate_true_spec(true_spec);
    if (options.n_reps < 1) throw ValidationError("simulate: n_reps must be positive");
    const ChainRates rates = make_rates(true_spec);
    const long n = options.n_reps;

    Vec rewards(n), stop_epochs(n);
    std::vector<char> false_alarm(n, 0), truncated(n, 0);

    const int workers = std::max(1, options.workers);
    auto worker_body = [&](long begin, long end) {
        for (long rep = begin; rep < end; ++rep) {
            // Independent substream per replication; results do not depend on
            // worker count or execution order.
            std::mt19937_64 rng(splitmix64(options.seed + static_cast<uint64_t>(rep)));
            const Replication r =
                run_replication(true_spec, rates, belief_model, policy, options.horizon_cap, rng);
            rewards[rep] = r.reward;
            stop_epochs[rep] = static_cast<double>(r.stop_epoch);
            false_alarm[rep] = !r.truncated && r.terminal_state == 0;
            truncated[rep] = r.truncated;
        }
    };
    if (workers == 1) {
        worker_body(0, n);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const long begin = w * chunk;
            const long end = std::min<long>(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker_body, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    SimResult result;
    result.n_reps = n;
    result.seed = options.seed;
    result.mean_reward = pairwise_sum(rewards, 0, rewards.size()) / n;
    result.mean_stop_time = pairwise_sum(stop_epochs, 0, stop_epochs.size()) / n;
    Vec sq(n);
    for (long i = 0; i < n; ++i) {
        const double d = rewards[i] - result.mean_reward;
        sq[i] = d * d;
    }
    const double var = n > 1 ? pairwise_sum(sq, 0, sq.size()) / (n - 1) : 0.0;
    result.ci_halfwidth = 1.959963984540054 * std::sqrt(var / n);
    long fa = 0, tr = 0;
    for (long i = 0; i < n; ++i) {
        fa += false_alarm[i];
        tr += truncated[i];
    }
    result.false_alarm_rate = static_cast<double>(fa) / n;
    result.truncated = tr;
    return result;
}

std::vector<MismatchRow> mismatch_sweep(const ModelSpec& design_spec,
                                        const std::vector<LabeledTrueSpec>& true_specs, int resolution,
                                        const SolverOptions& solver_options,
                                        const SimOptions& sim_options) {
    const Model design_model = validate_and_build(design_spec);
    const SimplexGrid grid = build_grid(design_spec.n_causes, resolution);
    const Solution design_solution = solve(design_model, grid, solver_options);
    const Policy design_policy = extract(design_solution);
    const DecisionModel design_dm = design_model.decision_model();

    std::vector<MismatchRow> rows;
    for (const auto& [label, true_spec] : true_specs) {
        MismatchRow row;
        row.label = label;
        try {
            if (true_spec.base.n_causes != design_spec.n_causes)
                throw ValidationError("mismatch_sweep: true spec has a different number of causes");
            row.approx = simulate(true_spec, design_dm, design_policy, sim_options);

            bool has_inter = false;
            for (double v : true_spec.inter_rates.data) has_inter = has_inter || v != 0.0;
            if (!has_inter) {
                // The true process is in the model class: solve it exactly.
                const Model true_model = validate_and_build(true_spec.base);
                const Solution true_solution = solve(true_model, grid, solver_options);
                std::vector<int> t(grid.n_states(), 0);
                t[0] = grid.resolution();
                row.exact_reward = true_solution.field.values[grid.index_of(t.data())];
            } else {
                // Chart built from the true dynamics, evaluated by simulation.
                const DecisionModel true_dm = true_decision_model(true_spec);
                const Solution true_solution = solve(true_dm, grid, solver_options);
                const Policy true_policy = extract(true_solution);
                row.exact_sim = simulate(true_spec, true_dm, true_policy, sim_options);
                row.exact_reward = row.exact_sim->mean_reward;
                row.exact_is_simulated = true;
            }
            row.error_pct = row.exact_reward == 0.0
                                ? 0.0
                                : 100.0 * (row.exact_reward - row.approx.mean_reward) /
                                      std::fabs(row.exact_reward);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace bpc

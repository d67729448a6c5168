#include "bpc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bpc {

double r0_of_h(const ModelSpec& spec, double h) {
    if (!(h > 0.0)) throw ValidationError("r0_of_h: h must be positive");
    double lambda = 0.0;
    for (double li : spec.rates) lambda += li;
    const double decay = std::exp(-lambda * h);
    const double gamma = 1.0 - (1.0 - decay) / (lambda * h);
    double c_lambda = 0.0, t_lambda = 0.0;
    for (size_t i = 0; i < spec.rates.size(); ++i) {
        c_lambda += spec.oc_costs[i] * spec.rates[i] / lambda;
        t_lambda += spec.term_costs[i + 1] * spec.rates[i] / lambda;
    }
    return (gamma * c_lambda * h - spec.reward_rate * h + spec.sample_cost) / (1.0 - decay) + t_lambda;
}

std::vector<std::pair<double, double>> feasible_brackets(const ModelSpec& spec, double h_min,
                                                         double h_max, int scan_points) {
    if (!(h_min > 0.0 && h_min < h_max)) throw ValidationError("feasible_interval: need 0 < h_min < h_max");
    const double t0 = spec.term_costs[0];
    auto margin = [&](double h) { return r0_of_h(spec, h) - t0; };

    // Log-spaced scan for sign changes, then bisection to 1e-3 relative tolerance.
    std::vector<double> hs(scan_points);
    const double lr = std::log(h_min), ur = std::log(h_max);
    for (int i = 0; i < scan_points; ++i)
        hs[i] = std::exp(lr + (ur - lr) * i / static_cast<double>(scan_points - 1));

    auto bisect = [&](double lo, double hi) {
        double flo = margin(lo);
        while (hi - lo > 1e-3 * hi) {
            const double mid = 0.5 * (lo + hi);
            const double fm = margin(mid);
            if ((fm <= 0.0) == (flo <= 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    std::vector<std::pair<double, double>> feasible;
    double start = 0.0;
    bool inside = margin(hs[0]) <= 0.0;
    if (inside) start = hs[0];
    for (int i = 1; i < scan_points; ++i) {
        const bool now = margin(hs[i]) <= 0.0;
        if (now == inside) continue;
        const double root = bisect(hs[i - 1], hs[i]);
        if (now)
            start = root;
        else
            feasible.emplace_back(start, root);
        inside = now;
    }
    if (inside) feasible.emplace_back(start, hs.back());
    return feasible;
}

std::optional<std::pair<double, double>> feasible_interval(const ModelSpec& spec, double h_min,
                                                           double h_max, int scan_points) {
    const auto brackets = feasible_brackets(spec, h_min, h_max, scan_points);
    if (brackets.empty()) return std::nullopt;
    return *std::max_element(brackets.begin(), brackets.end(), [](const auto& a, const auto& b) {
        return (a.second - a.first) < (b.second - b.first);
    });
}

IntervalAnalysis optimize_h(const ModelSpec& spec, const std::vector<double>& h_values, int resolution,
                            const SolverOptions& options, bool enforce_feasibility) {
    if (h_values.empty()) throw ValidationError("optimize_h: h_values must be nonempty");
    IntervalAnalysis out;
    const double t0 = spec.term_costs[0];

    for (double h : h_values) {
        IntervalAnalysis::CurvePoint pt;
        pt.h = h;
        const double r0 = r0_of_h(spec, h);
        pt.upper_bound = -r0;
        pt.lower_bound = -t0;
        if (enforce_feasibility && r0 > t0) {
            pt.reward = -t0;  // do-not-initiate regime
            out.curve.push_back(pt);
            continue;
        }
        try {
            ModelSpec at_h = spec;
            at_h.interval = h;
            const Model model = validate_and_build(at_h);
            const SimplexGrid grid = build_grid(spec.n_causes, resolution);
            // The Bellman residual accumulates over roughly 1/h sampling
            // epochs per unit time, so the sup-norm threshold is scaled with
            // h (and the iteration cap inversely) to keep the value error
            // comparable across the curve.
            SolverOptions at_h_options = options;
            if (h < 1.0) {
                at_h_options.epsilon = options.epsilon * h;
                const double cap = std::min(2e6, options.max_iterations / h);
                at_h_options.max_iterations = static_cast<int>(cap);
            }
            const Solution sol = solve(model, grid, at_h_options);
            // V(e_0): the vertex with t_0 = resolution.
            std::vector<int> t(grid.n_states(), 0);
            t[0] = resolution;
            pt.reward = sol.field.values[grid.index_of(t.data())];
            pt.solved = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        out.curve.push_back(pt);
    }

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& pt : out.curve) {
        if (!pt.solved) continue;
        if (pt.reward > best || (pt.reward == best && out.h_star && pt.h < *out.h_star)) {
            best = pt.reward;
            out.h_star = pt.h;
        }
    }
    out.feasible = feasible_interval(spec, h_values.front() * 0.5, h_values.back() * 2.0);
    return out;
}

}  // namespace bpc

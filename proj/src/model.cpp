#include "bpc/model.hpp"

#include <cmath>
#include <numbers>

namespace bpc {

namespace {
constexpr double kDensityFloor = 1e-300;
}

double NormalDensity::operator()(double y) const {
    const double z = (y - mean) * (y - mean) / (2.0 * variance);
    const double v = std::exp(-z) / std::sqrt(2.0 * std::numbers::pi * variance);
    return v < kDensityFloor ? 0.0 : v;
}

double NormalDensity::support_lo(double n_sigmas) const { return mean - n_sigmas * std::sqrt(variance); }
double NormalDensity::support_hi(double n_sigmas) const { return mean + n_sigmas * std::sqrt(variance); }

ModelSpec ModelSpec::with_shifts(Vec rates, Vec oc_costs, Vec term_costs, double reward_rate,
                                 double sample_cost, double interval, const Vec& deltas, double mu,
                                 double sigma) {
    ModelSpec spec;
    spec.n_causes = static_cast<int>(rates.size());
    spec.rates = std::move(rates);
    spec.oc_costs = std::move(oc_costs);
    spec.term_costs = std::move(term_costs);
    spec.reward_rate = reward_rate;
    spec.sample_cost = sample_cost;
    spec.interval = interval;
    spec.densities.push_back({mu, sigma * sigma});
    for (double d : deltas) spec.densities.push_back({mu + d * sigma, sigma * sigma});
    return spec;
}

Belief Belief::vertex(int i, int n_states) {
    Belief b;
    b.p.assign(n_states, 0.0);
    b.p[i] = 1.0;
    return b;
}

bool Belief::valid(double tol) const {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) return false;
        sum += v;
    }
    return std::fabs(sum - 1.0) <= tol;
}

double DecisionModel::stop_value(const Belief& belief) const { return -dot(belief.p, term_costs); }

double DecisionModel::continue_immediate(const Belief& belief) const {
    return reward_rate * interval - dot(belief.p, interval_oc_cost) - sample_cost;
}

Model validate_and_build(const ModelSpec& spec) {
    const int n = spec.n_causes;
    if (n < 1) throw ValidationError("n_causes: must be a positive integer");
    if (static_cast<int>(spec.rates.size()) != n) throw ValidationError("rates: expected N entries");
    if (static_cast<int>(spec.oc_costs.size()) != n) throw ValidationError("oc_costs: expected N entries");
    if (static_cast<int>(spec.term_costs.size()) != n + 1)
        throw ValidationError("term_costs: expected N+1 entries");
    if (static_cast<int>(spec.densities.size()) != n + 1)
        throw ValidationError("densities: expected N+1 entries");
    if (!(spec.reward_rate > 0.0)) throw ValidationError("reward_rate: must be positive");
    if (spec.sample_cost < 0.0) throw ValidationError("sample_cost: must be nonnegative");
    if (!(spec.interval > 0.0)) throw ValidationError("interval: must be positive");
    for (double li : spec.rates)
        if (!(li > 0.0)) throw ValidationError("rates: all rates must be positive");
    for (double ci : spec.oc_costs)
        if (!(ci > spec.reward_rate))
            throw ValidationError("oc_costs: every out-of-control cost must exceed reward_rate");
    for (double ti : spec.term_costs)
        if (ti < 0.0) throw ValidationError("term_costs: must be nonnegative");
    for (const auto& f : spec.densities)
        if (!(f.variance > 0.0)) throw ValidationError("densities: variance must be positive");

    Model m;
    m.spec = spec;
    const double lambda = [&] {
        double s = 0.0;
        for (double li : spec.rates) s += li;
        return s;
    }();
    if (!(lambda > 0.0)) throw ValidationError("rates: total rate is degenerate (zero)");
    m.lambda_total = lambda;
    const double h = spec.interval;
    const double decay = std::exp(-lambda * h);

    m.P = Matrix::identity(n + 1);
    m.P(0, 0) = decay;
    for (int i = 0; i < n; ++i) m.P(0, i + 1) = (1.0 - decay) * spec.rates[i] / lambda;

    m.gamma = 1.0 - (1.0 - decay) / (lambda * h);
    m.Q = Matrix::identity(n + 1);
    m.Q(0, 0) = 1.0 - m.gamma;
    for (int i = 0; i < n; ++i) m.Q(0, i + 1) = spec.rates[i] * m.gamma / lambda;

    m.lambda_vec.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) m.lambda_vec[i + 1] = spec.rates[i] / lambda;

    double c_lambda = 0.0;
    for (int i = 0; i < n; ++i) c_lambda += spec.oc_costs[i] * spec.rates[i] / lambda;
    double t_lambda = 0.0;
    for (int i = 0; i < n; ++i) t_lambda += spec.term_costs[i + 1] * spec.rates[i] / lambda;

    m.r0 = (m.gamma * c_lambda * h - spec.reward_rate * h + spec.sample_cost) / (1.0 - decay) + t_lambda;
    m.upper_costs = spec.term_costs;
    m.upper_costs[0] = m.r0;
    m.do_not_initiate = m.r0 > spec.term_costs[0];
    return m;
}

DecisionModel Model::decision_model() const {
    DecisionModel dm;
    dm.P = P;
    Vec c(n_states(), 0.0);
    for (int i = 0; i < spec.n_causes; ++i) c[i + 1] = spec.oc_costs[i];
    dm.interval_oc_cost = right_mul(Q, c);
    for (double& v : dm.interval_oc_cost) v *= spec.interval;
    dm.term_costs = spec.term_costs;
    dm.reward_rate = spec.reward_rate;
    dm.sample_cost = spec.sample_cost;
    dm.interval = spec.interval;
    dm.densities = spec.densities;
    return dm;
}

namespace {

Belief bayes_update_impl(const Matrix& P, const std::vector<NormalDensity>& densities,
                         const Belief& belief, double y) {
    const Vec prior = left_mul(belief.p, P);
    Belief post;
    post.p.resize(prior.size());
    double denom = 0.0;
    for (size_t i = 0; i < prior.size(); ++i) {
        post.p[i] = prior[i] * densities[i](y);
        denom += post.p[i];
    }
    if (denom <= 0.0)
        throw NumericalError(
            "bayes_update: predictive density underflowed to zero; the observation lies outside all "
            "density supports (consider a log-space update)");
    for (double& v : post.p) v /= denom;
    return post;
}

double predictive_impl(const Matrix& P, const std::vector<NormalDensity>& densities,
                       const Belief& belief, double y) {
    const Vec prior = left_mul(belief.p, P);
    double s = 0.0;
    for (size_t i = 0; i < prior.size(); ++i) s += prior[i] * densities[i](y);
    return s;
}

}  // namespace

Belief bayes_update(const Model& model, const Belief& belief, double y) {
    return bayes_update_impl(model.P, model.spec.densities, belief, y);
}

Belief bayes_update(const DecisionModel& model, const Belief& belief, double y) {
    return bayes_update_impl(model.P, model.densities, belief, y);
}

double predictive_density(const Model& model, const Belief& belief, double y) {
    return predictive_impl(model.P, model.spec.densities, belief, y);
}

double predictive_density(const DecisionModel& model, const Belief& belief, double y) {
    return predictive_impl(model.P, model.densities, belief, y);
}

ActionHint sufficient_action(const Model& model, const Belief& belief) {
    const int n = model.n_states();
    Vec c(n, 0.0);
    for (int i = 0; i < model.spec.n_causes; ++i) c[i + 1] = model.spec.oc_costs[i];
    const double h = model.spec.interval;
    const double rh = model.spec.reward_rate * h;
    const double d = model.spec.sample_cost;

    const Vec qch = right_mul(model.Q, c);
    const Vec pu = right_mul(model.P, model.upper_costs);
    const Vec pt = right_mul(model.P, model.spec.term_costs);

    double stop_crit = d;
    double cont_crit = d;
    for (int i = 0; i < n; ++i) {
        stop_crit += belief.p[i] * (qch[i] * h + pu[i] - model.spec.term_costs[i]);
        cont_crit += belief.p[i] * (qch[i] * h + pt[i] - model.spec.term_costs[i]);
    }
    if (stop_crit > rh) return ActionHint::Stop;
    if (cont_crit < rh) return ActionHint::Continue;
    return ActionHint::Unknown;
}

}  // namespace bpc

#include "egan/pg_agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "egan/errors.hpp"

namespace egan::pg {

namespace {

constexpr double kProbFloor = 1e-7;

}  // namespace

void AgentConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("policy learning rate must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (update_frequency < 1) throw ConfigError("update frequency must be at least 1");
    for (auto h : hidden) {
        if (h == 0) throw ConfigError("policy hidden sizes must be positive");
    }
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
    std::vector<double> out(rewards.size());
    double running = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        running = rewards[i] + gamma * running;
        out[i] = running;
    }
    return out;
}

std::vector<double> zscore(std::span<const double> values, double eps) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty() ||
        std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
        return out;
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / (sd + eps);
    return out;
}

nn::Matrix states_matrix(std::span<const env::CartPoleState> states) {
    nn::Matrix m(states.size(), experience::kStateDim);
    for (std::size_t i = 0; i < states.size(); ++i) {
        m(i, 0) = states[i].x;
        m(i, 1) = states[i].x_dot;
        m(i, 2) = states[i].theta;
        m(i, 3) = states[i].theta_dot;
    }
    return m;
}

PolicyGradient policy_gradient(const nn::Mlp& policy, const nn::Matrix& states,
                               std::span<const int> actions, std::span<const double> weights) {
    const std::size_t n = states.rows();
    if (actions.size() != n || weights.size() != n || n == 0) {
        throw ShapeError("policy_gradient: states, actions and weights must have equal nonzero length");
    }
    const auto cache = nn::forward(policy, states);
    const auto& probs = cache.output();
    nn::Matrix out_grad(n, probs.cols());
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(actions[i]);
        const double p = probs(i, a);
        const double pc = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
        loss -= weights[i] * std::log(pc) * inv_n;
        if (p == pc) out_grad(i, a) = -weights[i] * inv_n / p;
    }
    return PolicyGradient{loss, nn::backward(policy, cache, out_grad).grads};
}

namespace {

std::vector<std::size_t> policy_sizes(const AgentConfig& c) {
    std::vector<std::size_t> sizes{experience::kStateDim};
    sizes.insert(sizes.end(), c.hidden.begin(), c.hidden.end());
    sizes.push_back(2);
    return sizes;
}

std::vector<nn::Activation> policy_activations(const AgentConfig& c) {
    std::vector<nn::Activation> acts(c.hidden.size(), nn::Activation::tanh);
    acts.push_back(nn::Activation::softmax);
    return acts;
}

}  // namespace

PolicyAgent::PolicyAgent(const AgentConfig& config, Rng& init_rng) : config_(config) {
    config_.validate();
    policy_ = nn::init_network(policy_sizes(config_), policy_activations(config_), init_rng);
    optimizer_ = nn::make_optimizer(config_.optimizer, config_.learning_rate);
}

std::array<double, 2> PolicyAgent::action_probabilities(const env::CartPoleState& s) const {
    const std::array<env::CartPoleState, 1> one{s};
    const auto p = nn::predict(policy_, states_matrix(one));
    return {p(0, 0), p(0, 1)};
}

int PolicyAgent::select_action(const env::CartPoleState& s, Rng& rng) const {
    const auto p = action_probabilities(s);
    return unit_uniform(rng) < p[0] ? 0 : 1;
}

void PolicyAgent::record(EpisodeTrace trace) { pending_.push_back(std::move(trace)); }

double PolicyAgent::update_on_episodes() {
    if (pending_.empty()) throw UsageError("update_on_episodes: no recorded episodes");
    std::vector<env::CartPoleState> states;
    std::vector<int> actions;
    std::vector<double> returns;
    for (const auto& tr : pending_) {
        states.insert(states.end(), tr.states.begin(), tr.states.end());
        actions.insert(actions.end(), tr.actions.begin(), tr.actions.end());
        const auto g = discounted_returns(tr.rewards, config_.gamma);
        returns.insert(returns.end(), g.begin(), g.end());
    }
    pending_.clear();
    if (states.empty()) return 0.0;
    const auto weights = zscore(returns);
    auto pg = policy_gradient(policy_, states_matrix(states), actions, weights);
    if (!pg.grads.all_zero()) nn::optimizer_step(policy_, pg.grads, optimizer_);
    return pg.loss;
}

std::vector<double> pretrain_on_synthetic(
    PolicyAgent& agent, const std::vector<std::vector<experience::Quadruplet>>& batches) {
    std::vector<double> losses;
    losses.reserve(batches.size());
    for (const auto& batch : batches) {
        if (batch.empty()) continue;
        std::vector<env::CartPoleState> states;
        std::vector<int> actions;
        std::vector<double> rewards;
        states.reserve(batch.size());
        for (const auto& q : batch) {
            states.push_back(q.state);
            actions.push_back(q.action);
            rewards.push_back(q.reward);
        }
        const auto weights = zscore(rewards);
        auto pg = policy_gradient(agent.policy(), states_matrix(states), actions, weights);
        if (!pg.grads.all_zero()) nn::optimizer_step(agent.policy(), pg.grads, agent.optimizer());
        losses.push_back(pg.loss);
    }
    return losses;
}

EpisodeTrace play_episode(const PolicyAgent& agent, env::CartPole& env, Rng& rng) {
    EpisodeTrace trace;
    auto s = env.reset(rng);
    while (!env.done()) {
        const int a = agent.select_action(s, rng);
        const auto r = env.step(a);
        trace.states.push_back(s);
        trace.actions.push_back(a);
        trace.rewards.push_back(r.reward);
        s = r.next;
    }
    return trace;
}

}  // namespace egan::pg

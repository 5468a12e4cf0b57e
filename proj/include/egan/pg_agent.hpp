#pragma once

#include <array>
#include <span>
#include <vector>

#include "egan/cartpole.hpp"
#include "egan/experience.hpp"
#include "egan/mlp.hpp"
#include "egan/optimizer.hpp"

namespace egan::pg {

struct AgentConfig {
    std::vector<std::size_t> hidden = {32};
    double learning_rate = 1e-3;
    nn::OptimizerKind optimizer = nn::OptimizerKind::sgd;
    double gamma = 0.99;
    int update_frequency = 5;

    void validate() const;
};

struct EpisodeTrace {
    std::vector<env::CartPoleState> states;
    std::vector<int> actions;
    std::vector<double> rewards;

    std::size_t size() const { return rewards.size(); }
};

// G_t = r_t + gamma * G_{t+1}, G_T = r_T.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// (v - mean) / (std + eps) with population std. An exactly constant input
// maps to all zeros.
std::vector<double> zscore(std::span<const double> values, double eps = 1e-8);

struct PolicyGradient {
    double loss = 0.0;
    nn::Gradients grads;
};

// loss = -mean_t w_t * log pi(a_t | s_t), probabilities clamped to [1e-7, 1 - 1e-7].
PolicyGradient policy_gradient(const nn::Mlp& policy, const nn::Matrix& states,
                               std::span<const int> actions, std::span<const double> weights);

nn::Matrix states_matrix(std::span<const env::CartPoleState> states);

// REINFORCE agent with a softmax policy over the two CartPole actions.
class PolicyAgent {
public:
    PolicyAgent(const AgentConfig& config, Rng& init_rng);

    const AgentConfig& config() const noexcept { return config_; }
    nn::Mlp& policy() noexcept { return policy_; }
    const nn::Mlp& policy() const noexcept { return policy_; }
    nn::OptimizerState& optimizer() noexcept { return optimizer_; }

    std::array<double, 2> action_probabilities(const env::CartPoleState& s) const;
    int select_action(const env::CartPoleState& s, Rng& rng) const;

    void record(EpisodeTrace trace);
    std::size_t pending_episodes() const noexcept { return pending_.size(); }
    bool update_due() const noexcept {
        return pending_.size() >= static_cast<std::size_t>(config_.update_frequency);
    }

    // One optimizer step over every pending episode, returns normalized z-scored
    // across the whole batch. Clears the accumulator. UsageError if empty.
    double update_on_episodes();

private:
    AgentConfig config_;
    nn::Mlp policy_;
    nn::OptimizerState optimizer_;
    std::vector<EpisodeTrace> pending_;
};

// One-step policy-gradient pass per synthetic batch, weighted by the
// z-scored reward channel. Returns the per-batch losses.
std::vector<double> pretrain_on_synthetic(
    PolicyAgent& agent, const std::vector<std::vector<experience::Quadruplet>>& batches);

// Plays one episode with the agent's stochastic policy.
EpisodeTrace play_episode(const PolicyAgent& agent, env::CartPole& env, Rng& rng);

}  // namespace egan::pg

#pragma once

#include <functional>
#include <vector>

#include "egan/rng.hpp"

namespace egan::env {

struct CartPoleState {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;

    friend bool operator==(const CartPoleState&, const CartPoleState&) = default;
};

struct EnvParams {
    double gravity = 9.8;
    double mass_cart = 1.0;
    double mass_pole = 0.1;
    double pole_half_length = 0.5;
    double force_mag = 10.0;
    double tau = 0.02;
    int max_steps = 200;
    double x_threshold = 2.4;
    double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;

    // Throws ConfigError if any constant is non-positive.
    void validate() const;
};

struct StepResult {
    CartPoleState next;
    double reward = 1.0;
    bool done = false;
};

// One semi-explicit Euler step of the classic-control equations. Pure.
CartPoleState dynamics(const EnvParams& params, const CartPoleState& s, int action);

bool out_of_bounds(const EnvParams& params, const CartPoleState& s);

// Each component U(-0.05, 0.05).
CartPoleState reset_state(Rng& rng);

// Stateful episode wrapper: counts steps and refuses to continue a finished episode.
class CartPole {
public:
    explicit CartPole(EnvParams params = {});

    const EnvParams& params() const noexcept { return params_; }
    const CartPoleState& state() const noexcept { return state_; }
    bool done() const noexcept { return done_; }
    int steps() const noexcept { return steps_; }

    CartPoleState reset(Rng& rng);
    // Throws UsageError after termination or for an action outside {0, 1}.
    StepResult step(int action);

private:
    EnvParams params_;
    CartPoleState state_{};
    int steps_ = 0;
    bool done_ = true;
};

struct Transition {
    CartPoleState state;
    int action = 0;
    CartPoleState next;
    double reward = 1.0;
    bool done = false;
};

struct Episode {
    std::vector<Transition> transitions;
    int length() const { return static_cast<int>(transitions.size()); }
    double total_reward() const;
};

using PolicyFn = std::function<int(const CartPoleState&, Rng&)>;

// Reset from rng, then act with policy (which may draw from the same rng)
// until termination or max_steps.
Episode run_episode(CartPole& env, const PolicyFn& policy, Rng& rng);

PolicyFn random_policy();

}  // namespace egan::env

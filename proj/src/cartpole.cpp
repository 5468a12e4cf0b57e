#include "egan/cartpole.hpp"

#include <cmath>
#include <string>

#include "egan/errors.hpp"

namespace egan::env {

void EnvParams::validate() const {
    if (!(gravity > 0 && mass_cart > 0 && mass_pole > 0 && pole_half_length > 0 &&
          force_mag > 0 && tau > 0 && max_steps > 0 && x_threshold > 0 && theta_threshold > 0)) {
        throw ConfigError("cartpole parameters must all be positive");
    }
}

CartPoleState dynamics(const EnvParams& p, const CartPoleState& s, int action) {
    const double total_mass = p.mass_cart + p.mass_pole;
    const double polemass_length = p.mass_pole * p.pole_half_length;
    const double force = action == 1 ? p.force_mag : -p.force_mag;
    const double cos_t = std::cos(s.theta);
    const double sin_t = std::sin(s.theta);

    const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
        (p.pole_half_length * (4.0 / 3.0 - p.mass_pole * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

    return CartPoleState{
        s.x + p.tau * s.x_dot,
        s.x_dot + p.tau * x_acc,
        s.theta + p.tau * s.theta_dot,
        s.theta_dot + p.tau * theta_acc,
    };
}

bool out_of_bounds(const EnvParams& p, const CartPoleState& s) {
    return s.x < -p.x_threshold || s.x > p.x_threshold || s.theta < -p.theta_threshold ||
           s.theta > p.theta_threshold;
}

CartPoleState reset_state(Rng& rng) {
    CartPoleState s;
    s.x = uniform(rng, -0.05, 0.05);
    s.x_dot = uniform(rng, -0.05, 0.05);
    s.theta = uniform(rng, -0.05, 0.05);
    s.theta_dot = uniform(rng, -0.05, 0.05);
    return s;
}

CartPole::CartPole(EnvParams params) : params_(params) { params_.validate(); }

CartPoleState CartPole::reset(Rng& rng) {
    state_ = reset_state(rng);
    steps_ = 0;
    done_ = false;
    return state_;
}

StepResult CartPole::step(int action) {
    if (done_) {
        throw UsageError("step() on a terminated episode; call reset() first");
    }
    if (action != 0 && action != 1) {
        throw UsageError("cartpole action must be 0 or 1, got " + std::to_string(action));
    }
    state_ = dynamics(params_, state_, action);
    ++steps_;
    done_ = out_of_bounds(params_, state_) || steps_ >= params_.max_steps;
    return StepResult{state_, 1.0, done_};
}

double Episode::total_reward() const {
    double sum = 0.0;
    for (const auto& t : transitions) sum += t.reward;
    return sum;
}

Episode run_episode(CartPole& env, const PolicyFn& policy, Rng& rng) {
    Episode ep;
    CartPoleState s = env.reset(rng);
    while (!env.done()) {
        const int a = policy(s, rng);
        const StepResult r = env.step(a);
        ep.transitions.push_back(Transition{s, a, r.next, r.reward, r.done});
        s = r.next;
    }
    return ep;
}

PolicyFn random_policy() {
    return [](const CartPoleState&, Rng& rng) { return static_cast<int>(rng() >> 63); };
}

}  // namespace egan::env

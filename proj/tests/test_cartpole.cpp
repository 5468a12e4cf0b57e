#include <cmath>

#include "doctest.h"
#include "egan/cartpole.hpp"
#include "egan/errors.hpp"

using namespace egan;
using namespace egan::env;

namespace {

// Hand evaluation from rest: temp = F / m_total, theta_acc = (g sin - cos temp) /
// (l (4/3 - m_p cos^2 / m_total)), x_acc = temp - m_p l theta_acc cos / m_total.
void check_state(const CartPoleState& s, double x, double xd, double th, double thd, double tol) {
    CHECK(std::abs(s.x - x) <= tol);
    CHECK(std::abs(s.x_dot - xd) <= tol);
    CHECK(std::abs(s.theta - th) <= tol);
    CHECK(std::abs(s.theta_dot - thd) <= tol);
}

CartPoleState negated(const CartPoleState& s) { return {-s.x, -s.x_dot, -s.theta, -s.theta_dot}; }

}  // namespace

TEST_CASE("step from rest, action 1") {
    const auto next = dynamics(EnvParams{}, {}, 1);
    const double temp = 10.0 / 1.1;
    const double theta_acc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
    const double x_acc = temp - 0.05 * theta_acc / 1.1;
    check_state(next, 0.0, 0.02 * x_acc, 0.0, 0.02 * theta_acc, 1e-12);
    check_state(next, 0.0, 0.195122, 0.0, -0.292683, 1e-6);
}

TEST_CASE("step from rest, action 0") {
    check_state(dynamics(EnvParams{}, {}, 0), 0.0, -0.195122, 0.0, 0.292683, 1e-6);
}

TEST_CASE("reset is reproducible and stays in the start box") {
    Rng a(5), b(5);
    CHECK(reset_state(a) == reset_state(b));

    Rng rng(6);
    double sum[4] = {0, 0, 0, 0};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto s = reset_state(rng);
        const double v[4] = {s.x, s.x_dot, s.theta, s.theta_dot};
        for (int d = 0; d < 4; ++d) {
            CHECK(std::abs(v[d]) <= 0.05);
            sum[d] += v[d];
        }
    }
    for (double s : sum) CHECK(std::abs(s / n) <= 0.005);
}

TEST_CASE("every step pays 1.0 and stepping a finished episode is an error") {
    CartPole env;
    Rng rng(1);
    CHECK_THROWS_AS(env.step(0), UsageError);
    env.reset(rng);
    CHECK_THROWS_AS(env.step(2), UsageError);
    while (!env.done()) CHECK(env.step(0).reward == 1.0);
    CHECK_THROWS_AS(env.step(1), UsageError);
}

TEST_CASE("constant action 0 drops the pole before the cap") {
    CartPole env;
    Rng rng(2);
    const auto ep = run_episode(env, [](const CartPoleState&, Rng&) { return 0; }, rng);
    CHECK(ep.length() < 200);
    CHECK(ep.transitions.back().done);
    CHECK(ep.total_reward() == ep.length());
}

TEST_CASE("seeded random policy episodes are identical") {
    auto play = [] {
        CartPole env;
        Rng rng(42);
        return run_episode(env, random_policy(), rng);
    };
    const auto a = play();
    const auto b = play();
    REQUIRE(a.length() == b.length());
    for (int i = 0; i < a.length(); ++i) {
        CHECK(a.transitions[i].state == b.transitions[i].state);
        CHECK(a.transitions[i].action == b.transitions[i].action);
    }
}

TEST_CASE("property: mirror symmetry holds exactly") {
    Rng rng(17);
    const EnvParams p;
    for (int i = 0; i < 1000; ++i) {
        const CartPoleState s{uniform(rng, -2.4, 2.4), uniform(rng, -3, 3), uniform(rng, -0.2, 0.2),
                              uniform(rng, -3, 3)};
        const int a = static_cast<int>(rng() >> 63);
        CHECK(dynamics(p, negated(s), 1 - a) == negated(dynamics(p, s, a)));
    }
}

TEST_CASE("property: reward sum equals length and never exceeds the cap") {
    CartPole env;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto ep = run_episode(env, random_policy(), rng);
        CHECK(ep.total_reward() == ep.length());
        CHECK(ep.length() <= 200);
        for (const auto& t : ep.transitions) {
            CHECK(dynamics(env.params(), t.state, t.action) == t.next);
        }
    }
}

TEST_CASE("balancing policy is capped at max_steps") {
    CartPole env;
    Rng rng(4);
    const auto ep = run_episode(
        env, [](const CartPoleState& s, Rng&) { return s.theta + 0.5 * s.theta_dot > 0 ? 1 : 0; }, rng);
    CHECK(ep.length() == 200);
    CHECK(ep.transitions.back().done);
}

TEST_CASE("zero force near upright stays finite for 200 steps") {
    EnvParams p;
    p.force_mag = 0.0;
    CartPoleState s{0.0, 0.0, 0.01, 0.0};
    for (int i = 0; i < 200; ++i) {
        s = dynamics(p, s, 1);
        CHECK(std::isfinite(s.x));
        CHECK(std::isfinite(s.theta));
        CHECK(std::isfinite(s.theta_dot));
    }
}

TEST_CASE("invalid parameters are rejected") {
    EnvParams p;
    p.max_steps = 0;
    CHECK_THROWS_AS(CartPole{p}, ConfigError);
}

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Curves and reports land in the directory given
// as the first argument (default: acceptance_out).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "egan/cartpole.hpp"
#include "egan/enhancer.hpp"
#include "egan/gan.hpp"
#include "egan/harness.hpp"
#include "egan/pg_agent.hpp"
#include "egan/pipeline.hpp"
#include "egan/text.hpp"
#include "support/finite_diff.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace egan;
using egan::testing::check_gradients;
using egan::testing::random_matrix;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

double median(std::vector<double> v) { return quartiles(std::move(v)).median; }

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
    std::vector<std::uint64_t> s(n);
    std::iota(s.begin(), s.end(), std::uint64_t{0});
    return s;
}

// --- 1 ------------------------------------------------------------------------

Outcome gradient_oracles() {
    const auto t0 = Clock::now();
    Rng rng(20240601);
    int passed = 0;
    double worst = 0.0;
    std::string worst_case;
    const char* names[] = {"policy", "discriminator", "generator", "enhancer", "lambda*kl"};
    for (int i = 0; i < 100; ++i) {
        const int kind = i % 5;
        testing::GradCheck res;
        if (kind == 0) {
            pg::AgentConfig c;
            c.hidden = {1 + uniform_index(rng, 8)};
            pg::PolicyAgent agent(c, rng);
            auto& net = agent.policy();
            const std::size_t n = 1 + uniform_index(rng, 6);
            const auto s = random_matrix(rng, n, 4);
            std::vector<int> a(n);
            std::vector<double> w(n);
            for (std::size_t k = 0; k < n; ++k) {
                a[k] = static_cast<int>(rng() >> 63);
                w[k] = uniform(rng, -2, 2);
            }
            const auto g = pg::policy_gradient(net, s, a, w);
            res = check_gradients(net, g.grads, [&] { return testing::policy_loss(net, s, a, w); });
        } else if (kind == 1 || kind == 2 || kind == 4) {
            gan::GanConfig c;
            c.noise_dim = 1 + uniform_index(rng, 6);
            c.data_dim = kind == 4 ? 10 : 2 + uniform_index(rng, 6);
            c.generator_hidden = {1 + uniform_index(rng, 8)};
            c.discriminator_hidden = {1 + uniform_index(rng, 8)};
            auto g = gan::make_gan(c, rng);
            const std::size_t n = 4 + uniform_index(rng, 8);
            const auto noise = gan::sample_noise(rng, n, c.noise_dim);
            if (kind == 1) {
                const auto real = random_matrix(rng, n, c.data_dim);
                const auto step = gan::discriminator_gradient(g, real, noise);
                res = check_gradients(g.discriminator, step.grads,
                                      [&] { return testing::discriminator_loss(g, real, noise); });
            } else if (kind == 2) {
                const auto mode = (i / 5) % 2 ? gan::GeneratorLoss::minimax
                                              : gan::GeneratorLoss::non_saturating;
                const auto step = gan::generator_gradient(g, noise, mode);
                res = check_gradients(g.generator, step.grads,
                                      [&] { return testing::generator_loss(g, noise, mode); });
            } else {
                enhancer::EnhancerConfig ec;
                ec.hidden = {1 + uniform_index(rng, 8)};
                const auto model = enhancer::make_enhancer(ec, rng);
                const double lambda = uniform(rng, 0.1, 2.0);
                const auto target =
                    nn::predict(model.net, nn::predict(g.generator, noise).col_block(0, 5));
                const auto step = enhancer::refine_gradient(g, model, noise, lambda);
                res = check_gradients(g.generator, step.grads, [&] {
                    return lambda * testing::gaussian_kl(nn::predict(g.generator, noise).col_block(5, 5), target);
                });
            }
        } else {
            enhancer::EnhancerConfig ec;
            ec.hidden = {1 + uniform_index(rng, 8), 1 + uniform_index(rng, 8)};
            auto model = enhancer::make_enhancer(ec, rng);
            const auto rows = random_matrix(rng, 2 + uniform_index(rng, 8), 10);
            const auto step = enhancer::enhancer_gradient(model, rows);
            res = check_gradients(model.net, step.grads, [&] { return testing::enhancer_loss(model, rows); });
        }
        if (res.worst_rel < 1e-4) ++passed;
        if (res.worst_rel > worst) {
            worst = res.worst_rel;
            worst_case = std::string(names[kind]) + " case " + std::to_string(i);
        }
    }
    const double secs = seconds_since(t0);
    return {passed == 100 && secs < 60.0,
            std::to_string(passed) + "/100 cases within 1e-4, worst " + fmt(worst, 3) + " (" + worst_case +
                "), " + fmt(secs, 3) + " s"};
}

// --- 2 ------------------------------------------------------------------------

Outcome environment_oracle() {
    const auto next = env::dynamics(env::EnvParams{}, {}, 1);
    // temp = 10/1.1; theta_acc = -temp / (0.5 (4/3 - 0.1/1.1)); x_acc = temp - 0.05 theta_acc / 1.1
    const double temp = 10.0 / 1.1;
    const double theta_acc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
    const double x_acc = temp - 0.05 * theta_acc / 1.1;
    const double err = std::max({std::abs(next.x), std::abs(next.x_dot - 0.02 * x_acc), std::abs(next.theta),
                                 std::abs(next.theta_dot - 0.02 * theta_acc)});
    const bool rounded = std::abs(next.x_dot - 0.195122) < 5e-7 && std::abs(next.theta_dot + 0.292683) < 5e-7;

    Rng rng(2);
    int mirrored = 0;
    for (int i = 0; i < 1000; ++i) {
        const env::CartPoleState s{uniform(rng, -2.4, 2.4), uniform(rng, -3, 3), uniform(rng, -0.21, 0.21),
                                   uniform(rng, -3, 3)};
        const int a = static_cast<int>(rng() >> 63);
        const auto fwd = env::dynamics({}, s, a);
        const auto mir = env::dynamics({}, {-s.x, -s.x_dot, -s.theta, -s.theta_dot}, 1 - a);
        mirrored += mir == env::CartPoleState{-fwd.x, -fwd.x_dot, -fwd.theta, -fwd.theta_dot};
    }
    return {err <= 1e-9 && rounded && mirrored == 1000,
            "step error " + fmt(err, 3) + ", next (" + fmt(next.x) + ", " + fmt(next.x_dot, 6) + ", " +
                fmt(next.theta) + ", " + fmt(next.theta_dot, 6) + "), mirror " + std::to_string(mirrored) +
                "/1000"};
}

// --- 3 ------------------------------------------------------------------------

Outcome gan_arithmetic() {
    const std::vector<double> half{0.5};
    const double v = gan::gan_value(half, half);
    const double e_value = std::abs(v - 2.0 * std::log(0.5));

    Rng rng(3);
    const auto p = random_matrix(rng, 64, 5);
    const double same = enhancer::kl_regularizer(p, p);
    // Rows {+1, -1} per column have mean 0 and variance 1; shifting by one unit moves only the mean.
    nn::Matrix q(2, 5), shifted(2, 5);
    for (std::size_t j = 0; j < 5; ++j) {
        q(0, j) = 1.0;
        q(1, j) = -1.0;
        shifted(0, j) = 2.0;
        shifted(1, j) = 0.0;
    }
    const double unit = enhancer::kl_regularizer(shifted, q);
    const bool ok = e_value <= 1e-9 && std::abs(v + 1.386294) < 5e-7 && std::abs(same) <= 1e-9 &&
                    std::abs(unit - 2.5) <= 1e-9;
    return {ok, "V(0.5,0.5) = " + fmt(v, 10) + ", KL(identical) = " + fmt(same, 3) + ", KL(unit shift) = " +
                    fmt(unit, 12)};
}

// --- 4 ------------------------------------------------------------------------

Outcome baseline_learns(std::vector<LearningCurve>& curves) {
    const auto t0 = Clock::now();
    int reached = 0;
    std::string peaks;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ExperimentConfig c;
        c.mode = Mode::none;
        c.seed = seed;
        c.match_sample_budget = false;
        curves.push_back(run_experiment(c));
        const auto rolling = rolling_average(curves.back().rewards());
        const double peak = *std::max_element(rolling.begin(), rolling.end());
        reached += peak >= 150.0;
        peaks += (seed ? " " : "") + fmt(peak);
    }
    return {reached >= 4, std::to_string(reached) + "/5 seeds reach rolling 150 (peaks " + peaks + "), " +
                              fmt(seconds_since(t0), 3) + " s"};
}

// --- 5, 6 ---------------------------------------------------------------------

struct ModeRuns {
    std::map<Mode, std::vector<LearningCurve>> curves;
    std::vector<std::vector<double>> kl;
    double seconds = 0.0;
};

ModeRuns run_modes(const fs::path& out) {
    const auto t0 = Clock::now();
    ModeRuns runs;
    for (Mode m : {Mode::none, Mode::gan, Mode::egan}) {
        for (auto seed : seed_range(10)) {
            ExperimentConfig c;
            c.mode = m;
            c.seed = seed;
            auto r = run_experiment_full(c);
            write_curve_csv(r.curve, out / curve_filename(m, seed));
            if (m == Mode::egan) runs.kl.push_back(r.kl_history);
            runs.curves[m].push_back(std::move(r.curve));
        }
    }
    runs.seconds = seconds_since(t0);
    return runs;
}

Outcome sample_efficiency(const ModeRuns& runs, const fs::path& out) {
    const auto rows = report(runs.curves, 120.0);
    write_report_csv(rows, out / "report.csv");
    std::map<Mode, double> med;
    std::string detail;
    for (const auto& r : rows) {
        med[r.mode] = r.samples_to_threshold.median;
        std::size_t reached = 0;
        for (const auto& c : runs.curves.at(r.mode)) reached += samples_to_threshold(c, 120.0).has_value();
        detail += std::string(to_string(r.mode)) + " median " + fmt(med[r.mode], 6) + " (" +
                  std::to_string(reached) + "/10 reached), ";
    }
    const bool ok = med[Mode::egan] <= 0.90 * med[Mode::none] && med[Mode::egan] <= med[Mode::gan] &&
                    med[Mode::gan] <= med[Mode::none];
    const double ratio = med[Mode::egan] / med[Mode::none];
    return {ok, detail + "egan/none " + fmt(ratio, 4) + ", " + fmt(runs.seconds, 4) + " s"};
}

double mean_std_up_to(const std::vector<AggregateBin>& bins, double limit) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& b : bins) {
        if (b.bin > limit) break;
        sum += b.std;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

Outcome robustness(const ModeRuns& runs, const fs::path& out) {
    std::map<Mode, double> spread;
    for (const auto& [mode, curves] : runs.curves) {
        const auto bins = aggregate_runs(curves);
        write_aggregate_csv(bins, out / ("aggregate_" + std::string(to_string(mode)) + ".csv"));
        spread[mode] = mean_std_up_to(bins, 40000.0);
    }
    return {spread[Mode::egan] <= spread[Mode::gan],
            "mean per-bin std to 40000 samples: egan " + fmt(spread[Mode::egan]) + ", gan " +
                fmt(spread[Mode::gan]) + ", none " + fmt(spread[Mode::none])};
}

// --- 7 ------------------------------------------------------------------------

Outcome mechanism() {
    const auto t0 = Clock::now();
    std::vector<double> first, last;
    int beats = 0;
    for (auto seed : seed_range(10)) {
        ExperimentConfig c;
        c.mode = Mode::egan;
        c.seed = seed;
        c.refine.iterations = 10;
        c.refine.lambda = 1.0;
        const auto pre = pretrain_pipeline(c);
        first.push_back(pre.kl_history.front());
        last.push_back(pre.kl_history.back());

        const auto enc = pre.buffer.encoded(pre.stats);
        std::vector<std::size_t> idx(enc.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        auto split_rng = derive_rng(seed, 101);
        shuffle(idx, split_rng);
        const std::size_t cut = idx.size() * 4 / 5;
        const auto train = enc.gather_rows(std::span(idx.data(), cut));
        const auto test = enc.gather_rows(std::span(idx.data() + cut, idx.size() - cut));
        auto init = derive_rng(seed, kEnhancerInitStream);
        auto model = enhancer::make_enhancer(c.enhancer, init);
        auto train_rng = derive_rng(seed, kEnhancerTrainStream);
        enhancer::train_enhancer(model, train, c.enhancer_steps, train_rng);
        beats += enhancer::enhancer_mse(model, test) < enhancer::mean_predictor_mse(train, test);
    }
    const double m1 = median(first), mk = median(last);
    return {mk <= m1 && beats == 10, "median KL iteration 1 " + fmt(m1, 8) + ", iteration 10 " + fmt(mk, 8) +
                                         "; enhancer beats mean predictor on " + std::to_string(beats) +
                                         "/10 seeds, " + fmt(seconds_since(t0), 3) + " s"};
}

// --- 8 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome accounting(const ModeRuns& runs, const std::vector<LearningCurve>& baseline, const fs::path& out) {
    ExperimentConfig c;
    c.mode = Mode::egan;
    c.seed = 0;
    const auto again = out / "repeat";
    fs::create_directories(again);
    write_curve_csv(run_experiment(c), again / curve_filename(Mode::egan, 0));
    const bool identical = slurp(again / curve_filename(Mode::egan, 0)) == slurp(out / curve_filename(Mode::egan, 0));

    std::size_t conserved = 0, total = 0;
    auto check = [&](const LearningCurve& curve) {
        ++total;
        std::size_t s = curve.offset;
        bool ok = !curve.points.empty();
        for (const auto& p : curve.points) {
            s += static_cast<std::size_t>(p.reward);
            ok = ok && p.cumulative_samples == s;
        }
        conserved += ok;
    };
    for (const auto& [mode, curves] : runs.curves) std::for_each(curves.begin(), curves.end(), check);
    std::for_each(baseline.begin(), baseline.end(), check);

    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& curve : runs.curves.at(Mode::egan)) {
        lo = std::min(lo, curve.offset);
        hi = std::max(hi, curve.offset);
    }
    const bool offsets = lo >= 9000 && hi <= 12000;
    return {identical && conserved == total && offsets,
            std::string("repeat run ") + (identical ? "byte-identical" : "DIFFERS") + ", conservation " +
                std::to_string(conserved) + "/" + std::to_string(total) + ", egan offsets " +
                std::to_string(lo) + ".." + std::to_string(hi)};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(out);

    std::vector<std::pair<std::string, std::function<Outcome()>>> quick = {
        {"gradient oracles", gradient_oracles},
        {"environment oracle", environment_oracle},
        {"gan and kl arithmetic", gan_arithmetic},
    };
    int failures = 0;
    int number = 0;
    auto print = [&](const std::string& name, const Outcome& o) {
        ++number;
        failures += !o.pass;
        std::cout << "criterion " << number << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": "
                  << o.detail << std::endl;
    };
    for (const auto& [name, fn] : quick) print(name, fn());

    std::vector<LearningCurve> baseline;
    print("baseline learns", baseline_learns(baseline));
    const auto runs = run_modes(out);
    print("sample efficiency", sample_efficiency(runs, out));
    print("robustness", robustness(runs, out));
    print("egan mechanism", mechanism());
    print("determinism and accounting", accounting(runs, baseline, out));

    std::cout << (8 - failures) << "/8 criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}

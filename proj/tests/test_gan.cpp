#include <cmath>
#include <fstream>

#include "doctest.h"
#include "egan/errors.hpp"
#include "egan/gan.hpp"
#include "support/finite_diff.hpp"
#include "support/oracles.hpp"

using namespace egan;
using namespace egan::gan;
using egan::testing::check_gradients;
using egan::testing::random_matrix;
using egan::testing::discriminator_loss;
using egan::testing::generator_loss;

namespace {

GanConfig toy_config() {
    GanConfig c;
    c.noise_dim = 4;
    c.data_dim = 3;
    c.generator_hidden = {6};
    c.discriminator_hidden = {5};
    return c;
}

GanPair toy_gan(std::uint64_t seed, GanConfig c = toy_config()) {
    Rng rng(seed);
    return make_gan(c, rng);
}

double column_mean(const nn::Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v;
    return s / static_cast<double>(m.size());
}

experience::ReplayBuffer real_buffer() {
    env::CartPole env;
    Rng rng(0);
    return experience::collect_random(env, 500, rng);
}

}  // namespace

TEST_CASE("noise is in (-1,1), reproducible and centred") {
    Rng a(1), b(1);
    const auto n1 = sample_noise(a, 10000, 16);
    CHECK(n1 == sample_noise(b, 10000, 16));
    for (double v : n1.data()) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
    CHECK(std::abs(column_mean(n1)) <= 0.02);
    Rng c(2);
    CHECK(std::abs(column_mean(sample_noise(c, 10000, 1))) <= 0.02);
    CHECK_THROWS_AS(sample_noise(c, 0, 16), UsageError);
}

TEST_CASE("gan_value identities") {
    const std::vector<double> half{0.5, 0.5};
    CHECK(gan_value(half, half) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
    CHECK(gan_value(half, half) == doctest::Approx(-1.386294).epsilon(1e-6));

    const std::vector<double> one{1.0}, zero{0.0};
    CHECK(std::abs(gan_value(one, zero)) <= 1e-6);

    const std::vector<double> r{0.8}, f{0.3};
    CHECK(gan_value(r, f) == doctest::Approx(std::log(0.8) + std::log(0.7)).epsilon(1e-12));
    CHECK(gan_value(r, f) == doctest::Approx(-0.579818).epsilon(1e-6));
}

TEST_CASE("clamp_probability keeps logs finite") {
    CHECK(clamp_probability(0.0) == 1e-7);
    CHECK(clamp_probability(1.0) == 1.0 - 1e-7);
    CHECK(clamp_probability(0.4) == 0.4);
}

TEST_CASE("discriminator gradients match finite differences") {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        auto g = toy_gan(10 + t);
        const auto real = random_matrix(rng, 6, 3);
        const auto noise = sample_noise(rng, 6, 4);
        const auto step = discriminator_gradient(g, real, noise);
        CHECK(step.loss == doctest::Approx(discriminator_loss(g, real, noise)));
        const auto res = check_gradients(g.discriminator, step.grads,
                                         [&] { return discriminator_loss(g, real, noise); });
        CHECK_MESSAGE(res.worst_rel < 1e-4, res.worst_where);
    }
}

TEST_CASE("generator gradients through D match finite differences in both modes") {
    Rng rng(4);
    for (auto mode : {GeneratorLoss::non_saturating, GeneratorLoss::minimax}) {
        for (int t = 0; t < 10; ++t) {
            auto g = toy_gan(30 + t);
            const auto noise = sample_noise(rng, 5, 4);
            const auto step = generator_gradient(g, noise, mode);
            CHECK(step.loss == doctest::Approx(generator_loss(g, noise, mode)));
            const auto res = check_gradients(g.generator, step.grads,
                                             [&] { return generator_loss(g, noise, mode); });
            CHECK_MESSAGE(res.worst_rel < 1e-4, res.worst_where);
        }
    }
}

TEST_CASE("zero-weight discriminator gives zero generator gradient") {
    auto g = toy_gan(5);
    for (auto& layer : g.discriminator.layers()) {
        layer.weight.fill(0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    Rng rng(6);
    const auto noise = sample_noise(rng, 8, 4);
    for (auto mode : {GeneratorLoss::non_saturating, GeneratorLoss::minimax}) {
        CHECK(generator_gradient(g, noise, mode).grads.all_zero());
    }
}

TEST_CASE("a small generator step raises mean D(G(z)) in both modes") {
    Rng rng(7);
    for (auto mode : {GeneratorLoss::non_saturating, GeneratorLoss::minimax}) {
        for (int t = 0; t < 20; ++t) {
            auto g = toy_gan(50 + t);
            g.generator_opt = nn::make_optimizer(nn::OptimizerKind::sgd, 1e-3);
            const auto noise = sample_noise(rng, 16, 4);
            auto mean_d = [&] { return column_mean(nn::predict(g.discriminator, nn::predict(g.generator, noise))); };
            const double before = mean_d();
            nn::optimizer_step(g.generator, generator_gradient(g, noise, mode).grads, g.generator_opt);
            CHECK(mean_d() > before);
        }
    }
}

TEST_CASE("discriminator step with lr 0 leaves D unchanged") {
    auto c = toy_config();
    c.learning_rate = 0.0;
    auto g = toy_gan(8, c);
    const auto before = g.discriminator;
    Rng rng(9);
    discriminator_step(g, random_matrix(rng, 4, 3), rng);
    CHECK(g.discriminator == before);
}

TEST_CASE("discriminator step rejects tiny or mis-shaped batches") {
    auto g = toy_gan(8);
    Rng rng(9);
    CHECK_THROWS_AS(discriminator_step(g, nn::Matrix(1, 3), rng), UsageError);
    CHECK_THROWS_AS(discriminator_step(g, nn::Matrix(4, 5), rng), ShapeError);
}

TEST_CASE("discriminator separates toy data from a fixed generator") {
    GanConfig c;
    c.noise_dim = 2;
    c.data_dim = 2;
    c.generator_hidden = {8};
    c.discriminator_hidden = {16};
    c.learning_rate = 1e-2;
    auto g = toy_gan(10, c);
    Rng rng(11);
    auto real_batch = [&](std::size_t n) {
        nn::Matrix m(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, 0) = 0.8 + uniform(rng, -0.1, 0.1);
            m(i, 1) = -0.6 + uniform(rng, -0.1, 0.1);
        }
        return m;
    };
    for (int s = 0; s < 2000; ++s) discriminator_step(g, real_batch(64), rng);

    const auto real = nn::predict(g.discriminator, real_batch(500));
    const auto fake = nn::predict(g.discriminator, generate_encoded(g, 500, rng));
    int correct = 0;
    for (double p : real.data()) correct += p > 0.5;
    for (double p : fake.data()) correct += p < 0.5;
    CHECK(correct / 1000.0 > 0.9);
}

TEST_CASE("train_gan records one entry per step and is deterministic") {
    auto run = [] {
        auto g = toy_gan(12);
        Rng rng(13);
        const auto data = random_matrix(rng, 50, 3, 0.5);
        auto hist = train_gan(g, data, 25, rng);
        return std::make_pair(g, hist);
    };
    const auto [g1, h1] = run();
    const auto [g2, h2] = run();
    CHECK(h1.size() == 25);
    CHECK(g1.generator == g2.generator);
    CHECK(g1.discriminator == g2.discriminator);
    CHECK(h1.back().d_loss == h2.back().d_loss);
}

TEST_CASE("generate: count, empty request and decodable output") {
    auto g = toy_gan(14, GanConfig{});
    const auto buf = real_buffer();
    Rng rng(15);
    CHECK(generate(g, 0, rng, buf.stats()).empty());
    const auto out = generate(g, 37, rng, buf.stats());
    CHECK(out.size() == 37);
    for (const auto& q : out) {
        CHECK((q.action == 0 || q.action == 1));
        CHECK((q.reward == 0.0 || q.reward == 1.0));
    }
}

TEST_CASE("trained generator stays in the data box and matches the action rate") {
    const auto buf = real_buffer();
    const auto stats = buf.stats();
    Rng init(0);
    auto g = make_gan(GanConfig{}, init);
    Rng rng(1);
    train_gan(g, buf.encoded(stats), 3000, rng);

    const auto out = generate(g, 5000, rng, stats);
    int inside = 0, ones = 0;
    for (const auto& q : out) {
        const double s[4] = {q.state.x, q.state.x_dot, q.state.theta, q.state.theta_dot};
        bool ok = true;
        for (int d = 0; d < 4; ++d) {
            const double pad = 0.1 * (stats.max[d] - stats.min[d]);
            ok = ok && s[d] >= stats.min[d] - pad && s[d] <= stats.max[d] + pad;
        }
        inside += ok;
        ones += q.action;
    }
    double real_ones = 0;
    for (const auto& q : buf.items()) real_ones += q.action;
    CHECK(inside / 5000.0 >= 0.95);
    CHECK(std::abs(ones / 5000.0 - real_ones / buf.size()) <= 0.10);
}

TEST_CASE("loss history csv") {
    const std::vector<LossRecord> hist{{0, 1.5, 0.7}, {1, 1.4, 0.8}};
    const auto path = std::filesystem::temp_directory_path() / "egan_gan_loss.csv";
    save_loss_history(hist, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,d_loss,g_loss");
    std::getline(in, line);
    CHECK(line.rfind("0,1.5,0.7", 0) == 0);
}

TEST_CASE("invalid gan configuration") {
    GanConfig c;
    c.batch_size = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GanConfig{};
    c.learning_rate = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(parse_generator_loss("wasserstein"), ConfigError);
}

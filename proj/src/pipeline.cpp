#include "egan/pipeline.hpp"

#include "egan/errors.hpp"

namespace egan {

PretrainResult pretrain_pipeline(const ExperimentConfig& config) {
    config.validate();
    if (config.mode == Mode::none) throw ConfigError("pretrain_pipeline: mode none has no pre-training");

    PretrainResult out;
    env::CartPole env(config.env);
    auto collect_rng = derive_rng(config.seed, kCollectStream);
    out.buffer = experience::collect_random(env, config.pretrain_episodes, collect_rng);
    out.real_samples = out.buffer.real_samples();
    out.stats = out.buffer.stats();
    const auto encoded = out.buffer.encoded(out.stats);

    auto gan_init = derive_rng(config.seed, kGanInitStream);
    out.gan = gan::make_gan(config.gan, gan_init);
    auto gan_rng = derive_rng(config.seed, kGanTrainStream);
    out.gan_history = gan::train_gan(out.gan, encoded, config.gan_steps, gan_rng);

    if (config.mode == Mode::egan) {
        auto e_init = derive_rng(config.seed, kEnhancerInitStream);
        out.enhancer = enhancer::make_enhancer(config.enhancer, e_init);
        auto e_rng = derive_rng(config.seed, kEnhancerTrainStream);
        out.enhancer_history =
            enhancer::train_enhancer(*out.enhancer, encoded, config.enhancer_steps, e_rng);
        auto refine_rng = derive_rng(config.seed, kRefineStream);
        out.kl_history = enhancer::egan_refine(out.gan, *out.enhancer, config.refine, refine_rng);
    }
    return out;
}

std::vector<std::vector<experience::Quadruplet>> synthetic_batches(const PretrainResult& pretrained,
                                                                   const ExperimentConfig& config) {
    auto rng = derive_rng(config.seed, kSyntheticStream);
    std::vector<std::vector<experience::Quadruplet>> batches;
    batches.reserve(static_cast<std::size_t>(config.synthetic_batches));
    for (int b = 0; b < config.synthetic_batches; ++b) {
        batches.push_back(gan::generate(pretrained.gan, config.synthetic_batch_size, rng,
                                        pretrained.stats, config.env));
    }
    return batches;
}

}  // namespace egan

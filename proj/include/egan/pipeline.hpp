#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "egan/config.hpp"
#include "egan/enhancer.hpp"
#include "egan/experience.hpp"
#include "egan/gan.hpp"

namespace egan {

// Sub-stream ids for derive_rng(seed, stream). gan and egan runs with the same
// seed share every stream except refinement, so they differ only by it.
enum Stream : std::uint64_t {
    kCollectStream = 1,
    kGanInitStream,
    kGanTrainStream,
    kEnhancerInitStream,
    kEnhancerTrainStream,
    kRefineStream,
    kSyntheticStream,
    kPolicyInitStream,
    kPolicyRunStream,
};

struct PretrainResult {
    experience::ReplayBuffer buffer;
    experience::NormStats stats;
    gan::GanPair gan;
    std::optional<enhancer::EnhancerModel> enhancer;
    std::vector<gan::LossRecord> gan_history;
    std::vector<double> enhancer_history;
    std::vector<double> kl_history;
    // Real environment transitions consumed; charged to the learning curve.
    std::size_t real_samples = 0;
};

// Random-policy collection, GAN training and, in egan mode, enhancer training
// followed by refinement. Mode none is a configuration error.
PretrainResult pretrain_pipeline(const ExperimentConfig& config);

// Draws `config.synthetic_batches` batches of decoded quadruplets.
std::vector<std::vector<experience::Quadruplet>> synthetic_batches(const PretrainResult& pretrained,
                                                                   const ExperimentConfig& config);

}  // namespace egan

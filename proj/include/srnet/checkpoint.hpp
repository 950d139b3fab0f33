#pragma once

#include "srnet/config.hpp"
#include "srnet/discriminator.hpp"
#include "srnet/generator.hpp"

#include <torch/torch.h>

#include <filesystem>
#include <optional>

namespace srnet {

/// Everything a checkpoint archive may hold. Null members are skipped on
/// save and left untouched on load.
struct CheckpointRefs {
  Generator* generator = nullptr;
  PatchCritic* critic_b = nullptr;
  PatchCritic* critic_f = nullptr;
  torch::optim::Optimizer* generator_optimizer = nullptr;
  torch::optim::Optimizer* critic_optimizer = nullptr;
};

/// Single archive: the model config that built the networks, every parameter
/// group, optional optimizer state and the step counter.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const CheckpointRefs& refs, int64_t step);

ModelConfig read_checkpoint_config(const std::filesystem::path& path);

/// Throws CheckpointError if the stored config differs from `expected` or a
/// requested group is missing. Returns the stored step.
int64_t load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected,
                        const CheckpointRefs& refs);

/// Builds a generator from the checkpoint's own config, loads it and puts it
/// in eval mode.
Generator load_generator(const std::filesystem::path& path);

}  // namespace srnet

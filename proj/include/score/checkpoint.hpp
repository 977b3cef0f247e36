#pragma once

#include <string>

#include "score/optim.hpp"

namespace score {

/// Complete training snapshot: configs, semantic layout, training codes,
/// parameters and optimizer state.
struct Checkpoint {
    ModelConfig model_config;
    TrainConfig train_config;
    SemanticSpec spec;
    CodeMatrix codes;
    ModelParams params;
    OptimizerState opt_state;
};

/// Versioned binary file: magic + JSON header (configs, spec, shapes)
/// followed by raw little-endian 64-bit reals for every tensor. Round-trips
/// bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace score

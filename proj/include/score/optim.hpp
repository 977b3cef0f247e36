#pragma once

#include <cstdint>
#include <vector>

#include "score/data.hpp"
#include "score/model.hpp"

namespace score {

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0005; ///< applied to backbone and projection; to
                                  ///< codewords only under the inner-product omega form
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    double lr_decay = 0.98; ///< multiplicative, per epoch
    std::uint64_t seed = 1;

    void validate() const;
};

struct OptimizerState {
    ModelParams velocity; ///< zero-initialized, same shapes as the parameters
    double current_lr = 0.0;
    std::size_t epochs_done = 0;
};

OptimizerState make_optimizer_state(const ModelParams& params, const TrainConfig& config);

/// v <- momentum*v - lr*(g + wd*p); p <- p + v. Frozen tensors (codewords in
/// RULE/RIS modes) are untouched; under the exact omega form codewords never
/// receive weight decay.
void sgd_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
              const TrainConfig& tcfg, const ModelConfig& mcfg);

struct EpochStats {
    double objective = 0.0;      ///< mean total over the epoch's batches
    double classification = 0.0;
    double auxiliary = 0.0;
    double omega = 0.0;
    double train_mca = 0.0;      ///< mean class accuracy on pre-update batch predictions
    double learning_rate = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
};

struct TrainResult {
    ModelParams params;
    OptimizerState opt_state;
    TrainHistory history;
};

/// Mini-batch SGD over deterministically shuffled batches (shuffle keyed by
/// seed and epoch index). Aborts with a NumericError naming the epoch/batch
/// if the objective turns non-finite.
TrainResult train(const FeatureSet& data, const SemanticSpec& spec, const CodeMatrix& codes,
                  const ModelConfig& mcfg, const TrainConfig& tcfg);

/// Continues training from existing parameters/optimizer state.
void train_in_place(const FeatureSet& data, const SemanticSpec& spec, const CodeMatrix& codes,
                    const ModelConfig& mcfg, const TrainConfig& tcfg, ModelParams& params,
                    OptimizerState& state, TrainHistory& history);

} // namespace score

#pragma once

#include <string>
#include <vector>

#include "score/data.hpp"
#include "score/model.hpp"

namespace score {

struct EvalReport {
    double zs_mca = 0.0; ///< unweighted mean of per-class accuracies
    std::vector<std::string> class_names;
    std::vector<double> per_class_accuracy; ///< -1 for classes with no samples
    Matrix confusion;                       ///< rows = true class, cols = predicted
    std::size_t n_samples = 0;
    std::vector<std::string> excluded_classes; ///< zero-sample classes left out of the mean
};

/// argmax_c phi_zs(c)^T f, ties to the lowest index.
int zs_classify(std::span<const double> f, const Matrix& phi_zs);

/// Per-state scoring against zero-shot codes: learned state codewords are
/// selected through the ZS state table; classes without a state (unseen
/// embedding classes) score against their own semantic vectors.
int zs_classify_per_state(std::span<const double> f, const ModelParams& params,
                          const ModelConfig& config, const SemanticSpec& spec,
                          const CodeMatrix& zs_codes);

enum class RisRule { LogLikelihood, Linear };
std::string to_string(RisRule r);
RisRule ris_rule_from_string(const std::string& s);

/// Attribute-independence inference from per-attribute probabilities.
/// LogLikelihood: argmax_c sum_k [phi_k(c)=+1] log a_k + [phi_k(c)=-1] log(1-a_k)
/// (uniform class prior). Linear: argmax_c sum_k phi_k(c) (2 a_k - 1).
/// Binary-attribute codes only.
int ris_zs_classify(std::span<const double> attribute_probs, const Matrix& phi_zs, RisRule rule);

/// Runs the mode-appropriate classifier per sample and aggregates per-class
/// accuracies and their unweighted mean.
EvalReport evaluate(const FeatureSet& zs_data, const ModelParams& params,
                    const ModelConfig& config, const SemanticSpec& spec,
                    const CodeMatrix& zs_codes, RisRule ris_rule = RisRule::LogLikelihood);

} // namespace score

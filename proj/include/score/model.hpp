#pragma once

#include <span>
#include <string>
#include <vector>

#include "score/losses.hpp"
#include "score/matrix.hpp"
#include "score/semantics.hpp"

namespace score {

enum class Mode { Ris, Rule, Unrestricted, Score };
enum class CodewordPath { Dense, PerState };
enum class OmegaForm { Exact, InnerProduct };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
std::string to_string(CodewordPath p);
CodewordPath codeword_path_from_string(const std::string& s);
std::string to_string(OmegaForm f);
OmegaForm omega_form_from_string(const std::string& s);

struct AffineLayer {
    Matrix weight;            ///< out x in
    std::vector<double> bias; ///< out
};

/// All learnable tensors. Also reused as the container for gradients and
/// optimizer velocities (same shapes).
struct ModelParams {
    std::vector<AffineLayer> backbone; ///< tanh after every layer; empty = identity
    Matrix projection;                 ///< d x Q' (T)
    Matrix dense_codewords;            ///< Q' x C (dense path only)
    std::vector<Matrix> state_codewords; ///< per semantic: d_k x S_k (per-state path only)

    std::size_t input_dim() const;
    std::size_t feature_dim() const; ///< d, the backbone output size
};

ModelParams zeros_like(const ModelParams& p);

struct ModelConfig {
    Mode mode = Mode::Score;
    double lambda = 0.0;
    double beta = 0.0;
    CodewordPath codeword_path = CodewordPath::Dense;
    OmegaForm omega_form = OmegaForm::Exact;
    std::vector<std::size_t> backbone_widths; ///< hidden widths; empty = identity backbone

    void validate() const;
    bool codewords_frozen() const { return mode == Mode::Rule || mode == Mode::Ris; }
    /// Per-mode weights of the three objective terms.
    double classification_weight() const { return mode == Mode::Ris ? 0.0 : 1.0; }
    double auxiliary_weight() const {
        if (mode == Mode::Ris) return 1.0;
        return mode == Mode::Score ? lambda : 0.0;
    }
    double omega_weight() const { return mode == Mode::Score ? beta : 0.0; }
};

struct Prediction {
    std::vector<double> features;                      ///< f(x), length Q'
    std::vector<double> class_scores;                  ///< h(x), length C
    std::vector<std::vector<double>> semantic_scores;  ///< u^(k); {f_k} for continuous
    std::vector<int> predicted_states;                 ///< argmax_i u_i^(k); -1 for continuous
};

/// View over a batch of training rows; the model layer has no file I/O.
struct BatchView {
    const Matrix* features = nullptr; ///< N x input_dim
    const std::vector<int>* labels = nullptr;
    const Matrix* sample_attributes = nullptr; ///< N x Q_attr in {0,1}, optional
    std::vector<std::size_t> rows;             ///< which rows form the batch

    std::size_t size() const { return rows.size(); }
};

struct ObjectiveComponents {
    double classification = 0.0; ///< mean cross-entropy over the batch
    double auxiliary = 0.0;      ///< mean auxiliary risk (unweighted)
    double omega = 0.0;          ///< codeword regularizer (unweighted)
    double total = 0.0;          ///< mode-weighted sum
};

// ---------------------------------------------------------------------------
// Forward path
// ---------------------------------------------------------------------------

std::vector<double> backbone_forward(const ModelParams& params, std::span<const double> x);

/// f = T^T theta(x)
std::vector<double> semantic_predictor(std::span<const double> theta, const Matrix& projection);

/// u_i^(k) = <w_i^(k), f_k> for every state of every discrete semantic.
/// In the dense path the fixed semantic codewords psi stand in for w.
std::vector<std::vector<double>> semantic_scores(std::span<const double> f,
                                                 const ModelParams& params,
                                                 const ModelConfig& config,
                                                 const SemanticSpec& spec);

/// Dense path: h = W^T f. Per-state path: h_c = sum_k u^(k)_{s_k^c} via the
/// fixed 0/1 selection layer.
std::vector<double> class_scores(std::span<const double> f,
                                 const std::vector<std::vector<double>>& u,
                                 const ModelParams& params, const ModelConfig& config,
                                 const SemanticSpec& spec, const CodeMatrix& codes);

Prediction predict(const ModelParams& params, const ModelConfig& config, const SemanticSpec& spec,
                   const CodeMatrix& codes, std::span<const double> x);

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// Exact form: 1/2 sum ||w - phi||^2. Inner-product form: -sum w.phi (the
/// quadratic part is then delegated to weight decay on the codewords).
double codeword_regularizer(const ModelParams& params, const ModelConfig& config,
                            const SemanticSpec& spec, const CodeMatrix& codes);

/// Per-sample auxiliary risk: binary attributes via binary_xent(sigmoid(f_k), s),
/// continuous attributes with target (phi_k(y)+1)/2, multi-state semantics via
/// softmax cross-entropy over u^(k). attr_row optionally supplies per-sample
/// binary attribute labels in {0,1}.
double auxiliary_risk(const Prediction& pred, const SemanticSpec& spec, const CodeMatrix& codes,
                      int label, std::span<const double> attr_row = {});

ObjectiveComponents score_objective(const BatchView& batch, const ModelParams& params,
                                    const ModelConfig& config, const SemanticSpec& spec,
                                    const CodeMatrix& codes);

/// Analytic gradients of the full objective. Frozen tensors (codewords in
/// RULE/RIS modes) come back zero.
ModelParams gradients(const BatchView& batch, const ModelParams& params, const ModelConfig& config,
                      const SemanticSpec& spec, const CodeMatrix& codes);

/// One-pass objective + gradients + argmax class predictions (in batch row
/// order); either output pointer may be null. Used by the training loop.
ObjectiveComponents objective_with_outputs(const BatchView& batch, const ModelParams& params,
                                           const ModelConfig& config, const SemanticSpec& spec,
                                           const CodeMatrix& codes, ModelParams* grads,
                                           std::vector<int>* predictions);

// ---------------------------------------------------------------------------
// Initialization and parameter packing
// ---------------------------------------------------------------------------

/// Codewords start at their semantic codes in every mode; T and backbone
/// layers use uniform +/- sqrt(6/(fan_in+fan_out)).
ModelParams init_params(std::size_t input_dim, const ModelConfig& config, const SemanticSpec& spec,
                        const CodeMatrix& codes, RngStream& rng);

/// Flattens trainable tensors (respects frozen codewords) for the
/// finite-difference oracle.
std::vector<double> pack_trainable(const ModelParams& params, const ModelConfig& config);
void unpack_trainable(std::span<const double> flat, const ModelConfig& config, ModelParams& params);

} // namespace score

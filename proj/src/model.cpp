#include "score/model.hpp"

#include <algorithm>
#include <cmath>

namespace score {

std::string to_string(Mode m) {
    switch (m) {
    case Mode::Ris: return "ris";
    case Mode::Rule: return "rule";
    case Mode::Unrestricted: return "unrestricted";
    case Mode::Score: return "score";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    if (s == "ris") return Mode::Ris;
    if (s == "rule") return Mode::Rule;
    if (s == "unrestricted") return Mode::Unrestricted;
    if (s == "score") return Mode::Score;
    throw DataError("unknown mode '" + s + "'");
}

std::string to_string(CodewordPath p) {
    return p == CodewordPath::Dense ? "dense" : "per_state";
}

CodewordPath codeword_path_from_string(const std::string& s) {
    if (s == "dense") return CodewordPath::Dense;
    if (s == "per_state") return CodewordPath::PerState;
    throw DataError("unknown codeword path '" + s + "'");
}

std::string to_string(OmegaForm f) {
    return f == OmegaForm::Exact ? "exact" : "inner_product";
}

OmegaForm omega_form_from_string(const std::string& s) {
    if (s == "exact") return OmegaForm::Exact;
    if (s == "inner_product") return OmegaForm::InnerProduct;
    throw DataError("unknown omega form '" + s + "'");
}

std::size_t ModelParams::input_dim() const {
    return backbone.empty() ? projection.rows() : backbone.front().weight.cols();
}

std::size_t ModelParams::feature_dim() const { return projection.rows(); }

ModelParams zeros_like(const ModelParams& p) {
    ModelParams z;
    for (const auto& layer : p.backbone)
        z.backbone.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                              std::vector<double>(layer.bias.size(), 0.0)});
    z.projection = Matrix(p.projection.rows(), p.projection.cols());
    if (!p.dense_codewords.empty())
        z.dense_codewords = Matrix(p.dense_codewords.rows(), p.dense_codewords.cols());
    for (const auto& w : p.state_codewords) z.state_codewords.push_back(Matrix(w.rows(), w.cols()));
    return z;
}

void ModelConfig::validate() const {
    if (lambda < 0.0 || beta < 0.0)
        throw ContractError("lambda and beta must be nonnegative");
    if (mode != Mode::Score && (lambda != 0.0 || beta != 0.0))
        throw ContractError("mode '" + to_string(mode) +
                            "' fixes its regularization weights; lambda and beta must be 0");
}

// ---------------------------------------------------------------------------
// Forward path
// ---------------------------------------------------------------------------

namespace {

void check_per_state_spec(const ModelConfig& config, const SemanticSpec& spec) {
    if (config.codeword_path != CodewordPath::PerState) return;
    for (const auto& s : spec.semantics)
        if (!s.discrete())
            throw ContractError("per_state path requires discrete semantics; '" + s.name +
                                "' is continuous");
}

void check_shapes(const ModelParams& params, const ModelConfig& config, const SemanticSpec& spec,
                  const CodeMatrix& codes) {
    const std::size_t q = spec.total_dim();
    if (params.projection.cols() != q)
        throw ContractError("projection is " + params.projection.shape_str() + ", expected cols " +
                            std::to_string(q));
    for (std::size_t l = 0; l + 1 < params.backbone.size(); ++l)
        if (params.backbone[l + 1].weight.cols() != params.backbone[l].weight.rows())
            throw ContractError("backbone layer shapes do not chain");
    if (!params.backbone.empty() &&
        params.backbone.back().weight.rows() != params.projection.rows())
        throw ContractError("backbone output does not match projection input");
    if (config.codeword_path == CodewordPath::Dense) {
        if (params.dense_codewords.rows() != q ||
            params.dense_codewords.cols() != codes.class_count())
            throw ContractError("dense codeword matrix is " + params.dense_codewords.shape_str() +
                                ", expected " + std::to_string(q) + "x" +
                                std::to_string(codes.class_count()));
    } else {
        check_per_state_spec(config, spec);
        if (params.state_codewords.size() != spec.semantics.size())
            throw ContractError("per-state codeword count does not match the semantic spec");
        for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
            const auto& s = spec.semantics[k];
            if (params.state_codewords[k].rows() != s.state_dim ||
                params.state_codewords[k].cols() != s.state_count)
                throw ContractError("per-state codewords for '" + s.name + "' are " +
                                    params.state_codewords[k].shape_str());
        }
    }
}

} // namespace

std::vector<double> backbone_forward(const ModelParams& params, std::span<const double> x) {
    if (x.size() != params.input_dim())
        throw ContractError("backbone_forward: input has length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(params.input_dim()));
    std::vector<double> a(x.begin(), x.end());
    for (const auto& layer : params.backbone) {
        std::vector<double> z = matvec(layer.weight, a);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i] + layer.bias[i]);
        a = std::move(z);
    }
    return a;
}

std::vector<double> semantic_predictor(std::span<const double> theta, const Matrix& projection) {
    return matvec_t(projection, theta);
}

std::vector<std::vector<double>> semantic_scores(std::span<const double> f,
                                                 const ModelParams& params,
                                                 const ModelConfig& config,
                                                 const SemanticSpec& spec) {
    const auto off = spec.offsets();
    std::vector<std::vector<double>> u(spec.semantics.size());
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& sem = spec.semantics[k];
        const std::span<const double> fk = f.subspan(off[k], sem.state_dim);
        if (!sem.discrete()) {
            u[k] = {fk[0]};
            continue;
        }
        const Matrix& w = config.codeword_path == CodewordPath::PerState
                              ? params.state_codewords[k]
                              : sem.state_codewords;
        u[k] = matvec_t(w, fk);
    }
    return u;
}

std::vector<double> class_scores(std::span<const double> f,
                                 const std::vector<std::vector<double>>& u,
                                 const ModelParams& params, const ModelConfig& config,
                                 const SemanticSpec& spec, const CodeMatrix& codes) {
    const std::size_t c_count = codes.class_count();
    if (config.codeword_path == CodewordPath::Dense)
        return matvec_t(params.dense_codewords, f);

    const auto off = spec.offsets();
    std::vector<double> h(c_count, 0.0);
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& sem = spec.semantics[k];
        const auto& states = codes.state_table[k];
        const std::span<const double> fk = f.subspan(off[k], sem.state_dim);
        for (std::size_t c = 0; c < c_count; ++c) {
            const int s = states[c];
            if (s >= 0) {
                h[c] += u[k][static_cast<std::size_t>(s)];
            } else {
                // unseen embedding class: score against its own semantic vector
                double acc = 0.0;
                for (std::size_t j = 0; j < sem.state_dim; ++j)
                    acc += codes.phi(off[k] + j, c) * fk[j];
                h[c] += acc;
            }
        }
    }
    return h;
}

namespace {

int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

} // namespace

Prediction predict(const ModelParams& params, const ModelConfig& config, const SemanticSpec& spec,
                   const CodeMatrix& codes, std::span<const double> x) {
    check_shapes(params, config, spec, codes);
    Prediction p;
    const std::vector<double> theta = backbone_forward(params, x);
    p.features = semantic_predictor(theta, params.projection);
    p.semantic_scores = semantic_scores(p.features, params, config, spec);
    p.class_scores = class_scores(p.features, p.semantic_scores, params, config, spec, codes);
    p.predicted_states.resize(spec.semantics.size());
    for (std::size_t k = 0; k < spec.semantics.size(); ++k)
        p.predicted_states[k] =
            spec.semantics[k].discrete() ? argmax_lowest(p.semantic_scores[k]) : -1;
    return p;
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

double codeword_regularizer(const ModelParams& params, const ModelConfig& config,
                            const SemanticSpec& spec, const CodeMatrix& codes) {
    double omega = 0.0;
    if (config.codeword_path == CodewordPath::Dense) {
        const Matrix& w = params.dense_codewords;
        if (w.rows() != codes.phi.rows() || w.cols() != codes.phi.cols())
            throw ContractError("codeword_regularizer: W is " + w.shape_str() + ", codes are " +
                                codes.phi.shape_str());
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (config.omega_form == OmegaForm::Exact) {
                const double d = w.data()[i] - codes.phi.data()[i];
                omega += 0.5 * d * d;
            } else {
                omega -= w.data()[i] * codes.phi.data()[i];
            }
        }
        return omega;
    }
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& sem = spec.semantics[k];
        if (!sem.discrete()) continue;
        const Matrix& w = params.state_codewords[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (config.omega_form == OmegaForm::Exact) {
                const double d = w.data()[i] - sem.state_codewords.data()[i];
                omega += 0.5 * d * d;
            } else {
                omega -= w.data()[i] * sem.state_codewords.data()[i];
            }
        }
    }
    return omega;
}

namespace {

/// Supervision target for a binary/continuous attribute of class `label`.
double attribute_target(const SemanticSpec& spec, const CodeMatrix& codes,
                        const std::vector<std::size_t>& off, std::size_t k, int label,
                        std::span<const double> attr_row, std::size_t attr_col) {
    if (!attr_row.empty() && spec.semantics[k].kind == SemanticKind::BinaryAttribute) {
        const double v = attr_row[attr_col];
        if (v != 0.0 && v != 1.0)
            throw ContractError("per-sample attribute labels must be 0/1, got " +
                                std::to_string(v));
        return v;
    }
    return (codes.phi(off[k], static_cast<std::size_t>(label)) + 1.0) / 2.0;
}

} // namespace

double auxiliary_risk(const Prediction& pred, const SemanticSpec& spec, const CodeMatrix& codes,
                      int label, std::span<const double> attr_row) {
    if (label < 0 || static_cast<std::size_t>(label) >= codes.class_count())
        throw ContractError("auxiliary_risk: label out of range");
    const auto off = spec.offsets();
    double risk = 0.0;
    std::size_t attr_col = 0;
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& sem = spec.semantics[k];
        if (sem.kind == SemanticKind::BinaryAttribute ||
            sem.kind == SemanticKind::ContinuousAttribute) {
            const double s = attribute_target(spec, codes, off, k, label, attr_row, attr_col);
            risk += binary_xent(sigmoid(pred.features[off[k]]), s);
            if (sem.kind == SemanticKind::BinaryAttribute) ++attr_col;
        } else {
            const int s = codes.state_table[k][static_cast<std::size_t>(label)];
            if (s < 0)
                throw ContractError("auxiliary_risk: class '" +
                                    codes.class_names[static_cast<std::size_t>(label)] +
                                    "' has no state for semantic '" + sem.name + "'");
            risk += softmax_xent(pred.semantic_scores[k], static_cast<std::size_t>(s)).loss;
        }
    }
    return risk;
}

namespace {

struct Trace {
    std::vector<std::vector<double>> acts; ///< theta_0 .. theta_L
    Prediction pred;
};

Trace forward_trace(const ModelParams& params, const ModelConfig& config, const SemanticSpec& spec,
                    const CodeMatrix& codes, std::span<const double> x) {
    Trace t;
    t.acts.emplace_back(x.begin(), x.end());
    for (const auto& layer : params.backbone) {
        std::vector<double> z = matvec(layer.weight, t.acts.back());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i] + layer.bias[i]);
        t.acts.push_back(std::move(z));
    }
    t.pred.features = semantic_predictor(t.acts.back(), params.projection);
    t.pred.semantic_scores = semantic_scores(t.pred.features, params, config, spec);
    t.pred.class_scores =
        class_scores(t.pred.features, t.pred.semantic_scores, params, config, spec, codes);
    return t;
}

ObjectiveComponents evaluate_batch(const BatchView& batch, const ModelParams& params,
                                   const ModelConfig& config, const SemanticSpec& spec,
                                   const CodeMatrix& codes, ModelParams* grad,
                                   std::vector<int>* predictions = nullptr) {
    config.validate();
    check_shapes(params, config, spec, codes);
    if (batch.rows.empty()) throw ContractError("score_objective: empty batch");
    if (batch.features == nullptr || batch.labels == nullptr)
        throw ContractError("score_objective: batch lacks features or labels");
    if (batch.features->cols() != params.input_dim())
        throw ContractError("batch feature dim " + std::to_string(batch.features->cols()) +
                            " does not match model input " + std::to_string(params.input_dim()));

    const std::size_t b = batch.rows.size();
    const double inv_b = 1.0 / static_cast<double>(b);
    const double w_cls = config.classification_weight();
    const double w_aux = config.auxiliary_weight();
    const double w_omega = config.omega_weight();
    const bool frozen = config.codewords_frozen();
    const auto off = spec.offsets();
    const std::size_t q = spec.total_dim();

    ObjectiveComponents comps;
    for (const std::size_t row : batch.rows) {
        if (row >= batch.features->rows())
            throw ContractError("batch row index out of range");
        const int y = (*batch.labels)[row];
        if (y < 0 || static_cast<std::size_t>(y) >= codes.class_count())
            throw ContractError("label " + std::to_string(y) + " out of range for " +
                                std::to_string(codes.class_count()) + " classes");
        const std::span<const double> attr_row =
            batch.sample_attributes != nullptr && !batch.sample_attributes->empty()
                ? batch.sample_attributes->row(row)
                : std::span<const double>{};

        Trace t = forward_trace(params, config, spec, codes, batch.features->row(row));
        const SoftmaxXent cls = softmax_xent(t.pred.class_scores, static_cast<std::size_t>(y));
        comps.classification += cls.loss * inv_b;
        comps.auxiliary += auxiliary_risk(t.pred, spec, codes, y, attr_row) * inv_b;
        if (predictions != nullptr) predictions->push_back(argmax_lowest(t.pred.class_scores));

        if (grad == nullptr) continue;

        std::vector<double> df(q, 0.0);

        // classification term through the class scores
        if (w_cls > 0.0) {
            std::vector<double> dh = cls.probs;
            dh[static_cast<std::size_t>(y)] -= 1.0;
            for (double& v : dh) v *= w_cls * inv_b;
            if (config.codeword_path == CodewordPath::Dense) {
                const Matrix& w = params.dense_codewords;
                for (std::size_t r = 0; r < q; ++r) {
                    const double fr = t.pred.features[r];
                    const double* wrow = w.row(r).data();
                    double acc = 0.0;
                    for (std::size_t c = 0; c < w.cols(); ++c) {
                        acc += wrow[c] * dh[c];
                        if (!frozen) grad->dense_codewords(r, c) += fr * dh[c];
                    }
                    df[r] += acc;
                }
            } else {
                for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
                    const auto& sem = spec.semantics[k];
                    std::vector<double> du(sem.state_count, 0.0);
                    const auto& states = codes.state_table[k];
                    for (std::size_t c = 0; c < codes.class_count(); ++c)
                        if (states[c] >= 0) du[static_cast<std::size_t>(states[c])] += dh[c];
                    const Matrix& w = params.state_codewords[k];
                    for (std::size_t j = 0; j < sem.state_dim; ++j) {
                        const double fj = t.pred.features[off[k] + j];
                        double acc = 0.0;
                        for (std::size_t i = 0; i < sem.state_count; ++i) {
                            acc += w(j, i) * du[i];
                            if (!frozen) grad->state_codewords[k](j, i) += fj * du[i];
                        }
                        df[off[k] + j] += acc;
                    }
                }
            }
        }

        // auxiliary term through the semantic scores
        if (w_aux > 0.0) {
            std::size_t attr_col = 0;
            for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
                const auto& sem = spec.semantics[k];
                if (sem.kind == SemanticKind::BinaryAttribute ||
                    sem.kind == SemanticKind::ContinuousAttribute) {
                    const double s =
                        attribute_target(spec, codes, off, k, y, attr_row, attr_col);
                    df[off[k]] += w_aux * inv_b * (sigmoid(t.pred.features[off[k]]) - s);
                    if (sem.kind == SemanticKind::BinaryAttribute) ++attr_col;
                    continue;
                }
                const int s = codes.state_table[k][static_cast<std::size_t>(y)];
                if (s < 0)
                    throw ContractError("auxiliary gradient: class lacks a state for '" +
                                        sem.name + "'");
                std::vector<double> du =
                    softmax(t.pred.semantic_scores[k]);
                du[static_cast<std::size_t>(s)] -= 1.0;
                for (double& v : du) v *= w_aux * inv_b;
                const bool learned = config.codeword_path == CodewordPath::PerState;
                const Matrix& w = learned ? params.state_codewords[k] : sem.state_codewords;
                for (std::size_t j = 0; j < sem.state_dim; ++j) {
                    double acc = 0.0;
                    const double fj = t.pred.features[off[k] + j];
                    for (std::size_t i = 0; i < sem.state_count; ++i) {
                        acc += w(j, i) * du[i];
                        if (learned && !frozen) grad->state_codewords[k](j, i) += fj * du[i];
                    }
                    df[off[k] + j] += acc;
                }
            }
        }

        // back through projection: f = T^T theta
        const std::vector<double>& theta = t.acts.back();
        for (std::size_t r = 0; r < params.projection.rows(); ++r)
            for (std::size_t c = 0; c < q; ++c)
                grad->projection(r, c) += theta[r] * df[c];
        std::vector<double> dtheta = matvec(params.projection, df);

        // back through the tanh backbone
        for (std::size_t l = params.backbone.size(); l-- > 0;) {
            const auto& act = t.acts[l + 1];
            std::vector<double> dz(act.size());
            for (std::size_t i = 0; i < act.size(); ++i)
                dz[i] = dtheta[i] * (1.0 - act[i] * act[i]);
            const auto& prev = t.acts[l];
            auto& glayer = grad->backbone[l];
            for (std::size_t i = 0; i < dz.size(); ++i) {
                glayer.bias[i] += dz[i];
                for (std::size_t j = 0; j < prev.size(); ++j)
                    glayer.weight(i, j) += dz[i] * prev[j];
            }
            dtheta = matvec_t(params.backbone[l].weight, dz);
        }
    }

    comps.omega = codeword_regularizer(params, config, spec, codes);
    comps.total = w_cls * comps.classification + w_aux * comps.auxiliary + w_omega * comps.omega;

    if (grad != nullptr && w_omega > 0.0 && !frozen) {
        if (config.codeword_path == CodewordPath::Dense) {
            for (std::size_t i = 0; i < params.dense_codewords.size(); ++i) {
                const double g = config.omega_form == OmegaForm::Exact
                                     ? params.dense_codewords.data()[i] - codes.phi.data()[i]
                                     : -codes.phi.data()[i];
                grad->dense_codewords.data()[i] += w_omega * g;
            }
        } else {
            for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
                if (!spec.semantics[k].discrete()) continue;
                const Matrix& psi = spec.semantics[k].state_codewords;
                for (std::size_t i = 0; i < psi.size(); ++i) {
                    const double g = config.omega_form == OmegaForm::Exact
                                         ? params.state_codewords[k].data()[i] - psi.data()[i]
                                         : -psi.data()[i];
                    grad->state_codewords[k].data()[i] += w_omega * g;
                }
            }
        }
    }
    return comps;
}

} // namespace

ObjectiveComponents score_objective(const BatchView& batch, const ModelParams& params,
                                    const ModelConfig& config, const SemanticSpec& spec,
                                    const CodeMatrix& codes) {
    return evaluate_batch(batch, params, config, spec, codes, nullptr);
}

ModelParams gradients(const BatchView& batch, const ModelParams& params, const ModelConfig& config,
                      const SemanticSpec& spec, const CodeMatrix& codes) {
    ModelParams grad = zeros_like(params);
    evaluate_batch(batch, params, config, spec, codes, &grad);
    return grad;
}

ObjectiveComponents objective_with_outputs(const BatchView& batch, const ModelParams& params,
                                           const ModelConfig& config, const SemanticSpec& spec,
                                           const CodeMatrix& codes, ModelParams* grads,
                                           std::vector<int>* predictions) {
    return evaluate_batch(batch, params, config, spec, codes, grads, predictions);
}

// ---------------------------------------------------------------------------
// Initialization and packing
// ---------------------------------------------------------------------------

ModelParams init_params(std::size_t input_dim, const ModelConfig& config, const SemanticSpec& spec,
                        const CodeMatrix& codes, RngStream& rng) {
    config.validate();
    check_per_state_spec(config, spec);
    ModelParams p;
    std::size_t in = input_dim;
    for (const std::size_t width : config.backbone_widths) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in + width));
        p.backbone.push_back(
            {random_uniform(width, in, -bound, bound, rng), std::vector<double>(width, 0.0)});
        in = width;
    }
    const std::size_t q = spec.total_dim();
    const double bound = std::sqrt(6.0 / static_cast<double>(in + q));
    p.projection = random_uniform(in, q, -bound, bound, rng);
    // codewords start at the semantic codes; random codeword initialization
    // would make zero-shot transfer impossible
    if (config.codeword_path == CodewordPath::Dense) {
        p.dense_codewords = codes.phi;
    } else {
        for (const auto& sem : spec.semantics) p.state_codewords.push_back(sem.state_codewords);
    }
    return p;
}

std::vector<double> pack_trainable(const ModelParams& params, const ModelConfig& config) {
    std::vector<double> flat;
    for (const auto& layer : params.backbone) {
        flat.insert(flat.end(), layer.weight.values().begin(), layer.weight.values().end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    flat.insert(flat.end(), params.projection.values().begin(), params.projection.values().end());
    if (!config.codewords_frozen()) {
        if (config.codeword_path == CodewordPath::Dense) {
            flat.insert(flat.end(), params.dense_codewords.values().begin(),
                        params.dense_codewords.values().end());
        } else {
            for (const auto& w : params.state_codewords)
                flat.insert(flat.end(), w.values().begin(), w.values().end());
        }
    }
    return flat;
}

void unpack_trainable(std::span<const double> flat, const ModelConfig& config,
                      ModelParams& params) {
    std::size_t pos = 0;
    auto take = [&](double* dst, std::size_t n) {
        if (pos + n > flat.size()) throw ContractError("unpack_trainable: vector too short");
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                  flat.begin() + static_cast<std::ptrdiff_t>(pos + n), dst);
        pos += n;
    };
    for (auto& layer : params.backbone) {
        take(layer.weight.data(), layer.weight.size());
        take(layer.bias.data(), layer.bias.size());
    }
    take(params.projection.data(), params.projection.size());
    if (!config.codewords_frozen()) {
        if (config.codeword_path == CodewordPath::Dense) {
            take(params.dense_codewords.data(), params.dense_codewords.size());
        } else {
            for (auto& w : params.state_codewords) take(w.data(), w.size());
        }
    }
    if (pos != flat.size()) throw ContractError("unpack_trainable: length mismatch");
}

} // namespace score

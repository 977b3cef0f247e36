#include "score/zeroshot.hpp"

#include <algorithm>
#include <cmath>

#include "score/losses.hpp"

namespace score {

std::string to_string(RisRule r) {
    return r == RisRule::LogLikelihood ? "loglik" : "linear";
}

RisRule ris_rule_from_string(const std::string& s) {
    if (s == "loglik") return RisRule::LogLikelihood;
    if (s == "linear") return RisRule::Linear;
    throw DataError("unknown RIS rule '" + s + "'");
}

namespace {

int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

} // namespace

int zs_classify(std::span<const double> f, const Matrix& phi_zs) {
    if (f.size() != phi_zs.rows())
        throw ContractError("zs_classify: feature length " + std::to_string(f.size()) +
                            " does not match codes " + phi_zs.shape_str());
    const std::vector<double> scores = matvec_t(phi_zs, f);
    return argmax_lowest(scores);
}

int zs_classify_per_state(std::span<const double> f, const ModelParams& params,
                          const ModelConfig& config, const SemanticSpec& spec,
                          const CodeMatrix& zs_codes) {
    if (f.size() != spec.total_dim())
        throw ContractError("zs_classify_per_state: feature length mismatch");
    const auto u = semantic_scores(f, params, config, spec);
    const std::vector<double> scores = class_scores(f, u, params, config, spec, zs_codes);
    return argmax_lowest(scores);
}

int ris_zs_classify(std::span<const double> attribute_probs, const Matrix& phi_zs, RisRule rule) {
    if (attribute_probs.size() != phi_zs.rows())
        throw ContractError("ris_zs_classify: probability vector length " +
                            std::to_string(attribute_probs.size()) + " does not match codes " +
                            phi_zs.shape_str());
    for (std::size_t k = 0; k < phi_zs.rows(); ++k)
        for (std::size_t c = 0; c < phi_zs.cols(); ++c)
            if (phi_zs(k, c) != 1.0 && phi_zs(k, c) != -1.0)
                throw ContractError("ris_zs_classify: codes must be binary (+/-1); entry (" +
                                    std::to_string(k) + "," + std::to_string(c) + ") is " +
                                    std::to_string(phi_zs(k, c)));
    std::vector<double> scores(phi_zs.cols(), 0.0);
    for (std::size_t c = 0; c < phi_zs.cols(); ++c) {
        for (std::size_t k = 0; k < phi_zs.rows(); ++k) {
            const double a = std::clamp(attribute_probs[k], kLogClip, 1.0 - kLogClip);
            if (rule == RisRule::LogLikelihood)
                scores[c] += phi_zs(k, c) == 1.0 ? std::log(a) : std::log(1.0 - a);
            else
                scores[c] += phi_zs(k, c) * (2.0 * a - 1.0);
        }
    }
    return argmax_lowest(scores);
}

EvalReport evaluate(const FeatureSet& zs_data, const ModelParams& params,
                    const ModelConfig& config, const SemanticSpec& spec,
                    const CodeMatrix& zs_codes, RisRule ris_rule) {
    zs_data.validate();
    if (zs_data.class_names != zs_codes.class_names)
        throw ContractError("evaluate: dataset class list does not match the ZS code matrix");
    const std::size_t c_count = zs_codes.class_count();
    const auto off = spec.offsets();

    EvalReport report;
    report.class_names = zs_codes.class_names;
    report.confusion = Matrix(c_count, c_count);
    report.n_samples = zs_data.size();

    for (std::size_t i = 0; i < zs_data.size(); ++i) {
        const std::vector<double> theta = backbone_forward(params, zs_data.features.row(i));
        const std::vector<double> f = semantic_predictor(theta, params.projection);
        int pred;
        if (config.mode == Mode::Ris) {
            std::vector<double> probs(spec.semantics.size());
            for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
                if (spec.semantics[k].kind != SemanticKind::BinaryAttribute)
                    throw ContractError("RIS inference requires binary attribute semantics; '" +
                                        spec.semantics[k].name + "' is not one");
                probs[k] = sigmoid(f[off[k]]);
            }
            pred = ris_zs_classify(probs, zs_codes.phi, ris_rule);
        } else if (config.codeword_path == CodewordPath::PerState) {
            pred = zs_classify_per_state(f, params, config, spec, zs_codes);
        } else {
            pred = zs_classify(f, zs_codes.phi);
        }
        report.confusion(static_cast<std::size_t>(zs_data.labels[i]),
                         static_cast<std::size_t>(pred)) += 1.0;
    }

    report.per_class_accuracy.assign(c_count, -1.0);
    double mean = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < c_count; ++c) {
        double row_total = 0.0;
        for (std::size_t p = 0; p < c_count; ++p) row_total += report.confusion(c, p);
        if (row_total == 0.0) {
            report.excluded_classes.push_back(zs_codes.class_names[c]);
            continue;
        }
        report.per_class_accuracy[c] = report.confusion(c, c) / row_total;
        mean += report.per_class_accuracy[c];
        ++counted;
    }
    report.zs_mca = counted > 0 ? mean / static_cast<double>(counted) : 0.0;
    return report;
}

} // namespace score

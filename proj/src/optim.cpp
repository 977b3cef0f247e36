#include "score/optim.hpp"

#include <cmath>
#include <numeric>

namespace score {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ContractError("learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ContractError("momentum must be in [0,1)");
    if (weight_decay < 0.0) throw ContractError("weight_decay must be >= 0");
    if (batch_size == 0) throw ContractError("batch_size must be >= 1");
    if (lr_decay <= 0.0 || lr_decay > 1.0) throw ContractError("lr_decay must be in (0,1]");
}

OptimizerState make_optimizer_state(const ModelParams& params, const TrainConfig& config) {
    OptimizerState st;
    st.velocity = zeros_like(params);
    st.current_lr = config.learning_rate;
    return st;
}

namespace {

void step_tensor(std::span<double> p, std::span<const double> g, std::span<double> v, double lr,
                 double momentum, double wd) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        v[i] = momentum * v[i] - lr * (g[i] + wd * p[i]);
        p[i] += v[i];
    }
}

} // namespace

void sgd_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
              const TrainConfig& tcfg, const ModelConfig& mcfg) {
    tcfg.validate();
    const double lr = state.current_lr;
    const double mu = tcfg.momentum;
    const double wd = tcfg.weight_decay;

    for (std::size_t l = 0; l < params.backbone.size(); ++l) {
        step_tensor(params.backbone[l].weight.values(), grads.backbone[l].weight.values(),
                    state.velocity.backbone[l].weight.values(), lr, mu, wd);
        step_tensor(params.backbone[l].bias, grads.backbone[l].bias,
                    state.velocity.backbone[l].bias, lr, mu, wd);
    }
    step_tensor(params.projection.values(), grads.projection.values(),
                state.velocity.projection.values(), lr, mu, wd);

    if (mcfg.codewords_frozen()) return;
    // under the exact omega form the quadratic pull toward the semantic codes
    // is already in the gradient; decaying the codewords would double-count it
    const double wd_codes = mcfg.omega_form == OmegaForm::InnerProduct ? wd : 0.0;
    if (!params.dense_codewords.empty())
        step_tensor(params.dense_codewords.values(), grads.dense_codewords.values(),
                    state.velocity.dense_codewords.values(), lr, mu, wd_codes);
    for (std::size_t k = 0; k < params.state_codewords.size(); ++k)
        step_tensor(params.state_codewords[k].values(), grads.state_codewords[k].values(),
                    state.velocity.state_codewords[k].values(), lr, mu, wd_codes);
}

namespace {

bool params_finite(const ModelParams& p) {
    auto ok = [](std::span<const double> v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    for (const auto& l : p.backbone)
        if (!ok(l.weight.values()) || !ok(l.bias)) return false;
    if (!ok(p.projection.values())) return false;
    if (!p.dense_codewords.empty() && !ok(p.dense_codewords.values())) return false;
    for (const auto& w : p.state_codewords)
        if (!ok(w.values())) return false;
    return true;
}

} // namespace

void train_in_place(const FeatureSet& data, const SemanticSpec& spec, const CodeMatrix& codes,
                    const ModelConfig& mcfg, const TrainConfig& tcfg, ModelParams& params,
                    OptimizerState& state, TrainHistory& history) {
    tcfg.validate();
    mcfg.validate();
    data.validate();
    if (data.size() == 0) throw ContractError("train: empty dataset");
    if (data.class_names != codes.class_names)
        throw ContractError("train: dataset class list does not match the code matrix");

    const std::size_t n = data.size();
    const std::size_t c_count = codes.class_count();
    BatchView batch;
    batch.features = &data.features;
    batch.labels = &data.labels;
    batch.sample_attributes = data.sample_attributes.empty() ? nullptr : &data.sample_attributes;

    for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        // epoch-keyed shuffle so resuming reproduces the exact stream
        RngStream shuffler(tcfg.seed ^ (0x9e3779b97f4a7c15ULL * (state.epochs_done + 1)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffler.shuffle(order);

        EpochStats stats;
        stats.learning_rate = state.current_lr;
        std::vector<std::size_t> correct(c_count, 0), total(c_count, 0);
        const std::size_t n_batches = (n + tcfg.batch_size - 1) / tcfg.batch_size;

        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t lo = b * tcfg.batch_size;
            const std::size_t hi = std::min(lo + tcfg.batch_size, n);
            batch.rows.assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                              order.begin() + static_cast<std::ptrdiff_t>(hi));

            ModelParams grads = zeros_like(params);
            std::vector<int> preds;
            // forward+backward; pre-update predictions feed the train MCA
            const ObjectiveComponents comps =
                objective_with_outputs(batch, params, mcfg, spec, codes, &grads, &preds);
            for (std::size_t i = 0; i < batch.rows.size(); ++i) {
                const auto y = static_cast<std::size_t>(data.labels[batch.rows[i]]);
                ++total[y];
                if (preds[i] == data.labels[batch.rows[i]]) ++correct[y];
            }

            if (!std::isfinite(comps.total))
                throw NumericError("objective became non-finite at epoch " +
                                   std::to_string(state.epochs_done) + ", batch " +
                                   std::to_string(b) + " (learning rate likely too high)");
            stats.objective += comps.total / static_cast<double>(n_batches);
            stats.classification += comps.classification / static_cast<double>(n_batches);
            stats.auxiliary += comps.auxiliary / static_cast<double>(n_batches);
            stats.omega += comps.omega / static_cast<double>(n_batches);

            sgd_step(params, grads, state, tcfg, mcfg);
            if (!params_finite(params))
                throw NumericError("parameters became non-finite at epoch " +
                                   std::to_string(state.epochs_done) + ", batch " +
                                   std::to_string(b) + " (learning rate likely too high)");
        }

        double mca = 0.0;
        std::size_t informative = 0;
        for (std::size_t c = 0; c < c_count; ++c)
            if (total[c] > 0) {
                mca += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
                ++informative;
            }
        stats.train_mca = informative > 0 ? mca / static_cast<double>(informative) : 0.0;
        history.epochs.push_back(stats);

        state.current_lr *= tcfg.lr_decay;
        ++state.epochs_done;
    }
}

TrainResult train(const FeatureSet& data, const SemanticSpec& spec, const CodeMatrix& codes,
                  const ModelConfig& mcfg, const TrainConfig& tcfg) {
    RngStream rng(tcfg.seed);
    TrainResult result;
    result.params = init_params(data.features.cols(), mcfg, spec, codes, rng);
    result.opt_state = make_optimizer_state(result.params, tcfg);
    train_in_place(data, spec, codes, mcfg, tcfg, result.params, result.opt_state, result.history);
    return result;
}

} // namespace score

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "score/optim.hpp"
#include "score/zeroshot.hpp"

namespace score {

struct AlignmentReport {
    std::vector<std::string> class_names;
    std::vector<double> distances; ///< per ZS class, in [0,1]
    double mean_distance = 0.0;
    std::size_t train_rank = 0;
};

/// Orthogonal distance of each unit-normalized ZS code from the span of the
/// (unit-normalized) training codes. Rank tolerance 1e-10.
AlignmentReport alignment_distance(const Matrix& phi_train, const Matrix& phi_zs,
                                   const std::vector<std::string>& zs_class_names = {});

enum class SweepAxis { Lambda, Beta };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepCell {
    double value = 0.0;
    std::uint64_t seed = 0;
    double zs_mca = 0.0;
    double delta_vs_rule = 0.0; ///< against the same seed's RULE baseline
};

struct SweepPointSummary {
    double value = 0.0;
    double mean = 0.0;
    double stdev = 0.0;
    double median = 0.0;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Lambda;
    std::vector<double> grid;
    std::vector<SweepCell> cells; ///< grid-major, seed order within
    std::vector<SweepPointSummary> summary;
    double baseline_rule_mca = 0.0; ///< median over seeds
    std::vector<double> baseline_per_seed;
};

/// Everything one sweep needs; the base model config supplies the codeword
/// path / omega form, and the grid value is written into lambda or beta.
struct SweepTask {
    const FeatureSet* train = nullptr;
    const FeatureSet* zs = nullptr;
    const SemanticSpec* spec = nullptr;
    const CodeMatrix* codes_train = nullptr;
    const CodeMatrix* codes_zs = nullptr;
    ModelConfig base_model;
    TrainConfig base_train;
};

/// Trains one model per (grid value, seed) plus a RULE baseline per seed and
/// reports ZS-MCA deltas. Lambda-axis cells run with beta=0 and free
/// codewords; beta-axis cells run with lambda=0. Cells may be evaluated on up
/// to max_threads threads; results are merged in grid order and are
/// bit-identical for any thread count.
SweepResult regularizer_sweep(const SweepTask& task, SweepAxis axis,
                              const std::vector<double>& grid,
                              const std::vector<std::uint64_t>& seeds, std::size_t max_threads = 1);

} // namespace score

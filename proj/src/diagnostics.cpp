#include "score/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

namespace score {

AlignmentReport alignment_distance(const Matrix& phi_train, const Matrix& phi_zs,
                                   const std::vector<std::string>& zs_class_names) {
    if (phi_train.rows() != phi_zs.rows())
        throw ContractError("alignment_distance: code dimensions differ (" +
                            phi_train.shape_str() + " vs " + phi_zs.shape_str() + ")");
    auto normalized_cols = [](const Matrix& m, const char* what) {
        Matrix out(m.rows(), m.cols());
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::vector<double> v = m.col(c);
            const double n = norm2(v);
            if (n == 0.0)
                throw ContractError(std::string("alignment_distance: zero ") + what +
                                    " code column " + std::to_string(c));
            for (double& x : v) x /= n;
            out.set_col(c, v);
        }
        return out;
    };
    const Matrix train_unit = normalized_cols(phi_train, "training");
    const Matrix zs_unit = normalized_cols(phi_zs, "zero-shot");
    const Matrix basis = orthonormal_basis(train_unit, 1e-10);

    AlignmentReport report;
    report.train_rank = basis.cols();
    report.class_names = zs_class_names;
    if (report.class_names.empty())
        for (std::size_t c = 0; c < phi_zs.cols(); ++c)
            report.class_names.push_back("zs_" + std::to_string(c));
    for (std::size_t c = 0; c < zs_unit.cols(); ++c) {
        const std::vector<double> v = zs_unit.col(c);
        report.distances.push_back(distance_to_span(basis, v));
        report.mean_distance += report.distances.back();
    }
    report.mean_distance /= static_cast<double>(zs_unit.cols());
    return report;
}

std::string to_string(SweepAxis a) { return a == SweepAxis::Lambda ? "lambda" : "beta"; }

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "lambda") return SweepAxis::Lambda;
    if (s == "beta") return SweepAxis::Beta;
    throw DataError("unknown sweep axis '" + s + "'");
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

SweepResult regularizer_sweep(const SweepTask& task, SweepAxis axis,
                              const std::vector<double>& grid,
                              const std::vector<std::uint64_t>& seeds, std::size_t max_threads) {
    if (grid.empty()) throw ContractError("regularizer_sweep: empty grid");
    if (seeds.empty()) throw ContractError("regularizer_sweep: no seeds");
    if (!std::is_sorted(grid.begin(), grid.end(), std::less_equal<>()))
        throw ContractError("regularizer_sweep: grid must be strictly increasing");
    if (task.train == nullptr || task.zs == nullptr || task.spec == nullptr ||
        task.codes_train == nullptr || task.codes_zs == nullptr)
        throw ContractError("regularizer_sweep: incomplete task");

    auto run_one = [&](const ModelConfig& mcfg, std::uint64_t seed) {
        TrainConfig tcfg = task.base_train;
        tcfg.seed = seed;
        TrainResult r;
        try {
            r = train(*task.train, *task.spec, *task.codes_train, mcfg, tcfg);
        } catch (const Error& e) {
            throw NumericError("sweep cell (mode " + to_string(mcfg.mode) + ", lambda " +
                               std::to_string(mcfg.lambda) + ", beta " +
                               std::to_string(mcfg.beta) + ", seed " + std::to_string(seed) +
                               ") failed: " + e.what());
        }
        return evaluate(*task.zs, r.params, mcfg, *task.spec, *task.codes_zs).zs_mca;
    };

    SweepResult result;
    result.axis = axis;
    result.grid = grid;

    struct Job {
        ModelConfig mcfg;
        std::uint64_t seed = 0;
        double value = 0.0;
        bool baseline = false;
    };
    std::vector<Job> jobs;
    for (const std::uint64_t seed : seeds) {
        ModelConfig rule = task.base_model;
        rule.mode = Mode::Rule;
        rule.lambda = 0.0;
        rule.beta = 0.0;
        jobs.push_back({rule, seed, 0.0, true});
    }
    for (const double value : grid)
        for (const std::uint64_t seed : seeds) {
            ModelConfig mcfg = task.base_model;
            mcfg.mode = Mode::Score;
            mcfg.lambda = axis == SweepAxis::Lambda ? value : 0.0;
            mcfg.beta = axis == SweepAxis::Beta ? value : 0.0;
            jobs.push_back({mcfg, seed, value, false});
        }

    std::vector<double> mcas(jobs.size(), 0.0);
    const std::size_t workers = std::max<std::size_t>(1, std::min(max_threads, jobs.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) mcas[i] = run_one(jobs[i].mcfg, jobs[i].seed);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                    mcas[i] = run_one(jobs[i].mcfg, jobs[i].seed);
            }));
        for (auto& f : pool) f.get(); // rethrows cell failures
    }

    result.baseline_per_seed.assign(mcas.begin(),
                                    mcas.begin() + static_cast<std::ptrdiff_t>(seeds.size()));
    result.baseline_rule_mca = median_of(result.baseline_per_seed);

    std::size_t idx = seeds.size();
    for (const double value : grid) {
        std::vector<double> vals;
        for (std::size_t s = 0; s < seeds.size(); ++s, ++idx) {
            SweepCell cell;
            cell.value = value;
            cell.seed = seeds[s];
            cell.zs_mca = mcas[idx];
            cell.delta_vs_rule = mcas[idx] - result.baseline_per_seed[s];
            result.cells.push_back(cell);
            vals.push_back(cell.zs_mca);
        }
        SweepPointSummary sum;
        sum.value = value;
        for (double v : vals) sum.mean += v;
        sum.mean /= static_cast<double>(vals.size());
        for (double v : vals) sum.stdev += (v - sum.mean) * (v - sum.mean);
        sum.stdev = vals.size() > 1
                        ? std::sqrt(sum.stdev / static_cast<double>(vals.size() - 1))
                        : 0.0;
        sum.median = median_of(vals);
        result.summary.push_back(sum);
    }
    return result;
}

} // namespace score

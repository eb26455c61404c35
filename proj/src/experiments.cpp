#include "sipipe/experiments.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sipipe/errors.hpp"
#include "sipipe/generators.hpp"

namespace sipipe {

MethodRates ExperimentCell::rates(double alpha) const {
    MethodRates r;
    r.tests = static_cast<int>(records.size());
    if (records.empty()) return r;
    for (const TestRecord& t : records) {
        if (t.p_selective <= alpha) r.proposed += 1.0;
        if (t.p_wopp <= alpha) r.wopp += 1.0;
        if (t.p_naive <= alpha) r.naive += 1.0;
        if (t.p_bonferroni <= alpha) r.bonferroni += 1.0;
    }
    r.proposed /= r.tests;
    r.wopp /= r.tests;
    r.naive /= r.tests;
    r.bonferroni /= r.tests;
    return r;
}

std::vector<double> ExperimentCell::selective_pvalues() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const TestRecord& t : records) out.push_back(t.p_selective);
    return out;
}

namespace {

Covariance test_covariance(SigmaMode mode, const DataMatrix& X, int feature) {
    switch (mode) {
    case SigmaMode::Identity:
        return Covariance::identity_scaled(1.0);
    case SigmaMode::Ar1:
        return Covariance::ar1(0.5);
    case SigmaMode::EstimatePerFeature: {
        const double s2 = estimate_variance(X.mat(), feature);
        if (!(s2 > 0.0)) throw NumericError("estimated variance is zero for the tested feature");
        return Covariance::identity_scaled(s2);
    }
    }
    throw EngineError("unknown sigma mode");
}

// One replicate: generate, run, pick feature(s), test. Empty result when the
// pipeline output is untestable; data-driven config mismatches (for example a
// cluster too small for a within-cluster search) skip the replicate the same
// way since no test exists at these hyperparameters.
std::vector<TestRecord> replicate_checked(const PipelineGraph& g, const ExperimentConfig& cfg,
                                          bool power_data, int n, int d, double delta,
                                          std::uint64_t rep_seed) {
    DataMatrix X = [&] {
        if (power_data) {
            PowerGenSpec ps;
            ps.n = n;
            ps.d = d;
            ps.delta = delta;
            ps.seed = rep_seed;
            return generate_power_data(ps).X;
        }
        NullGenSpec ns;
        ns.n = n;
        ns.d = d;
        ns.sigma = cfg.sigma == SigmaMode::Ar1 ? Covariance::ar1(0.5) : Covariance::identity_scaled(1.0);
        ns.seed = rep_seed;
        return generate_null(ns);
    }();

    const PipelineResult result = run_pipeline(g, X.mat());
    if (result.features.empty()) return {};

    std::vector<int> features;
    if (cfg.all_features) {
        features = result.features;
    } else {
        Rng pick(Rng::derive(rep_seed, 0x5eed));
        features.push_back(
            result.features[static_cast<std::size_t>(pick.below(result.features.size()))]);
    }

    std::vector<TestRecord> out;
    for (int feature : features) {
        const auto spec = default_test_spec(result, feature);
        if (!spec) return {};
        const Covariance sigma = test_covariance(cfg.sigma, X, feature);
        out.push_back(run_selective_test(g, X, sigma, *spec, cfg.sweep, cfg.name));
    }
    return out;
}

std::vector<TestRecord> replicate(const PipelineGraph& g, const ExperimentConfig& cfg, bool power_data,
                                  int n, int d, double delta, std::uint64_t rep_seed) {
    try {
        return replicate_checked(g, cfg, power_data, n, d, delta, rep_seed);
    } catch (const ConfigError&) {
        return {};
    }
}

ExperimentCell run_cell(const PipelineGraph& g, const ExperimentConfig& cfg, bool power_data, int n,
                        int d, double delta, double grid_value, std::uint64_t cell_seed) {
    ExperimentCell cell;
    cell.grid_value = grid_value;
    const int target = cfg.replicates;
    const long max_attempts = static_cast<long>(std::max(1, cfg.max_attempt_factor)) * target;

    long next_index = 0;
#ifdef _OPENMP
    const int block = std::max(32, 4 * omp_get_max_threads());
#else
    const int block = 32;
#endif
    while (static_cast<int>(cell.records.size()) < target && next_index < max_attempts) {
        const long begin = next_index;
        const long end = std::min<long>(begin + block, max_attempts);
        std::vector<std::vector<TestRecord>> results(static_cast<std::size_t>(end - begin));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads())
#endif
        for (long idx = begin; idx < end; ++idx) {
            const std::uint64_t rep_seed = Rng::derive(cell_seed, static_cast<std::uint64_t>(idx));
            results[static_cast<std::size_t>(idx - begin)] =
                replicate(g, cfg, power_data, n, d, delta, rep_seed);
        }
        for (auto& r : results) {
            ++cell.attempted_replicates;
            if (static_cast<int>(cell.records.size()) >= target) break;
            for (TestRecord& t : r) cell.records.push_back(std::move(t));
        }
        next_index = end;
    }
    if (static_cast<int>(cell.records.size()) < target) {
        throw NumericError("experiment: too many untestable replicates (got " +
                           std::to_string(cell.records.size()) + " of " + std::to_string(target) + ")");
    }
    cell.records.resize(static_cast<std::size_t>(target));
    return cell;
}

} // namespace

std::vector<ExperimentCell> type1_experiment(const PipelineGraph& g, const ExperimentConfig& cfg,
                                             const std::string& grid_kind, const std::vector<int>& grid,
                                             int fixed_n, int fixed_d) {
    if (grid_kind != "n" && grid_kind != "d") throw ConfigError("type1: grid kind must be 'n' or 'd'");
    if (grid.empty()) throw ConfigError("type1: empty grid");
    std::vector<ExperimentCell> cells;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const int n = grid_kind == "n" ? grid[gi] : fixed_n;
        const int d = grid_kind == "d" ? grid[gi] : fixed_d;
        const std::uint64_t cell_seed = Rng::derive(cfg.seed, 1000 + gi);
        cells.push_back(run_cell(g, cfg, /*power=*/false, n, d, 0.0, grid[gi], cell_seed));
    }
    return cells;
}

std::vector<ExperimentCell> power_experiment(const PipelineGraph& g, const ExperimentConfig& cfg,
                                             const std::vector<double>& deltas) {
    if (deltas.empty()) throw ConfigError("power: empty delta grid");
    if (cfg.sigma == SigmaMode::Ar1) {
        throw ConfigError("power experiment supports identity or estimated covariance");
    }
    std::vector<ExperimentCell> cells;
    for (std::size_t gi = 0; gi < deltas.size(); ++gi) {
        const std::uint64_t cell_seed = Rng::derive(cfg.seed, 2000 + gi);
        cells.push_back(run_cell(g, cfg, /*power=*/true, 100, 10, deltas[gi], deltas[gi], cell_seed));
    }
    return cells;
}

Covariance estimate_covariance_heldout(const Eigen::MatrixXd& X_holdout) {
    if (X_holdout.rows() < 2) throw ConfigError("holdout covariance needs >= 2 rows");
    const Eigen::Index d = X_holdout.cols();
    const Eigen::MatrixXd centered = X_holdout.rowwise() - X_holdout.colwise().mean();
    Eigen::VectorXd var = centered.colwise().squaredNorm() / static_cast<double>(X_holdout.rows() - 1);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!(var(j) > 0.0)) {
            throw ConfigError("holdout covariance: feature " + std::to_string(j) + " has zero variance");
        }
    }
    return Covariance::kronecker_row_identity(var.asDiagonal());
}

double ks_uniform_pvalue(std::vector<double> pvalues) {
    if (pvalues.empty()) throw ConfigError("ks test: no p-values");
    std::sort(pvalues.begin(), pvalues.end());
    const double n = static_cast<double>(pvalues.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        const double p = std::clamp(pvalues[i], 0.0, 1.0);
        dmax = std::max(dmax, (i + 1.0) / n - p);
        dmax = std::max(dmax, p - i / n);
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace sipipe

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sipipe/engine.hpp"
#include "sipipe/inference.hpp"
#include "sipipe/pipeline_graph.hpp"

namespace sipipe {

enum class SigmaMode {
    Identity,           // known Sigma = I
    Ar1,                // known Sigma_ij = 2^-|i-j|
    EstimatePerFeature, // per-replicate variance of the tested column
};

struct ExperimentConfig {
    std::string name;
    int replicates = 2000;
    double alpha = 0.05;
    SigmaMode sigma = SigmaMode::Identity;
    std::uint64_t seed = 7;
    int jobs = 0;               // OpenMP threads; 0 keeps the runtime default
    bool all_features = false;  // test every selected feature instead of one uniform draw
    int max_attempt_factor = 64; // attempt budget per cell, in units of `replicates`
    SweepConfig sweep;
};

struct MethodRates {
    double proposed = 0.0;
    double wopp = 0.0;
    double naive = 0.0;
    double bonferroni = 0.0;
    int tests = 0;
};

struct ExperimentCell {
    double grid_value = 0.0;
    std::vector<TestRecord> records;
    int attempted_replicates = 0;

    MethodRates rates(double alpha) const;
    std::vector<double> selective_pvalues() const;
};

// Null-data study over a grid of n (grid_kind "n", fixed d) or d ("d",
// fixed n). Each replicate contributes one test on a uniformly drawn
// selected feature (or |M| tests with all_features); replicates whose
// pipeline output has no testable cluster pair are skipped and redrawn so
// every cell aggregates exactly `replicates` tests.
std::vector<ExperimentCell> type1_experiment(const PipelineGraph& g, const ExperimentConfig& cfg,
                                             const std::string& grid_kind, const std::vector<int>& grid,
                                             int fixed_n = 100, int fixed_d = 10);

// Clustered-data study over signal strengths.
std::vector<ExperimentCell> power_experiment(const PipelineGraph& g, const ExperimentConfig& cfg,
                                             const std::vector<double>& deltas);

// Held-out per-feature variances as a row-identity x diagonal covariance for
// test data with n rows. Zero variances are rejected.
Covariance estimate_covariance_heldout(const Eigen::MatrixXd& X_holdout);

// Kolmogorov-Smirnov p-value against Uniform[0,1].
double ks_uniform_pvalue(std::vector<double> pvalues);

} // namespace sipipe

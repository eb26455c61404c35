#pragma once

#include <optional>
#include <string>

#include "sipipe/engine.hpp"
#include "sipipe/types.hpp"

namespace sipipe {

// Cluster pair and feature under test; labels refer to the pipeline result,
// the feature index to the original column numbering.
struct TestSpec {
    int cluster_a = 0;
    int cluster_b = 0;
    int feature = 0;
};

// Contrast vector over the flattened data with its standard deviation
// sigma_T = sqrt(eta' Sigma eta).
struct TestDirection {
    Eigen::VectorXd eta;
    double sigma_T = 0.0;
};

struct TruncatedNormal {
    double mean = 0.0;
    double sd = 1.0;
    IntervalSet region;
};

// Contrast of cluster means for the tested feature: +1/|C_a| entries against
// -1/|C_b| entries in the feature's column.
TestDirection build_eta(const PipelineResult& result, const TestSpec& spec, int n, int d,
                        const Covariance& sigma);

struct Decomposition {
    ParametricLine line;
    double z_obs = 0.0;
};

// Splits x into the statistic z_obs = eta'x and the line through x whose
// direction is Sigma*eta / (eta' Sigma eta); a + b*z_obs reconstructs x.
Decomposition decompose(const Eigen::VectorXd& x, const TestDirection& dir, const Covariance& sigma,
                        int n, int d);

// P(T <= t) for T ~ N(mean, sd^2) restricted to `region`, computed from
// log-space tail masses so deep truncations stay representable.
double tn_cdf(double t, const TruncatedNormal& tn);

// Two-sided p-value from the conditional law on the truncation region.
double selective_p(double z_obs, double sigma_T, const IntervalSet& region);

// Unconditional two-sided z-test.
double naive_p(double z_obs, double sigma_T);

// Correction over the 3^n * 2^d candidate outputs, in log space.
double bonferroni_p(double naive, int n, int d);

// Over-conditioned variant restricted to the single interval at z_obs.
double wopp_p(double z_obs, double sigma_T, const Interval& single_interval);

// Unbiased sample variance of one column.
double estimate_variance(const Eigen::MatrixXd& X, int feature);

// The two largest clusters (ties to the smaller label); nullopt when the
// result has fewer than two clusters.
std::optional<TestSpec> default_test_spec(const PipelineResult& result, int feature);

struct TestRecord {
    std::string pipeline;
    int feature = 0;
    double z_obs = 0.0;
    double sigma_T = 0.0;
    double p_selective = 1.0;
    double p_naive = 1.0;
    double p_bonferroni = 1.0;
    double p_wopp = 1.0;
    int n_intervals = 0;
    double runtime_ms = 0.0;
};

// Full test for one (pipeline, data, covariance, spec): pipeline run,
// contrast construction, line decomposition, truncation-region sweep and all
// four p-values.
TestRecord run_selective_test(const PipelineGraph& g, const DataMatrix& X, const Covariance& sigma,
                              const TestSpec& spec, const SweepConfig& cfg = {},
                              const std::string& pipeline_name = "");

} // namespace sipipe

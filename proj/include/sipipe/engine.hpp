#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "sipipe/components.hpp"
#include "sipipe/interval.hpp"
#include "sipipe/pipeline_graph.hpp"
#include "sipipe/types.hpp"

namespace sipipe {

// Final pipeline output: outlier rows, selected features, and the label
// vector with -1 marking outliers and noise.
struct PipelineResult {
    std::vector<int> outliers;
    std::vector<int> features;
    Eigen::VectorXi labels;

    bool operator==(const PipelineResult& o) const {
        return outliers == o.outliers && features == o.features && labels.size() == o.labels.size() &&
               (labels.array() == o.labels.array()).all();
    }
};

// Runs every component in topological order in observed mode.
PipelineResult run_pipeline(const PipelineGraph& g, const Eigen::MatrixXd& X);

struct UpdateResult {
    Interval interval;
    PipelineResult result;
};

// One parametric pass at X(z) = A + z*B: the pipeline output at z together
// with the interval [L_z, U_z] on which that output is constant.
UpdateResult update_interval(const PipelineGraph& g, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             double z, GramCache* cache = nullptr);
UpdateResult update_interval(const PipelineGraph& g, const ParametricLine& line, double z, int n, int d,
                             GramCache* cache = nullptr);

struct SweepConfig {
    double z_half_width = 10.0;     // in units of sigma_T
    double min_step = 1e-10;        // absolute progress floor
    std::size_t max_intervals = 1'000'000;
    bool collect_visited = false;   // record every visited interval in SweepDiag
    std::function<void(const std::string&)> log; // one diagnostics line per sweep
};

struct SweepDiag {
    std::size_t visited = 0;
    std::size_t matched = 0;
    std::size_t degenerate = 0;
    double matched_measure = 0.0;
    std::vector<Interval> visited_intervals; // only with collect_visited
};

// Walks z across [-(|z_obs|+w), +(|z_obs|+w)], w = z_half_width*sigma_T,
// keeping every constancy interval whose pipeline output matches `observed`.
// The returned set always contains z_obs.
IntervalSet sweep_truncation_region(const PipelineGraph& g, const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B, const PipelineResult& observed,
                                    double z_obs, double sigma_T, const SweepConfig& cfg = {},
                                    SweepDiag* diag = nullptr);

} // namespace sipipe

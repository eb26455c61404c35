#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sipipe/interval.hpp"
#include "sipipe/pipeline_graph.hpp"
#include "sipipe/types.hpp"

namespace sipipe {

// Parametric-mode node result: the updated state (with interval bounds
// already intersected) and this node's own decision-constancy interval.
struct ComponentOutput {
    NodeState state;
    Interval event = Interval::all();
};

// Sweep-scoped cache of pairwise squared-distance coefficients over a node's
// active submatrix: ||(a_i - a_j) + (b_i - b_j) z||^2 = QA_ij z^2 + QB_ij z
// + QC_ij. Both the per-z distance matrices and the selection-event
// polynomials read off these; entries are keyed by (node, rows, cols) and
// reused while the node's input state is unchanged across sweep steps.
class GramCache {
public:
    struct Triple {
        Eigen::MatrixXd QA, QB, QC;
    };

    const Triple& get(int node_index, const std::vector<int>& rows, const std::vector<int>& cols,
                      const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

private:
    struct Entry {
        int node = -1;
        std::vector<int> rows, cols;
        Triple triple;
        std::uint64_t stamp = 0;
    };
    static constexpr std::size_t kCapacity = 16;
    std::vector<Entry> entries_;
    std::uint64_t tick_ = 0;
};

// ---- Observed mode: plain algorithms on the submatrix X_{(-O, M)} ----

// Updated outlier set (previous outliers included). Score per point is the
// squared distance to its k-th neighbor, or the mean over the k nearest when
// mean_score is set. Post-clustering (within_clusters) restricts the search
// to same-cluster points; noise points are left alone.
std::vector<int> knn_od_observed(const Eigen::MatrixXd& X, int k, double tau, bool within_clusters,
                                 bool mean_score, const NodeState& state);

// Features of state.features whose unbiased sample variance exceeds tau.
std::vector<int> variance_fs_observed(const Eigen::MatrixXd& X, double tau, const NodeState& state);

// Removes the larger-index feature of every pair with |corr| > tau_corr;
// pairs with a zero-variance member count as uncorrelated.
std::vector<int> correlation_fs_observed(const Eigen::MatrixXd& X, double tau_corr, const NodeState& state);

// Lloyd's algorithm with seeded sampling-without-replacement initialization.
// Returns the full-length label vector (non-active rows untouched).
Eigen::VectorXi kmeans_observed(const Eigen::MatrixXd& X, int n_clusters, int max_iter,
                                std::uint64_t seed, const NodeState& state);

// Density clustering with deterministic ascending-index expansion; noise -1.
Eigen::VectorXi dbscan_observed(const Eigen::MatrixXd& X, double eps, int min_pts, const NodeState& state);

// ---- Parametric mode: decision at X(z) = A + z*B plus its event interval ----

ComponentOutput knn_od_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z, int k,
                                  double tau, bool within_clusters, bool mean_score, const NodeState& state,
                                  GramCache* cache = nullptr, int node_index = -1);
ComponentOutput variance_fs_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                       double tau, const NodeState& state);
ComponentOutput correlation_fs_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                          double tau_corr, const NodeState& state);
ComponentOutput kmeans_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                  int n_clusters, int max_iter, std::uint64_t seed, const NodeState& state);
ComponentOutput dbscan_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z, double eps,
                                  int min_pts, const NodeState& state, GramCache* cache = nullptr,
                                  int node_index = -1);

// Union/intersection of parent outlier or feature sets; interval bounds
// combine as (max of lows, min of highs). Parents must agree on every field
// that is not being aggregated.
NodeState aggregate(NodeKind kind, const std::vector<NodeState>& parents);

// ---- Node-level dispatch used by the pipeline runtime ----

NodeState apply_observed(const Node& node, const Eigen::MatrixXd& X, const NodeState& in,
                         bool within_clusters);
ComponentOutput apply_parametric(const Node& node, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 double z, const NodeState& in, bool within_clusters,
                                 GramCache* cache = nullptr, int node_index = -1);

} // namespace sipipe

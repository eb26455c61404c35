#pragma once

// Internal helpers shared by the component implementations.

#include <Eigen/Dense>
#include <vector>

#include "sipipe/components.hpp"
#include "sipipe/kernels.hpp"
#include "sipipe/types.hpp"

namespace sipipe::detail {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& X, const std::vector<int>& rows,
                          const std::vector<int>& cols);

// m x m matrix of pairwise squared Euclidean distances between rows.
Eigen::MatrixXd pair_sqdist(const Eigen::MatrixXd& Xs);

// Groups of active-local row positions the OD search runs over: one group of
// all active rows pre-clustering, one group per cluster label afterwards
// (noise rows belong to no group).
std::vector<std::vector<int>> od_scopes(const NodeState& state, const std::vector<int>& active,
                                        bool within_clusters);

struct KnnScan {
    // Per active-local index: the k nearest (active-local, unordered set as
    // sorted-by-distance list, k-th last) and the outlier flag. Rows outside
    // any scope keep empty neighbor lists and false flags.
    std::vector<std::vector<int>> neighbors;
    std::vector<char> flagged;
};

// Neighbor sets and threshold flags from a distance matrix. Ties broken by
// (distance, index).
KnnScan knn_scan(const Eigen::MatrixXd& D, const std::vector<std::vector<int>>& scopes, int k,
                 double tau, bool mean_score);

// DBSCAN on a squared-distance matrix; labels are 1..k with -1 for noise.
Eigen::VectorXi dbscan_labels(const Eigen::MatrixXd& D, double eps2, int min_pts);

struct LloydTrajectory {
    std::vector<int> centroid_rows;              // scope-local initial rows
    std::vector<Eigen::VectorXi> assignments;    // scope-local labels 0..K-1 per step
    bool fixed_point = false;
};

LloydTrajectory lloyd_trajectory(const Eigen::MatrixXd& Xs, int n_clusters, int max_iter,
                                 std::uint64_t seed);

// Unbiased column variance/covariance quadratics in z for the line A + z*B.
struct ColumnStats {
    Eigen::MatrixXd caa, cbb, cab; // d' x d'; cab(i, j) = cov(a_col_i, b_col_j)
};
ColumnStats centered_column_stats(const Eigen::MatrixXd& As, const Eigen::MatrixXd& Bs);

// Coefficient triple between rows i and j.
inline void pair_coeffs(const GramCache::Triple& g, int i, int j, double& qa, double& qb, double& qc) {
    qa = g.QA(i, j);
    qb = g.QB(i, j);
    qc = g.QC(i, j);
}

GramCache::Triple compute_pair_coeffs(const Eigen::MatrixXd& As, const Eigen::MatrixXd& Bs);

// Pairwise squared distances along the line at z, from cached coefficients.
inline Eigen::MatrixXd pair_sqdist_at(const GramCache::Triple& g, double z) {
    return ((g.QA * z + g.QB) * z + g.QC).cwiseMax(0.0);
}

} // namespace sipipe::detail

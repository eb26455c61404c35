#include <algorithm>
#include <cmath>

#include "components_common.hpp"
#include "sipipe/components.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/kernels.hpp"

namespace sipipe {

using detail::lloyd_trajectory;
using detail::pair_coeffs;
using detail::pair_sqdist;
using detail::submatrix;

Eigen::VectorXi kmeans_observed(const Eigen::MatrixXd& X, int n_clusters, int max_iter,
                                std::uint64_t seed, const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(X, active, state.features);
    const auto traj = lloyd_trajectory(Xs, n_clusters, max_iter, seed);
    Eigen::VectorXi labels = state.labels;
    const Eigen::VectorXi& final_assign = traj.assignments.back();
    for (std::size_t li = 0; li < active.size(); ++li) {
        labels(active[li]) = final_assign(static_cast<Eigen::Index>(li)) + 1;
    }
    return labels;
}

ComponentOutput kmeans_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                  int n_clusters, int max_iter, std::uint64_t seed,
                                  const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd As = submatrix(A, active, state.features);
    const Eigen::MatrixXd Bs = submatrix(B, active, state.features);
    const Eigen::MatrixXd Xs = As + z * Bs;
    const auto traj = lloyd_trajectory(Xs, n_clusters, max_iter, seed);

    const int m = static_cast<int>(Xs.rows());
    const int K = n_clusters;

    // Centroids stay linear in z: track their a- and b-parts along the
    // recorded trajectory, with empty clusters retaining old centroids.
    Eigen::MatrixXd ca(K, As.cols()), cb(K, As.cols());
    for (int c = 0; c < K; ++c) {
        ca.row(c) = As.row(traj.centroid_rows[static_cast<std::size_t>(c)]);
        cb.row(c) = Bs.row(traj.centroid_rows[static_cast<std::size_t>(c)]);
    }

    std::vector<kernels::QuadEvent> events;
    events.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(K) * traj.assignments.size());

    const auto add_assignment_events = [&](const Eigen::VectorXi& assign) {
        for (int i = 0; i < m; ++i) {
            const int own = assign(i);
            const Eigen::RowVectorXd da_own = As.row(i) - ca.row(own);
            const Eigen::RowVectorXd db_own = Bs.row(i) - cb.row(own);
            const double oa = db_own.squaredNorm();
            const double ob = 2.0 * da_own.dot(db_own);
            const double oc = da_own.squaredNorm();
            for (int c = 0; c < K; ++c) {
                if (c == own) continue;
                const Eigen::RowVectorXd da = As.row(i) - ca.row(c);
                const Eigen::RowVectorXd db = Bs.row(i) - cb.row(c);
                events.push_back({oa - db.squaredNorm(), ob - 2.0 * da.dot(db), oc - da.squaredNorm(), true});
            }
        }
    };

    add_assignment_events(traj.assignments.front());
    for (std::size_t step = 1; step < traj.assignments.size(); ++step) {
        const Eigen::VectorXi& prev = traj.assignments[step - 1];
        for (int c = 0; c < K; ++c) {
            Eigen::RowVectorXd sa = Eigen::RowVectorXd::Zero(As.cols());
            Eigen::RowVectorXd sb = Eigen::RowVectorXd::Zero(As.cols());
            int count = 0;
            for (int i = 0; i < m; ++i) {
                if (prev(i) == c) {
                    sa += As.row(i);
                    sb += Bs.row(i);
                    ++count;
                }
            }
            if (count > 0) {
                ca.row(c) = sa / count;
                cb.row(c) = sb / count;
            }
        }
        add_assignment_events(traj.assignments[step]);
    }

    ComponentOutput out;
    out.event = kernels::tightest_interval(events, z);
    out.state = state;
    const Eigen::VectorXi& final_assign = traj.assignments.back();
    for (std::size_t li = 0; li < active.size(); ++li) {
        out.state.labels(active[li]) = final_assign(static_cast<Eigen::Index>(li)) + 1;
    }
    return out;
}

Eigen::VectorXi dbscan_observed(const Eigen::MatrixXd& X, double eps, int min_pts,
                                const NodeState& state) {
    if (!(eps > 0.0)) throw ConfigError("dbscan: eps must be > 0");
    if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(X, active, state.features);
    const Eigen::MatrixXd D = pair_sqdist(Xs);
    const Eigen::VectorXi local = detail::dbscan_labels(D, eps * eps, min_pts);
    Eigen::VectorXi labels = state.labels;
    for (std::size_t li = 0; li < active.size(); ++li) {
        labels(active[li]) = local(static_cast<Eigen::Index>(li));
    }
    return labels;
}

ComponentOutput dbscan_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                  double eps, int min_pts, const NodeState& state, GramCache* cache,
                                  int node_index) {
    const std::vector<int> active = state.active_rows();
    GramCache fallback;
    GramCache& gc = cache ? *cache : fallback;
    const GramCache::Triple& g = gc.get(node_index, active, state.features, A, B);
    const Eigen::MatrixXd D = detail::pair_sqdist_at(g, z);
    const double eps2 = eps * eps;
    const Eigen::VectorXi local = detail::dbscan_labels(D, eps2, min_pts);

    const int m = static_cast<int>(active.size());
    thread_local std::vector<kernels::QuadEvent> events;
    events.clear();
    events.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m) / 2);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            double qa, qb, qc;
            pair_coeffs(g, i, j, qa, qb, qc);
            events.push_back({qa, qb, qc - eps2, D(i, j) <= eps2});
        }
    }

    ComponentOutput out;
    out.event = kernels::tightest_interval(events, z);
    out.state = state;
    for (std::size_t li = 0; li < active.size(); ++li) {
        out.state.labels(active[li]) = local(static_cast<Eigen::Index>(li));
    }
    return out;
}

} // namespace sipipe

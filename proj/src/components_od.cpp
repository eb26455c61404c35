#include <algorithm>
#include <cmath>

#include "components_common.hpp"
#include "sipipe/components.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/kernels.hpp"

namespace sipipe {

using detail::od_scopes;
using detail::pair_coeffs;
using detail::pair_sqdist;
using detail::submatrix;

std::vector<int> knn_od_observed(const Eigen::MatrixXd& X, int k, double tau, bool within_clusters,
                                 bool mean_score, const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(X, active, state.features);
    const Eigen::MatrixXd D = pair_sqdist(Xs);
    const auto scopes = od_scopes(state, active, within_clusters);
    const auto scan = detail::knn_scan(D, scopes, k, tau, mean_score);

    std::vector<int> out = state.outliers;
    for (std::size_t li = 0; li < active.size(); ++li) {
        if (scan.flagged[li]) out.push_back(active[li]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ComponentOutput knn_od_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z, int k,
                                  double tau, bool within_clusters, bool mean_score,
                                  const NodeState& state, GramCache* cache, int node_index) {
    const std::vector<int> active = state.active_rows();
    GramCache local;
    GramCache& gc = cache ? *cache : local;
    const GramCache::Triple& g = gc.get(node_index, active, state.features, A, B);
    // decisions are read from the same coefficients the events are built from
    const Eigen::MatrixXd D = detail::pair_sqdist_at(g, z);
    const auto scopes = od_scopes(state, active, within_clusters);
    const auto scan = detail::knn_scan(D, scopes, k, tau, mean_score);

    thread_local std::vector<kernels::QuadEvent> events;
    events.clear();
    events.reserve(active.size() * active.size());
    const bool finite_tau = std::isfinite(tau);
    for (const auto& scope : scopes) {
        for (int i : scope) {
            const auto& nbrs = scan.neighbors[static_cast<std::size_t>(i)];
            const int kth = nbrs.back();
            double ka, kb, kc;
            pair_coeffs(g, i, kth, ka, kb, kc);

            // Neighbor ordering: everything in the neighbor list stays within
            // the k-th distance, everything else stays beyond it.
            for (int j : scope) {
                if (j == i || j == kth) continue;
                double qa, qb, qc;
                pair_coeffs(g, i, j, qa, qb, qc);
                const bool is_neighbor =
                    std::find(nbrs.begin(), nbrs.end(), j) != nbrs.end();
                if (is_neighbor) {
                    events.push_back({qa - ka, qb - kb, qc - kc, true});
                } else {
                    events.push_back({ka - qa, kb - qb, kc - qc, true});
                }
            }

            // Threshold decision; vacuous for an infinite threshold.
            if (finite_tau) {
                double ta, tb, tc;
                if (mean_score) {
                    ta = tb = tc = 0.0;
                    for (int l : nbrs) {
                        double qa, qb, qc;
                        pair_coeffs(g, i, l, qa, qb, qc);
                        ta += qa;
                        tb += qb;
                        tc += qc;
                    }
                    ta /= k;
                    tb /= k;
                    tc /= k;
                } else {
                    ta = ka;
                    tb = kb;
                    tc = kc;
                }
                const bool flagged = scan.flagged[static_cast<std::size_t>(i)] != 0;
                events.push_back({ta, tb, tc - tau, !flagged});
            }
        }
    }

    ComponentOutput out;
    out.event = kernels::tightest_interval(events, z);
    out.state = state;
    out.state.outliers = state.outliers;
    for (std::size_t li = 0; li < active.size(); ++li) {
        if (scan.flagged[li]) out.state.outliers.push_back(active[li]);
    }
    std::sort(out.state.outliers.begin(), out.state.outliers.end());
    return out;
}

} // namespace sipipe

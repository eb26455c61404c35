#include "sipipe/components.hpp"

#include <algorithm>
#include <numeric>

#include "components_common.hpp"
#include "sipipe/errors.hpp"

namespace sipipe {

namespace detail {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& X, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X(rows[i], cols[j]);
        }
    }
    return out;
}

Eigen::MatrixXd pair_sqdist(const Eigen::MatrixXd& Xs) {
    const Eigen::VectorXd sq = Xs.rowwise().squaredNorm();
    Eigen::MatrixXd D = -2.0 * (Xs * Xs.transpose());
    D.colwise() += sq;
    D.rowwise() += sq.transpose();
    return D.cwiseMax(0.0);
}

std::vector<std::vector<int>> od_scopes(const NodeState& state, const std::vector<int>& active,
                                        bool within_clusters) {
    if (!within_clusters) {
        std::vector<int> all(active.size());
        std::iota(all.begin(), all.end(), 0);
        return {all};
    }
    int max_label = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
        max_label = std::max(max_label, state.labels(active[i]));
    }
    std::vector<std::vector<int>> scopes(static_cast<std::size_t>(max_label));
    for (std::size_t i = 0; i < active.size(); ++i) {
        const int lbl = state.labels(active[i]);
        if (lbl >= 1) scopes[static_cast<std::size_t>(lbl - 1)].push_back(static_cast<int>(i));
    }
    scopes.erase(std::remove_if(scopes.begin(), scopes.end(),
                                [](const std::vector<int>& s) { return s.empty(); }),
                 scopes.end());
    return scopes;
}

KnnScan knn_scan(const Eigen::MatrixXd& D, const std::vector<std::vector<int>>& scopes, int k,
                 double tau, bool mean_score) {
    KnnScan scan;
    scan.neighbors.assign(static_cast<std::size_t>(D.rows()), {});
    scan.flagged.assign(static_cast<std::size_t>(D.rows()), 0);
    for (const auto& scope : scopes) {
        const int m = static_cast<int>(scope.size());
        if (m < k + 1) {
            throw ConfigError("knn od: search scope of size " + std::to_string(m) +
                              " is too small for k = " + std::to_string(k));
        }
        for (int si = 0; si < m; ++si) {
            const int i = scope[static_cast<std::size_t>(si)];
            auto& nbrs = scan.neighbors[static_cast<std::size_t>(i)];
            nbrs.clear();
            // insertion-select the k nearest by (distance, index)
            for (int sj = 0; sj < m; ++sj) {
                const int j = scope[static_cast<std::size_t>(sj)];
                if (j == i) continue;
                const double dj = D(i, j);
                if (static_cast<int>(nbrs.size()) == k) {
                    const double worst = D(i, nbrs.back());
                    if (dj > worst || (dj == worst && j > nbrs.back())) continue;
                    nbrs.pop_back();
                }
                std::size_t pos = nbrs.size();
                while (pos > 0) {
                    const double dp = D(i, nbrs[pos - 1]);
                    if (dp < dj || (dp == dj && nbrs[pos - 1] < j)) break;
                    --pos;
                }
                nbrs.insert(nbrs.begin() + static_cast<std::ptrdiff_t>(pos), j);
            }
            double score;
            if (mean_score) {
                score = 0.0;
                for (int l : nbrs) score += D(i, l);
                score /= k;
            } else {
                score = D(i, nbrs.back());
            }
            scan.flagged[static_cast<std::size_t>(i)] = score > tau ? 1 : 0;
        }
    }
    return scan;
}

Eigen::VectorXi dbscan_labels(const Eigen::MatrixXd& D, double eps2, int min_pts) {
    const int m = static_cast<int>(D.rows());
    Eigen::VectorXi labels = Eigen::VectorXi::Zero(m);
    std::vector<char> visited(static_cast<std::size_t>(m), 0);
    std::vector<char> enqueued(static_cast<std::size_t>(m), 0);
    std::vector<int> queue;

    const auto neighborhood = [&](int p) {
        std::vector<int> nb;
        for (int j = 0; j < m; ++j) {
            if (D(p, j) <= eps2) nb.push_back(j); // includes p itself
        }
        return nb;
    };

    int next_cluster = 0;
    for (int i = 0; i < m; ++i) {
        if (visited[static_cast<std::size_t>(i)]) continue;
        visited[static_cast<std::size_t>(i)] = 1;
        const auto ni = neighborhood(i);
        if (static_cast<int>(ni.size()) < min_pts) {
            labels(i) = -1;
            continue;
        }
        ++next_cluster;
        labels(i) = next_cluster;
        std::fill(enqueued.begin(), enqueued.end(), 0);
        queue.clear();
        for (int j : ni) {
            if (j != i) {
                queue.push_back(j);
                enqueued[static_cast<std::size_t>(j)] = 1;
            }
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int p = queue[head];
            if (!visited[static_cast<std::size_t>(p)]) {
                visited[static_cast<std::size_t>(p)] = 1;
                const auto np = neighborhood(p);
                if (static_cast<int>(np.size()) >= min_pts) {
                    for (int j : np) {
                        if (!enqueued[static_cast<std::size_t>(j)]) {
                            queue.push_back(j);
                            enqueued[static_cast<std::size_t>(j)] = 1;
                        }
                    }
                }
            }
            if (labels(p) == 0 || labels(p) == -1) labels(p) = next_cluster;
        }
    }
    return labels;
}

LloydTrajectory lloyd_trajectory(const Eigen::MatrixXd& Xs, int n_clusters, int max_iter,
                                 std::uint64_t seed) {
    const int m = static_cast<int>(Xs.rows());
    const int K = n_clusters;
    if (m < K) throw ConfigError("kmeans: fewer rows than clusters");

    LloydTrajectory traj;
    // Initial centroids: K distinct rows via a Fisher-Yates prefix.
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int t = 0; t < K; ++t) {
        const auto j = static_cast<std::size_t>(t) + rng.below(static_cast<std::uint64_t>(m - t));
        std::swap(idx[static_cast<std::size_t>(t)], idx[j]);
    }
    traj.centroid_rows.assign(idx.begin(), idx.begin() + K);

    Eigen::MatrixXd centroids(K, Xs.cols());
    for (int c = 0; c < K; ++c) centroids.row(c) = Xs.row(traj.centroid_rows[static_cast<std::size_t>(c)]);

    const auto assign = [&](const Eigen::MatrixXd& cents) {
        Eigen::VectorXi lab(m);
        for (int i = 0; i < m; ++i) {
            int best = 0;
            double best_d = (Xs.row(i) - cents.row(0)).squaredNorm();
            for (int c = 1; c < K; ++c) {
                const double d = (Xs.row(i) - cents.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            lab(i) = best;
        }
        return lab;
    };

    traj.assignments.push_back(assign(centroids));
    for (int t = 0; t <= max_iter; ++t) {
        const Eigen::VectorXi& cur = traj.assignments.back();
        Eigen::MatrixXd next = centroids; // empty clusters retain their centroid
        for (int c = 0; c < K; ++c) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(Xs.cols());
            int count = 0;
            for (int i = 0; i < m; ++i) {
                if (cur(i) == c) {
                    sum += Xs.row(i);
                    ++count;
                }
            }
            if (count > 0) next.row(c) = sum / count;
        }
        centroids = next;
        Eigen::VectorXi lab = assign(centroids);
        const bool same = (lab.array() == cur.array()).all();
        traj.assignments.push_back(std::move(lab));
        if (same) {
            traj.fixed_point = true;
            break;
        }
    }
    return traj;
}

ColumnStats centered_column_stats(const Eigen::MatrixXd& As, const Eigen::MatrixXd& Bs) {
    const Eigen::Index m = As.rows();
    if (m < 2) throw ConfigError("feature selection: fewer than 2 rows");
    const Eigen::MatrixXd Ac = As.rowwise() - As.colwise().mean();
    const Eigen::MatrixXd Bc = Bs.rowwise() - Bs.colwise().mean();
    const double w = 1.0 / static_cast<double>(m - 1);
    ColumnStats s;
    s.caa = w * (Ac.transpose() * Ac);
    s.cbb = w * (Bc.transpose() * Bc);
    s.cab = w * (Ac.transpose() * Bc);
    return s;
}

GramCache::Triple compute_pair_coeffs(const Eigen::MatrixXd& As, const Eigen::MatrixXd& Bs) {
    const Eigen::MatrixXd AA = As * As.transpose();
    const Eigen::MatrixXd BB = Bs * Bs.transpose();
    const Eigen::MatrixXd AB = As * Bs.transpose();
    const Eigen::VectorXd da = AA.diagonal();
    const Eigen::VectorXd db = BB.diagonal();
    const Eigen::VectorXd dab = AB.diagonal();
    GramCache::Triple t;
    t.QA = (db.replicate(1, BB.cols()) + db.transpose().replicate(BB.rows(), 1)) - 2.0 * BB;
    t.QB = 2.0 * ((dab.replicate(1, AB.cols()) + dab.transpose().replicate(AB.rows(), 1)) - AB -
                  AB.transpose());
    t.QC = (da.replicate(1, AA.cols()) + da.transpose().replicate(AA.rows(), 1)) - 2.0 * AA;
    return t;
}

} // namespace detail

const GramCache::Triple& GramCache::get(int node_index, const std::vector<int>& rows,
                                        const std::vector<int>& cols, const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& B) {
    for (auto& e : entries_) {
        if (e.node == node_index && e.rows == rows && e.cols == cols) {
            e.stamp = ++tick_;
            return e.triple;
        }
    }
    Entry fresh;
    fresh.node = node_index;
    fresh.rows = rows;
    fresh.cols = cols;
    fresh.triple =
        detail::compute_pair_coeffs(detail::submatrix(A, rows, cols), detail::submatrix(B, rows, cols));
    fresh.stamp = ++tick_;
    if (entries_.size() < kCapacity) {
        entries_.push_back(std::move(fresh));
        return entries_.back().triple;
    }
    auto oldest = std::min_element(entries_.begin(), entries_.end(),
                                   [](const Entry& a, const Entry& b) { return a.stamp < b.stamp; });
    *oldest = std::move(fresh);
    return oldest->triple;
}

NodeState aggregate(NodeKind kind, const std::vector<NodeState>& parents) {
    if (parents.size() < 2) throw EngineError("aggregate: needs >= 2 parents");
    const bool on_outliers = kind == NodeKind::UnionO || kind == NodeKind::IntersectO;
    const bool take_union = kind == NodeKind::UnionO || kind == NodeKind::UnionM;
    if (!is_aggregate(kind)) throw EngineError("aggregate: not an aggregation kind");

    const NodeState& first = parents.front();
    for (const NodeState& p : parents) {
        if (p.labels != first.labels) throw EngineError("aggregate: mismatched cluster labels across branches");
        if (on_outliers && p.features != first.features) {
            throw EngineError("aggregate: mismatched feature sets across branches");
        }
        if (!on_outliers && p.outliers != first.outliers) {
            throw EngineError("aggregate: mismatched outlier sets across branches");
        }
    }

    NodeState out = first;
    std::vector<int> acc = on_outliers ? first.outliers : first.features;
    for (std::size_t e = 1; e < parents.size(); ++e) {
        const auto& other = on_outliers ? parents[e].outliers : parents[e].features;
        std::vector<int> merged;
        if (take_union) {
            std::set_union(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(merged));
        } else {
            std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(),
                                  std::back_inserter(merged));
        }
        acc = std::move(merged);
    }
    if (on_outliers) {
        out.outliers = std::move(acc);
    } else {
        out.features = std::move(acc);
    }
    out.lo = parents.front().lo;
    out.hi = parents.front().hi;
    for (const NodeState& p : parents) {
        out.lo = std::max(out.lo, p.lo);
        out.hi = std::min(out.hi, p.hi);
    }
    return out;
}

NodeState apply_observed(const Node& node, const Eigen::MatrixXd& X, const NodeState& in,
                         bool within_clusters) {
    NodeState out = in;
    switch (node.kind) {
    case NodeKind::KnnOD:
    case NodeKind::KnnMeanOD:
        out.outliers = knn_od_observed(X, node.params.k, node.params.tau, within_clusters,
                                       node.kind == NodeKind::KnnMeanOD, in);
        break;
    case NodeKind::VarianceFS:
        out.features = variance_fs_observed(X, node.params.tau, in);
        break;
    case NodeKind::CorrelationFS:
        out.features = correlation_fs_observed(X, node.params.tau_corr, in);
        break;
    case NodeKind::KMeans:
        out.labels = kmeans_observed(X, node.params.n_clusters, node.params.max_iter, node.params.seed, in);
        break;
    case NodeKind::Dbscan:
        out.labels = dbscan_observed(X, node.params.eps, node.params.min_pts, in);
        break;
    default:
        throw EngineError("apply_observed: aggregation node dispatched as component");
    }
    return out;
}

ComponentOutput apply_parametric(const Node& node, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 double z, const NodeState& in, bool within_clusters, GramCache* cache,
                                 int node_index) {
    ComponentOutput out;
    switch (node.kind) {
    case NodeKind::KnnOD:
    case NodeKind::KnnMeanOD:
        out = knn_od_parametric(A, B, z, node.params.k, node.params.tau, within_clusters,
                                node.kind == NodeKind::KnnMeanOD, in, cache, node_index);
        break;
    case NodeKind::VarianceFS:
        out = variance_fs_parametric(A, B, z, node.params.tau, in);
        break;
    case NodeKind::CorrelationFS:
        out = correlation_fs_parametric(A, B, z, node.params.tau_corr, in);
        break;
    case NodeKind::KMeans:
        out = kmeans_parametric(A, B, z, node.params.n_clusters, node.params.max_iter, node.params.seed, in);
        break;
    case NodeKind::Dbscan:
        out = dbscan_parametric(A, B, z, node.params.eps, node.params.min_pts, in, cache, node_index);
        break;
    default:
        throw EngineError("apply_parametric: aggregation node dispatched as component");
    }
    out.state.lo = std::max(in.lo, out.event.lo);
    out.state.hi = std::min(in.hi, out.event.hi);
    return out;
}

} // namespace sipipe

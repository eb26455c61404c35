#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sipipe {

enum class NodeKind {
    KnnOD,
    KnnMeanOD,
    VarianceFS,
    CorrelationFS,
    KMeans,
    Dbscan,
    UnionO,
    IntersectO,
    UnionM,
    IntersectM,
};

bool is_od(NodeKind k);
bool is_fs(NodeKind k);
bool is_clustering(NodeKind k);
bool is_aggregate(NodeKind k);
std::string kind_name(NodeKind k);
NodeKind kind_from_name(const std::string& name);

struct NodeParams {
    int k = 0;                 // knn_od, knn_mean_od
    double tau = 0.0;          // knn_od, knn_mean_od, variance_fs
    double tau_corr = 0.0;     // correlation_fs
    int n_clusters = 0;        // kmeans
    int max_iter = 0;          // kmeans
    std::uint64_t seed = 0;    // kmeans
    double eps = 0.0;          // dbscan
    int min_pts = 0;           // dbscan
};

struct Node {
    std::string id;
    NodeKind kind;
    NodeParams params;
};

// Typed component DAG. Validation enforces: acyclic, one root and one sink,
// exactly one clustering node lying on every root-to-sink path, FS nodes
// never downstream of clustering, union/intersect nodes with >= 2 parents
// and every other node with at most one.
class PipelineGraph {
public:
    PipelineGraph(std::vector<Node> nodes, std::vector<std::pair<std::string, std::string>> edges);

    static PipelineGraph from_json_text(const std::string& text);
    static PipelineGraph from_json_file(const std::string& path);
    std::string to_json_text() const;

    int size() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const std::vector<Node>& nodes() const { return nodes_; }

    // Parents sorted by node id; empty for the root.
    const std::vector<int>& parents(int i) const { return parents_[static_cast<std::size_t>(i)]; }
    // True when the clustering node is an ancestor (post-clustering OD scope).
    bool after_clustering(int i) const { return after_clustering_[static_cast<std::size_t>(i)]; }
    int clustering_node() const { return clustering_node_; }

    // Deterministic topological order: Kahn's algorithm, ties broken by id.
    const std::vector<int>& topological_order() const { return topo_; }

private:
    void validate_and_index();

    std::vector<Node> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<bool> after_clustering_;
    std::vector<int> topo_;
    int clustering_node_ = -1;
};

// Spec'd free-function view of the deterministic order.
std::vector<int> topological_sort(const PipelineGraph& g);

} // namespace sipipe

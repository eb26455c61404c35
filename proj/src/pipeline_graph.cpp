#include "sipipe/pipeline_graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sipipe/errors.hpp"

namespace sipipe {

bool is_od(NodeKind k) { return k == NodeKind::KnnOD || k == NodeKind::KnnMeanOD; }
bool is_fs(NodeKind k) { return k == NodeKind::VarianceFS || k == NodeKind::CorrelationFS; }
bool is_clustering(NodeKind k) { return k == NodeKind::KMeans || k == NodeKind::Dbscan; }
bool is_aggregate(NodeKind k) {
    return k == NodeKind::UnionO || k == NodeKind::IntersectO || k == NodeKind::UnionM ||
           k == NodeKind::IntersectM;
}

std::string kind_name(NodeKind k) {
    switch (k) {
    case NodeKind::KnnOD: return "knn_od";
    case NodeKind::KnnMeanOD: return "knn_mean_od";
    case NodeKind::VarianceFS: return "variance_fs";
    case NodeKind::CorrelationFS: return "correlation_fs";
    case NodeKind::KMeans: return "kmeans";
    case NodeKind::Dbscan: return "dbscan";
    case NodeKind::UnionO: return "union_o";
    case NodeKind::IntersectO: return "intersect_o";
    case NodeKind::UnionM: return "union_m";
    case NodeKind::IntersectM: return "intersect_m";
    }
    throw EngineError("kind_name: unknown kind");
}

NodeKind kind_from_name(const std::string& name) {
    static const std::map<std::string, NodeKind> table = {
        {"knn_od", NodeKind::KnnOD},           {"knn_mean_od", NodeKind::KnnMeanOD},
        {"variance_fs", NodeKind::VarianceFS}, {"correlation_fs", NodeKind::CorrelationFS},
        {"kmeans", NodeKind::KMeans},          {"dbscan", NodeKind::Dbscan},
        {"union_o", NodeKind::UnionO},         {"intersect_o", NodeKind::IntersectO},
        {"union_m", NodeKind::UnionM},         {"intersect_m", NodeKind::IntersectM},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown node kind: " + name);
    return it->second;
}

PipelineGraph::PipelineGraph(std::vector<Node> nodes,
                             std::vector<std::pair<std::string, std::string>> edges)
    : nodes_(std::move(nodes)) {
    std::map<std::string, int> index;
    for (int i = 0; i < size(); ++i) {
        const auto& id = nodes_[static_cast<std::size_t>(i)].id;
        if (id.empty()) throw ConfigError("node with empty id");
        if (!index.emplace(id, i).second) throw ConfigError("duplicate node id: " + id);
    }
    for (const auto& [p, c] : edges) {
        const auto pi = index.find(p);
        const auto ci = index.find(c);
        if (pi == index.end() || ci == index.end()) {
            throw ConfigError("edge references unknown node: " + p + " -> " + c);
        }
        edges_.emplace_back(pi->second, ci->second);
    }
    validate_and_index();
}

void PipelineGraph::validate_and_index() {
    const int m = size();
    if (m == 0) throw ConfigError("pipeline has no nodes");
    parents_.assign(static_cast<std::size_t>(m), {});
    children_.assign(static_cast<std::size_t>(m), {});
    std::set<std::pair<int, int>> seen;
    for (const auto& [p, c] : edges_) {
        if (p == c) throw ConfigError("self edge on node " + nodes_[static_cast<std::size_t>(p)].id);
        if (!seen.insert({p, c}).second) throw ConfigError("duplicate edge");
        parents_[static_cast<std::size_t>(c)].push_back(p);
        children_[static_cast<std::size_t>(p)].push_back(c);
    }
    const auto by_id = [this](int a, int b) {
        return nodes_[static_cast<std::size_t>(a)].id < nodes_[static_cast<std::size_t>(b)].id;
    };
    for (auto& v : parents_) std::sort(v.begin(), v.end(), by_id);
    for (auto& v : children_) std::sort(v.begin(), v.end(), by_id);

    // Kahn with an id-ordered frontier.
    std::vector<int> indeg(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i) indeg[static_cast<std::size_t>(i)] = static_cast<int>(parents_[static_cast<std::size_t>(i)].size());
    auto cmp = [&](int a, int b) { return nodes_[static_cast<std::size_t>(a)].id > nodes_[static_cast<std::size_t>(b)].id; };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> frontier(cmp);
    for (int i = 0; i < m; ++i) {
        if (indeg[static_cast<std::size_t>(i)] == 0) frontier.push(i);
    }
    topo_.clear();
    while (!frontier.empty()) {
        const int v = frontier.top();
        frontier.pop();
        topo_.push_back(v);
        for (int c : children_[static_cast<std::size_t>(v)]) {
            if (--indeg[static_cast<std::size_t>(c)] == 0) frontier.push(c);
        }
    }
    if (static_cast<int>(topo_.size()) != m) throw ConfigError("pipeline graph has a cycle");

    int roots = 0, sinks = 0;
    for (int i = 0; i < m; ++i) {
        const auto& nd = nodes_[static_cast<std::size_t>(i)];
        const int np = static_cast<int>(parents_[static_cast<std::size_t>(i)].size());
        if (np == 0) ++roots;
        if (children_[static_cast<std::size_t>(i)].empty()) ++sinks;
        if (is_aggregate(nd.kind)) {
            if (np < 2) throw ConfigError("union/intersect node " + nd.id + " needs >= 2 parents");
        } else if (np > 1) {
            throw ConfigError("node " + nd.id + " has multiple parents but is not union/intersect");
        }
    }
    if (roots != 1) throw ConfigError("pipeline must have exactly one root");
    if (sinks != 1) throw ConfigError("pipeline must have exactly one sink");

    clustering_node_ = -1;
    for (int i = 0; i < m; ++i) {
        if (is_clustering(nodes_[static_cast<std::size_t>(i)].kind)) {
            if (clustering_node_ >= 0) throw ConfigError("pipeline must contain exactly one clustering node");
            clustering_node_ = i;
        }
    }
    if (clustering_node_ < 0) throw ConfigError("pipeline must contain exactly one clustering node");

    // Clustering must cut every root-to-sink path: the sink becomes
    // unreachable once the clustering node is removed.
    int root = -1, sink = -1;
    for (int i = 0; i < m; ++i) {
        if (parents_[static_cast<std::size_t>(i)].empty()) root = i;
        if (children_[static_cast<std::size_t>(i)].empty()) sink = i;
    }
    if (sink != clustering_node_ && root != clustering_node_) {
        std::vector<bool> reach(static_cast<std::size_t>(m), false);
        std::queue<int> bfs;
        bfs.push(root);
        reach[static_cast<std::size_t>(root)] = true;
        while (!bfs.empty()) {
            const int v = bfs.front();
            bfs.pop();
            for (int c : children_[static_cast<std::size_t>(v)]) {
                if (c == clustering_node_ || reach[static_cast<std::size_t>(c)]) continue;
                reach[static_cast<std::size_t>(c)] = true;
                bfs.push(c);
            }
        }
        if (reach[static_cast<std::size_t>(sink)]) {
            throw ConfigError("every root-to-sink path must pass through the clustering node");
        }
    }

    after_clustering_.assign(static_cast<std::size_t>(m), false);
    for (int v : topo_) {
        bool after = v == clustering_node_;
        for (int p : parents_[static_cast<std::size_t>(v)]) {
            after = after || after_clustering_[static_cast<std::size_t>(p)] || p == clustering_node_;
        }
        after_clustering_[static_cast<std::size_t>(v)] = after;
        if (after && v != clustering_node_ && is_fs(nodes_[static_cast<std::size_t>(v)].kind)) {
            throw ConfigError("feature selection cannot run after clustering (node " +
                              nodes_[static_cast<std::size_t>(v)].id + ")");
        }
    }
}

namespace {

NodeParams params_from_json(NodeKind kind, const nlohmann::json& j) {
    NodeParams p;
    switch (kind) {
    case NodeKind::KnnOD:
    case NodeKind::KnnMeanOD:
        p.k = j.at("k").get<int>();
        p.tau = j.at("tau").is_string() && j.at("tau").get<std::string>() == "inf"
                    ? std::numeric_limits<double>::infinity()
                    : j.at("tau").get<double>();
        if (p.k < 1) throw ConfigError("knn od: k must be >= 1");
        if (!(p.tau >= 0.0)) throw ConfigError("knn od: tau must be >= 0");
        break;
    case NodeKind::VarianceFS:
        p.tau = j.at("tau").get<double>();
        break;
    case NodeKind::CorrelationFS:
        p.tau_corr = j.at("tau_corr").get<double>();
        if (!(p.tau_corr >= 0.0)) throw ConfigError("correlation fs: tau_corr must be >= 0");
        break;
    case NodeKind::KMeans:
        p.n_clusters = j.at("n_clusters").get<int>();
        p.max_iter = j.at("max_iter").get<int>();
        p.seed = j.value("seed", 0ull);
        if (p.n_clusters < 1) throw ConfigError("kmeans: n_clusters must be >= 1");
        if (p.max_iter < 0) throw ConfigError("kmeans: max_iter must be >= 0");
        break;
    case NodeKind::Dbscan:
        p.eps = j.at("eps").get<double>();
        p.min_pts = j.at("min_pts").get<int>();
        if (!(p.eps > 0.0)) throw ConfigError("dbscan: eps must be > 0");
        if (p.min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
        break;
    default:
        break;
    }
    return p;
}

nlohmann::json params_to_json(const Node& n) {
    nlohmann::json j = nlohmann::json::object();
    switch (n.kind) {
    case NodeKind::KnnOD:
    case NodeKind::KnnMeanOD:
        j["k"] = n.params.k;
        if (std::isinf(n.params.tau)) {
            j["tau"] = "inf";
        } else {
            j["tau"] = n.params.tau;
        }
        break;
    case NodeKind::VarianceFS:
        j["tau"] = n.params.tau;
        break;
    case NodeKind::CorrelationFS:
        j["tau_corr"] = n.params.tau_corr;
        break;
    case NodeKind::KMeans:
        j["n_clusters"] = n.params.n_clusters;
        j["max_iter"] = n.params.max_iter;
        j["seed"] = n.params.seed;
        break;
    case NodeKind::Dbscan:
        j["eps"] = n.params.eps;
        j["min_pts"] = n.params.min_pts;
        break;
    default:
        break;
    }
    return j;
}

} // namespace

PipelineGraph PipelineGraph::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pipeline config parse error: ") + e.what());
    }
    try {
        std::vector<Node> nodes;
        for (const auto& jn : j.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            n.kind = kind_from_name(jn.at("kind").get<std::string>());
            n.params = params_from_json(n.kind, jn.value("params", nlohmann::json::object()));
            nodes.push_back(std::move(n));
        }
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& je : j.at("edges")) {
            edges.emplace_back(je.at(0).get<std::string>(), je.at(1).get<std::string>());
        }
        return PipelineGraph(std::move(nodes), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pipeline config structure error: ") + e.what());
    }
}

PipelineGraph PipelineGraph::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pipeline config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string PipelineGraph::to_json_text() const {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes_) {
        j["nodes"].push_back({{"id", n.id}, {"kind", kind_name(n.kind)}, {"params", params_to_json(n)}});
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& [p, c] : edges_) {
        j["edges"].push_back({nodes_[static_cast<std::size_t>(p)].id, nodes_[static_cast<std::size_t>(c)].id});
    }
    return j.dump(2);
}

std::vector<int> topological_sort(const PipelineGraph& g) { return g.topological_order(); }

} // namespace sipipe

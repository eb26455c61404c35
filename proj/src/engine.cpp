#include "sipipe/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sipipe/errors.hpp"

namespace sipipe {

namespace {

PipelineResult extract_result(const NodeState& s) {
    PipelineResult r;
    r.outliers = s.outliers;
    r.features = s.features;
    r.labels = s.labels;
    for (int i : s.outliers) r.labels(i) = -1;
    return r;
}

template <typename ApplyFn>
NodeState traverse(const PipelineGraph& g, int n, int d, ApplyFn&& apply_component) {
    std::vector<NodeState> states(static_cast<std::size_t>(g.size()));
    const NodeState init = NodeState::initial(n, d);
    for (int v : g.topological_order()) {
        const Node& node = g.node(v);
        const auto& ps = g.parents(v);
        try {
            if (is_aggregate(node.kind)) {
                std::vector<NodeState> inputs;
                inputs.reserve(ps.size());
                for (int p : ps) inputs.push_back(states[static_cast<std::size_t>(p)]);
                states[static_cast<std::size_t>(v)] = aggregate(node.kind, inputs);
            } else {
                const NodeState& in = ps.empty() ? init : states[static_cast<std::size_t>(ps.front())];
                states[static_cast<std::size_t>(v)] = apply_component(v, node, in);
            }
        } catch (const ConfigError& e) {
            throw ConfigError("node '" + node.id + "': " + e.what());
        }
    }
    // The single sink is last in any topological order.
    return states[static_cast<std::size_t>(g.topological_order().back())];
}

} // namespace

PipelineResult run_pipeline(const PipelineGraph& g, const Eigen::MatrixXd& X) {
    if (!X.allFinite()) throw ConfigError("run_pipeline: non-finite data");
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    const NodeState sink = traverse(g, n, d, [&](int v, const Node& node, const NodeState& in) {
        const bool within = is_od(node.kind) && g.after_clustering(v);
        return apply_observed(node, X, in, within);
    });
    return extract_result(sink);
}

UpdateResult update_interval(const PipelineGraph& g, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             double z, GramCache* cache) {
    const int n = static_cast<int>(A.rows());
    const int d = static_cast<int>(A.cols());
    if (B.rows() != n || B.cols() != d) throw EngineError("update_interval: line shape mismatch");

    const NodeState sink = traverse(g, n, d, [&](int v, const Node& node, const NodeState& in) {
        const bool within = is_od(node.kind) && g.after_clustering(v);
        return apply_parametric(node, A, B, z, in, within, cache, v).state;
    });

    UpdateResult out;
    out.interval = {sink.lo, sink.hi};
    out.result = extract_result(sink);
    const double tol = 1e-7 * std::max(1.0, std::abs(z));
    if (out.interval.lo > z + tol || out.interval.hi < z - tol) {
        std::ostringstream os;
        os << "update_interval: query z = " << z << " escaped its event interval [" << out.interval.lo
           << ", " << out.interval.hi << "]";
        throw EngineError(os.str());
    }
    return out;
}

UpdateResult update_interval(const PipelineGraph& g, const ParametricLine& line, double z, int n, int d,
                             GramCache* cache) {
    return update_interval(g, unflatten(line.a, n, d), unflatten(line.b, n, d), z, cache);
}

IntervalSet sweep_truncation_region(const PipelineGraph& g, const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& B, const PipelineResult& observed,
                                    double z_obs, double sigma_T, const SweepConfig& cfg,
                                    SweepDiag* diag) {
    if (!(sigma_T > 0.0)) throw NumericError("sweep: sigma_T must be positive");
    if (!(cfg.min_step > 0.0)) throw ConfigError("sweep: min_step must be positive");

    const double half = cfg.z_half_width * sigma_T;
    const double bound = std::abs(z_obs) + half;
    const double z_lo = -bound;
    const double z_hi = bound;

    SweepDiag local;
    SweepDiag& dg = diag ? *diag : local;
    GramCache cache;
    std::vector<Interval> matched;

    double z = z_lo;
    std::size_t stagnant = 0;
    while (z <= z_hi) {
        const UpdateResult step = update_interval(g, A, B, z, &cache);
        ++dg.visited;
        if (cfg.collect_visited) dg.visited_intervals.push_back(step.interval);
        if (dg.visited > cfg.max_intervals) {
            throw NumericError("sweep: interval budget exceeded (" + std::to_string(cfg.max_intervals) +
                               ")");
        }
        if (step.result == observed) {
            ++dg.matched;
            if (step.interval.bounded()) dg.matched_measure += step.interval.length();
            matched.push_back(step.interval);
        }
        const double advance = std::max(step.interval.hi, z);
        if (step.interval.hi <= z) {
            if (++stagnant > 1000) {
                std::ostringstream os;
                os << "sweep: stagnation at z = " << z << " (interval hi = " << step.interval.hi << ")";
                throw EngineError(os.str());
            }
        } else {
            stagnant = 0;
        }
        const double nudge = std::max(1e-10, 1e-9 * std::abs(advance));
        if (step.interval.length() < nudge) ++dg.degenerate;
        z = std::max(advance + nudge, z + cfg.min_step);
    }

    IntervalSet region = IntervalSet::from_intervals(std::move(matched));
    const double tol = 1e-9 * std::max(1.0, std::abs(z_obs));
    if (!region.contains(z_obs, tol)) {
        // The observation's own interval matches by definition; stitch it in.
        const UpdateResult own = update_interval(g, A, B, z_obs, &cache);
        if (!(own.result == observed)) {
            throw EngineError("sweep: pipeline output at z_obs does not match the observed output");
        }
        region = interval_union(region, IntervalSet(own.interval));
        region = interval_union(region, IntervalSet(Interval::point(z_obs)));
    }

    if (cfg.log) {
        std::ostringstream os;
        os << "sweep z_obs=" << z_obs << " sigma=" << sigma_T << " visited=" << dg.visited
           << " matched=" << dg.matched << " matched_measure=" << dg.matched_measure
           << " degenerate=" << dg.degenerate << " pieces=" << region.size();
        cfg.log(os.str());
    }
    return region;
}

} // namespace sipipe

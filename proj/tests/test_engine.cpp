#include <doctest.h>

#include <cmath>

#include "sipipe/engine.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/rng.hpp"
#include "sipipe/validate.hpp"

using namespace sipipe;

namespace {

Node mk(const std::string& id, NodeKind kind) {
    Node n;
    n.id = id;
    n.kind = kind;
    return n;
}

PipelineGraph empty_effect_pipeline() {
    Node od = mk("od", NodeKind::KnnOD);
    od.params.k = 1;
    od.params.tau = kInf;
    Node fs = mk("fs", NodeKind::VarianceFS);
    fs.params.tau = -1.0;
    Node cl = mk("cl", NodeKind::KMeans);
    cl.params.n_clusters = 1;
    cl.params.max_iter = 5;
    cl.params.seed = 0;
    return PipelineGraph({od, fs, cl}, {{"od", "fs"}, {"fs", "cl"}});
}

PipelineGraph dbscan_pair_pipeline(double eps, int min_pts) {
    Node cl = mk("cl", NodeKind::Dbscan);
    cl.params.eps = eps;
    cl.params.min_pts = min_pts;
    return PipelineGraph({cl}, {});
}

} // namespace

TEST_SUITE("engine") {

TEST_CASE("empty-effect pipeline returns the trivial output") {
    Rng rng(61);
    Eigen::MatrixXd X(6, 3);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    }
    const PipelineGraph g = empty_effect_pipeline();
    const PipelineResult r = run_pipeline(g, X);
    CHECK(r.outliers.empty());
    CHECK(r.features == std::vector<int>{0, 1, 2});
    for (int i = 0; i < 6; ++i) CHECK(r.labels(i) == 1);

    const PipelineResult again = run_pipeline(g, X);
    CHECK(r == again);
}

TEST_CASE("config errors carry the node id") {
    Node od = mk("my_od_node", NodeKind::KnnOD);
    od.params.k = 10; // larger than n-1
    od.params.tau = 1.0;
    Node cl = mk("cl", NodeKind::KMeans);
    cl.params.n_clusters = 1;
    cl.params.max_iter = 5;
    const PipelineGraph g({od, cl}, {{"my_od_node", "cl"}});
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 2);
    try {
        run_pipeline(g, X);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("my_od_node") != std::string::npos);
    }
}

TEST_CASE("update_interval with constant direction") {
    Rng rng(67);
    Eigen::MatrixXd A(8, 2);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 2; ++j) A(i, j) = rng.normal();
    }
    const Eigen::MatrixXd B = Eigen::MatrixXd::Zero(8, 2);
    const PipelineGraph g = empty_effect_pipeline();
    const UpdateResult u = update_interval(g, A, B, 0.7);
    CHECK(u.interval.lo == -kInf);
    CHECK(u.interval.hi == kInf);
    CHECK(u.result == run_pipeline(g, A));
}

TEST_CASE("parametric output equals the observed run at X(z)") {
    Rng rng(71);
    int done = 0;
    while (done < 30) {
        const RandomInstance inst = random_instance(rng);
        UpdateResult u;
        try {
            u = update_interval(inst.graph, inst.A, inst.B, inst.z);
        } catch (const ConfigError&) {
            continue;
        }
        ++done;
        const Eigen::MatrixXd Xz = inst.A + inst.z * inst.B;
        CHECK(u.result == run_pipeline(inst.graph, Xz));
        CHECK(u.interval.contains(inst.z, 1e-7));
    }
}

TEST_CASE("fixed point of the parametric pass") {
    const auto stats = check_update_fixed_point(101, 25, 8);
    CHECK(stats.trials == 200);
    CHECK(stats.violations == 0);
}

TEST_CASE("sweep on the two-point density toy matches the closed form") {
    const Eigen::MatrixXd A = (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished();
    const Eigen::MatrixXd B = (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished();
    const PipelineGraph g = dbscan_pair_pipeline(2.0, 2);
    const PipelineResult observed = run_pipeline(g, A); // z_obs = 0

    SweepDiag diag;
    SweepConfig cfg;
    cfg.collect_visited = true;
    const IntervalSet Z = sweep_truncation_region(g, A, B, observed, 0.0, 1.0, cfg, &diag);
    REQUIRE(Z.size() == 1);
    CHECK(Z.piece(0).lo == doctest::Approx(-3.0).epsilon(1e-9));
    CHECK(Z.piece(0).hi == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(Z.contains(0.0));

    // visited intervals tile the range without gaps beyond the nudge
    REQUIRE(diag.visited >= 3);
    for (std::size_t i = 1; i < diag.visited_intervals.size(); ++i) {
        const double gap = diag.visited_intervals[i].lo - diag.visited_intervals[i - 1].hi;
        CHECK(gap <= 1e-8);
    }
}

TEST_CASE("sweep keeps the full extent when nothing ever changes") {
    Rng rng(73);
    Eigen::MatrixXd A(6, 2);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 2; ++j) A(i, j) = rng.normal();
    }
    const PipelineGraph g = empty_effect_pipeline();
    const PipelineResult observed = run_pipeline(g, A);
    const IntervalSet Z = sweep_truncation_region(g, A, Eigen::MatrixXd::Zero(6, 2), observed, 0.4, 1.0);
    REQUIRE(Z.size() == 1);
    CHECK(Z.piece(0).lo == -kInf);
    CHECK(Z.piece(0).hi == kInf);
}

TEST_CASE("sweep budget error") {
    // many close points: plenty of neighborhood flips along the line
    Eigen::MatrixXd A(8, 1), B(8, 1);
    Rng rng(79);
    for (int i = 0; i < 8; ++i) {
        A(i, 0) = 0.8 * i;
        B(i, 0) = rng.normal();
    }
    const PipelineGraph g = dbscan_pair_pipeline(1.0, 2);
    const PipelineResult observed = run_pipeline(g, A);
    SweepConfig cfg;
    cfg.max_intervals = 2;
    CHECK_THROWS_AS(sweep_truncation_region(g, A, B, observed, 0.0, 1.0, cfg), NumericError);
}

TEST_CASE("sweep determinism") {
    Rng rng(83);
    int done = 0;
    while (done < 5) {
        const RandomInstance inst = random_instance(rng);
        PipelineResult observed;
        try {
            observed = run_pipeline(inst.graph, inst.A + inst.z * inst.B);
        } catch (const ConfigError&) {
            continue;
        }
        IntervalSet z1, z2;
        try {
            z1 = sweep_truncation_region(inst.graph, inst.A, inst.B, observed, inst.z, 0.8);
            z2 = sweep_truncation_region(inst.graph, inst.A, inst.B, observed, inst.z, 0.8);
        } catch (const ConfigError&) {
            continue;
        }
        ++done;
        CHECK(z1 == z2);
        CHECK(z1.contains(inst.z, 1e-9));
    }
}

TEST_CASE("masked run equivalence on random instances") {
    const auto stats = check_masked_run(103, 6, 6);
    CHECK(stats.trials > 0);
    CHECK(stats.violations == 0);
}

TEST_CASE("aggregation branches: union and intersection against direct set ops") {
    Rng rng(89);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 10 + static_cast<int>(rng.below(6));
        const int d = 3;
        Eigen::MatrixXd X(n, d);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) X(i, j) = rng.normal() * (1.0 + 0.5 * j);
        }
        Node fs_var = mk("fs_var", NodeKind::VarianceFS);
        fs_var.params.tau = 0.5 + rng.uniform01();
        Node fs_corr = mk("fs_corr", NodeKind::CorrelationFS);
        fs_corr.params.tau_corr = 0.3 + 0.6 * rng.uniform01();
        Node merge = mk("merge", NodeKind::IntersectM);
        Node root = mk("a_root", NodeKind::KnnOD);
        root.params.k = 2;
        root.params.tau = 2.0 + 10.0 * rng.uniform01();
        Node cl = mk("zz_cl", NodeKind::KMeans);
        cl.params.n_clusters = 2;
        cl.params.max_iter = 8;
        cl.params.seed = rep;
        const PipelineGraph g({root, fs_var, fs_corr, merge, cl},
                              {{"a_root", "fs_var"},
                               {"a_root", "fs_corr"},
                               {"fs_var", "merge"},
                               {"fs_corr", "merge"},
                               {"merge", "zz_cl"}});
        PipelineResult full;
        try {
            full = run_pipeline(g, X);
        } catch (const ConfigError&) {
            continue; // aggressive outlier threshold starved a branch; redraw
        }

        // each branch alone
        const PipelineGraph gv({root, fs_var, cl}, {{"a_root", "fs_var"}, {"fs_var", "zz_cl"}});
        const PipelineGraph gc({root, fs_corr, cl}, {{"a_root", "fs_corr"}, {"fs_corr", "zz_cl"}});
        const auto mv = run_pipeline(gv, X).features;
        const auto mc = run_pipeline(gc, X).features;
        std::vector<int> expect;
        std::set_intersection(mv.begin(), mv.end(), mc.begin(), mc.end(), std::back_inserter(expect));
        CHECK(full.features == expect);
    }
}

} // TEST_SUITE

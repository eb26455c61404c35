#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sipipe/components.hpp"
#include "sipipe/csv.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/experiments.hpp"
#include "sipipe/generators.hpp"
#include "sipipe/plots.hpp"

using namespace sipipe;

TEST_SUITE("harness") {

TEST_CASE("null generator reproducibility and moments") {
    NullGenSpec spec;
    spec.n = 40;
    spec.d = 5;
    spec.seed = 99;
    const DataMatrix a = generate_null(spec);
    const DataMatrix b = generate_null(spec);
    CHECK(a.mat() == b.mat());
    spec.seed = 100;
    CHECK(generate_null(spec).mat() != a.mat());

    // pooled mean near zero: 1000 draws of 40x5 entries, 3-sigma band
    double sum = 0.0;
    long count = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        spec.seed = 1000 + rep;
        sum += generate_null(spec).mat().sum();
        count += 40 * 5;
    }
    const double mean = sum / count;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("null generator respects the covariance structure") {
    // pooled column covariance of ar1 draws approximates 2^-|i-j|
    const int n = 2, d = 6, reps = 4000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (int rep = 0; rep < reps; ++rep) {
        NullGenSpec spec;
        spec.n = n;
        spec.d = d;
        spec.sigma = Covariance::ar1(0.5);
        spec.seed = 5000 + rep;
        const Eigen::MatrixXd X = generate_null(spec).mat();
        acc += X.row(0).transpose() * X.row(0);
    }
    acc /= reps;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            CHECK(acc(i, j) == doctest::Approx(std::pow(2.0, -std::abs(i - j))).epsilon(0.0).scale(1.0).epsilon(0.15));
        }
    }
}

TEST_CASE("power generator geometry") {
    PowerGenSpec spec;
    spec.delta = 1.0;
    spec.seed = 3;
    const PowerData pd = generate_power_data(spec);
    CHECK(pd.outliers.size() == 10);
    CHECK(pd.X.n() == 100);
    CHECK(pd.X.d() == 10);

    // with delta=1 the pairwise center distance in dims 1-2 is 5*sqrt(3)
    // recover empirical centers from the truth labels
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(3, 2);
    Eigen::Vector3i counts = Eigen::Vector3i::Zero();
    for (int i = 0; i < pd.X.n(); ++i) {
        const int t = pd.truth(i);
        if (t >= 1) {
            centers.row(t - 1) += pd.X.mat().row(i).head(2);
            counts(t - 1) += 1;
        }
    }
    for (int c = 0; c < 3; ++c) centers.row(c) /= counts(c);
    const double expect = 5.0 * std::sqrt(3.0);
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            CHECK((centers.row(a) - centers.row(b)).norm() ==
                  doctest::Approx(expect).epsilon(0.12));
        }
    }

    SUBCASE("delta zero collapses the centers") {
        PowerGenSpec flat;
        flat.delta = 0.0;
        flat.seed = 4;
        const PowerData z = generate_power_data(flat);
        Eigen::RowVector2d m = Eigen::RowVector2d::Zero();
        int cnt = 0;
        for (int i = 0; i < z.X.n(); ++i) {
            if (z.truth(i) >= 1) {
                m += z.X.mat().row(i).head(2);
                ++cnt;
            }
        }
        CHECK((m / cnt).norm() < 0.5);
    }

    SUBCASE("outlier count respects the spec field") {
        PowerGenSpec few;
        few.n_outlier = 4;
        few.seed = 5;
        CHECK(generate_power_data(few).outliers.size() == 4);
        PowerGenSpec bad;
        bad.n_outlier = 100;
        CHECK_THROWS_AS(generate_power_data(bad), ConfigError);
    }
}

TEST_CASE("power generator factor features collapse under the correlation rule") {
    // features 6/7 and 8/9 share factors; the redundancy rule should drop the
    // larger index of each pair most of the time
    int dropped_7 = 0, dropped_9 = 0, reps = 100;
    for (int rep = 0; rep < reps; ++rep) {
        PowerGenSpec spec;
        spec.delta = 0.6;
        spec.seed = 800 + rep;
        const PowerData pd = generate_power_data(spec);
        // pipeline context: distance-based outlier removal runs first and
        // strips the +-8 rows whose independent noise dilutes correlations
        NodeState s0 = NodeState::initial(pd.X.n(), pd.X.d());
        s0.outliers = knn_od_observed(pd.X.mat(), 5, 60.0, false, false, s0);
        const auto kept = correlation_fs_observed(pd.X.mat(), 0.8, s0);
        if (std::find(kept.begin(), kept.end(), 7) == kept.end()) ++dropped_7;
        if (std::find(kept.begin(), kept.end(), 9) == kept.end()) ++dropped_9;
    }
    CHECK(dropped_7 > 85);
    CHECK(dropped_9 > 85);
}

TEST_CASE("csv ingestion") {
    const std::string path = "test_csv_tmp.csv";
    {
        std::ofstream out(path);
        out << "a,b\n1.5,2\n3,4.25\n";
    }
    CsvOptions opt;
    opt.header = true;
    const DataMatrix X = ingest_csv(path, opt);
    CHECK(X.n() == 2);
    CHECK(X.d() == 2);
    CHECK(X.mat()(0, 0) == 1.5);
    CHECK(X.mat()(1, 1) == 4.25);

    SUBCASE("round trip") {
        write_matrix_csv(path, X.mat());
        const DataMatrix Y = ingest_csv(path);
        CHECK(Y.mat() == X.mat());
    }
    SUBCASE("log1p transform") {
        {
            std::ofstream out(path);
            out << "0,1\n2,3\n";
        }
        CsvOptions lop;
        lop.log1p = true;
        const DataMatrix Z = ingest_csv(path, lop);
        CHECK(Z.mat()(0, 0) == 0.0);
        CHECK(Z.mat()(1, 1) == doctest::Approx(std::log(4.0)));
    }
    SUBCASE("bad values rejected") {
        {
            std::ofstream out(path);
            out << "1,2\n3,nan\n";
        }
        CHECK_THROWS_AS(ingest_csv(path), ConfigError);
        {
            std::ofstream out(path);
            out << "1,2\n3\n";
        }
        CHECK_THROWS_AS(ingest_csv(path), ConfigError);
    }
    std::remove(path.c_str());
}

TEST_CASE("holdout covariance estimation") {
    Rng rng(71);
    Eigen::MatrixXd H(400, 3);
    for (int i = 0; i < 400; ++i) {
        H(i, 0) = 2.0 * rng.normal();
        H(i, 1) = 0.5 * rng.normal();
        H(i, 2) = rng.normal();
    }
    const Covariance cov = estimate_covariance_heldout(H);
    // quad form against a unit direction picks out the per-feature variance
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2 * 3);
    e(0) = 1.0;
    CHECK(cov.quad_form(e, 2, 3) == doctest::Approx(4.0).epsilon(0.25));

    Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(5, 2);
    CHECK_THROWS_AS(estimate_covariance_heldout(flat), ConfigError);
}

TEST_CASE("ks uniformity detects both cases") {
    Rng rng(73);
    std::vector<double> uni;
    for (int i = 0; i < 2000; ++i) uni.push_back(rng.uniform01());
    CHECK(ks_uniform_pvalue(uni) > 0.01);

    std::vector<double> skew;
    for (int i = 0; i < 2000; ++i) skew.push_back(rng.uniform01() * rng.uniform01());
    CHECK(ks_uniform_pvalue(skew) < 1e-6);
}

TEST_CASE("plots emit csv and svg") {
    RateTable t;
    t.grid_name = "n";
    t.grid = {100, 150, 200};
    t.series = {{"proposed", {0.05, 0.04, 0.06}},
                {"wopp", {0.05, 0.05, 0.04}},
                {"naive", {0.4, 0.5, 0.45}},
                {"bonferroni", {0.0, 0.0, 0.0}}};
    const std::string dir = "test_plots_tmp";
    emit_plots(t, "type1", dir, "demo");
    CHECK(std::filesystem::exists(dir + "/demo.csv"));
    CHECK(std::filesystem::exists(dir + "/demo.svg"));
    {
        std::ifstream csv(dir + "/demo.csv");
        std::string header;
        std::getline(csv, header);
        CHECK(header == "n,proposed,wopp,naive,bonferroni");
    }
    {
        std::ifstream svg(dir + "/demo.svg");
        std::string all((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
        CHECK(all.find("polyline") != std::string::npos);
        CHECK(all.find("alpha") != std::string::npos);
    }
    std::filesystem::remove_all(dir);

    RateTable empty;
    CHECK_THROWS_AS(emit_plots(empty, "type1", dir, "x"), ConfigError);
}

TEST_CASE("small type1 experiment is deterministic and in range") {
    const PipelineGraph g = PipelineGraph::from_json_file(std::string(SIPIPE_SOURCE_DIR) +
                                                          "/configs/option2.json");
    ExperimentConfig cfg;
    cfg.name = "option2";
    cfg.replicates = 12;
    cfg.seed = 21;
    const auto cells = type1_experiment(g, cfg, "n", {30}, 100, 6);
    REQUIRE(cells.size() == 1);
    CHECK(static_cast<int>(cells[0].records.size()) == 12);
    const auto again = type1_experiment(g, cfg, "n", {30}, 100, 6);
    for (std::size_t i = 0; i < cells[0].records.size(); ++i) {
        CHECK(cells[0].records[i].p_selective == again[0].records[i].p_selective);
        CHECK(cells[0].records[i].z_obs == again[0].records[i].z_obs);
    }
    const MethodRates r = cells[0].rates(0.05);
    CHECK(r.bonferroni <= 0.05 + 1e-12); // correction cannot exceed alpha here

    // byte-identical result files from identical (seed, config), up to the
    // wall-clock runtime column
    write_records_csv("det_a_tmp.csv", cells[0].records);
    write_records_csv("det_b_tmp.csv", again[0].records);
    const auto strip_runtime = [](const std::string& path) {
        std::ifstream in(path);
        std::string out, line;
        while (std::getline(in, line)) {
            out += line.substr(0, line.rfind(',')) + '\n';
        }
        return out;
    };
    const std::string sa = strip_runtime("det_a_tmp.csv");
    const std::string sb = strip_runtime("det_b_tmp.csv");
    CHECK(sa == sb);
    CHECK(!sa.empty());
    std::remove("det_a_tmp.csv");
    std::remove("det_b_tmp.csv");
}

TEST_CASE("option1 on the clustered generator produces a nontrivial output") {
    const PipelineGraph g = PipelineGraph::from_json_file(std::string(SIPIPE_SOURCE_DIR) +
                                                          "/configs/option1_power.json");
    int nontrivial = 0;
    for (int rep = 0; rep < 10; ++rep) {
        PowerGenSpec spec;
        spec.delta = 0.8;
        spec.seed = 910 + rep;
        const PowerData pd = generate_power_data(spec);
        const PipelineResult res = run_pipeline(g, pd.X.mat());
        int clusters = 0;
        for (int i = 0; i < 100; ++i) clusters = std::max(clusters, res.labels(i));
        if (!res.outliers.empty() && !res.features.empty() &&
            static_cast<int>(res.features.size()) < 10 && clusters >= 1) {
            ++nontrivial;
        }
    }
    CHECK(nontrivial >= 8);
}

TEST_CASE("small power experiment runs end to end") {
    const PipelineGraph g = PipelineGraph::from_json_file(std::string(SIPIPE_SOURCE_DIR) +
                                                          "/configs/option2_power.json");
    ExperimentConfig cfg;
    cfg.name = "option2_power";
    cfg.replicates = 6;
    cfg.seed = 31;
    const auto cells = power_experiment(g, cfg, {0.8});
    REQUIRE(cells.size() == 1);
    CHECK(static_cast<int>(cells[0].records.size()) == 6);
    for (const TestRecord& r : cells[0].records) {
        CHECK(r.p_selective >= 0.0);
        CHECK(r.p_selective <= 1.0);
        CHECK(r.n_intervals >= 1);
    }
}

} // TEST_SUITE

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "sipipe/csv.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/experiments.hpp"
#include "sipipe/generators.hpp"
#include "sipipe/inference.hpp"
#include "sipipe/plots.hpp"
#include "sipipe/validate.hpp"

using namespace sipipe;

namespace {

Covariance parse_sigma(const std::string& spec, const DataMatrix& X, int feature,
                       const std::string& holdout_path) {
    if (!holdout_path.empty()) {
        const DataMatrix H = ingest_csv(holdout_path);
        if (H.d() != X.d()) throw ConfigError("holdout data has a different feature count");
        return estimate_covariance_heldout(H.mat());
    }
    if (spec == "identity") return Covariance::identity_scaled(1.0);
    if (spec.rfind("identity:", 0) == 0) {
        return Covariance::identity_scaled(std::stod(spec.substr(9)));
    }
    if (spec == "ar") return Covariance::ar1(0.5);
    if (spec == "estimate") {
        const double s2 = estimate_variance(X.mat(), feature);
        if (!(s2 > 0.0)) throw NumericError("estimated variance is zero for feature " +
                                            std::to_string(feature));
        return Covariance::identity_scaled(s2);
    }
    if (spec.rfind("file:", 0) == 0) {
        const DataMatrix S = ingest_csv(spec.substr(5));
        const Eigen::Index nd = static_cast<Eigen::Index>(X.n()) * X.d();
        if (S.mat().rows() == X.d() && S.mat().cols() == X.d()) {
            return Covariance::kronecker_row_identity(S.mat());
        }
        if (S.mat().rows() == nd && S.mat().cols() == nd) return Covariance::full(S.mat());
        throw ConfigError("covariance file must be d x d or (n*d) x (n*d)");
    }
    throw ConfigError("unknown --sigma value: " + spec);
}

SigmaMode parse_sigma_mode(const std::string& spec) {
    if (spec == "identity") return SigmaMode::Identity;
    if (spec == "ar") return SigmaMode::Ar1;
    if (spec == "estimate") return SigmaMode::EstimatePerFeature;
    throw ConfigError("experiment --sigma must be identity, ar or estimate");
}

RateTable rates_table(const std::string& grid_name, const std::vector<ExperimentCell>& cells,
                      double alpha) {
    RateTable t;
    t.grid_name = grid_name;
    t.alpha = alpha;
    std::vector<double> proposed, wopp, naive, bonf;
    for (const auto& cell : cells) {
        t.grid.push_back(cell.grid_value);
        const MethodRates r = cell.rates(alpha);
        proposed.push_back(r.proposed);
        wopp.push_back(r.wopp);
        naive.push_back(r.naive);
        bonf.push_back(r.bonferroni);
    }
    t.series = {{"proposed", proposed}, {"wopp", wopp}, {"naive", naive}, {"bonferroni", bonf}};
    return t;
}

void write_cells_records(const std::string& path, const std::string& grid_name,
                         const std::vector<ExperimentCell>& cells) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path);
    out << grid_name
        << ",pipeline,feature,z_obs,sigma_T,p_selective,p_naive,p_bonferroni,p_wopp,n_intervals,"
           "runtime_ms\n";
    out << std::setprecision(12);
    for (const auto& cell : cells) {
        for (const TestRecord& r : cell.records) {
            out << cell.grid_value << ',' << r.pipeline << ',' << r.feature << ',' << r.z_obs << ','
                << r.sigma_T << ',' << r.p_selective << ',' << r.p_naive << ',' << r.p_bonferroni
                << ',' << r.p_wopp << ',' << r.n_intervals << ',' << r.runtime_ms << '\n';
        }
    }
}

void print_rates(const std::string& grid_name, const std::vector<ExperimentCell>& cells,
                 double alpha) {
    std::cout << grid_name << "  proposed  wopp    naive   bonferroni  (tests, attempted)\n";
    for (const auto& cell : cells) {
        const MethodRates r = cell.rates(alpha);
        std::cout << std::left << std::setw(7) << cell.grid_value << std::fixed
                  << std::setprecision(4) << " " << r.proposed << "   " << r.wopp << "  " << r.naive
                  << "  " << r.bonferroni << "      (" << r.tests << ", "
                  << cell.attempted_replicates << ")\n";
        std::cout.unsetf(std::ios::fixed);
    }
}

RateTable read_rate_table(const std::string& path, double alpha) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty table: " + path);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2) throw ConfigError("table needs a grid column and at least one method");
    RateTable t;
    t.grid_name = header[0];
    t.alpha = alpha;
    std::vector<std::vector<double>> cols(header.size() - 1);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t idx = 0;
        while (std::getline(ss, cell, ',')) {
            if (idx == 0) {
                t.grid.push_back(std::stod(cell));
            } else if (idx - 1 < cols.size()) {
                cols[idx - 1].push_back(std::stod(cell));
            }
            ++idx;
        }
    }
    for (std::size_t j = 0; j + 1 < header.size(); ++j) t.series.emplace_back(header[j + 1], cols[j]);
    return t;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

int run_command(const std::string& config_path, const std::string& data_path, bool header,
                const std::string& delimiter, bool log1p, const std::string& sigma_spec,
                const std::string& holdout, int feature, const std::string& clusters, double alpha,
                const std::string& out_dir, double z_half_width) {
    const PipelineGraph g = PipelineGraph::from_json_file(config_path);
    CsvOptions opt;
    opt.header = header;
    opt.log1p = log1p;
    if (!delimiter.empty()) opt.delimiter = delimiter[0];
    const DataMatrix X = ingest_csv(data_path, opt);

    const PipelineResult result = run_pipeline(g, X.mat());
    std::cout << "pipeline output: " << result.outliers.size() << " outliers, "
              << result.features.size() << " features selected\n";

    std::filesystem::create_directories(out_dir);
    std::ofstream sweep_log(out_dir + "/sweeps.log");
    SweepConfig cfg;
    cfg.z_half_width = z_half_width;
    cfg.log = [&](const std::string& s) { sweep_log << s << '\n'; };

    std::vector<int> features;
    if (feature >= 0) {
        features.push_back(feature);
    } else {
        features = result.features;
    }

    std::vector<TestRecord> records;
    for (int j : features) {
        std::optional<TestSpec> spec;
        if (!clusters.empty()) {
            const auto pair = parse_int_list(clusters);
            if (pair.size() != 2) throw ConfigError("--clusters expects two labels, e.g. 1,2");
            spec = TestSpec{pair[0], pair[1], j};
        } else {
            spec = default_test_spec(result, j);
            if (!spec) throw ConfigError("pipeline found fewer than two clusters; nothing to test");
        }
        const Covariance sigma = parse_sigma(sigma_spec, X, j, holdout);
        records.push_back(run_selective_test(g, X, sigma, *spec, cfg,
                                             std::filesystem::path(config_path).stem().string()));
        const TestRecord& r = records.back();
        std::cout << "feature " << j << ": p_selective=" << r.p_selective << " p_naive=" << r.p_naive
                  << " p_wopp=" << r.p_wopp << " p_bonferroni=" << r.p_bonferroni
                  << " (|Z|=" << r.n_intervals << " pieces)" << (r.p_selective <= alpha ? "  *" : "")
                  << "\n";
    }
    write_records_csv(out_dir + "/pvalues.csv", records);
    std::cout << "wrote " << out_dir << "/pvalues.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selective inference for clustering pipelines"};
    app.require_subcommand(1);

    std::string config_path, data_path, sigma_spec = "identity", holdout, out_dir = "out";
    std::string clusters, grid_kind = "n", grid_values, deltas = "0.4,0.6,0.8", table_path, kind;
    std::string delimiter = ",";
    bool header = false, log1p = false, all_features = false;
    int feature = -1, replicates = 2000, jobs = 0, fixed_n = 100, fixed_d = 10, scale = 1;
    int max_attempts = 64;
    double alpha = 0.05, z_half_width = 10.0;
    std::uint64_t seed = 7;

    auto* run = app.add_subcommand("run", "run a pipeline on data and test every selected feature");
    run->add_option("--config", config_path, "pipeline config JSON")->required();
    run->add_option("--data", data_path, "numeric CSV data")->required();
    run->add_flag("--header", header, "skip the first CSV row");
    run->add_option("--delimiter", delimiter, "CSV delimiter (default ,)");
    run->add_flag("--log1p", log1p, "apply log(1+x) to every entry");
    run->add_option("--sigma", sigma_spec, "identity | identity:S2 | ar | estimate | file:PATH");
    run->add_option("--sigma-holdout", holdout, "held-out rows CSV for per-feature variances");
    run->add_option("--feature", feature, "test a single feature index (default: all selected)");
    run->add_option("--clusters", clusters, "cluster pair to test, e.g. 1,2 (default: two largest)");
    run->add_option("--alpha", alpha, "significance level for the printed markers");
    run->add_option("--z-half-width", z_half_width, "search half-width in sigma_T units");
    run->add_option("--out", out_dir, "output directory");

    auto* type1 = app.add_subcommand("type1", "null-data rejection rates over an n or d grid");
    type1->add_option("--config", config_path)->required();
    type1->add_option("--grid", grid_kind, "grid variable: n or d");
    type1->add_option("--values", grid_values, "grid values, e.g. 100,150,200,250");
    type1->add_option("--fixed-n", fixed_n, "n when the grid runs over d");
    type1->add_option("--fixed-d", fixed_d, "d when the grid runs over n");
    type1->add_option("--replicates", replicates);
    type1->add_option("--alpha", alpha);
    type1->add_option("--sigma", sigma_spec, "identity | ar | estimate");
    type1->add_option("--seed", seed);
    type1->add_option("--jobs", jobs, "worker threads (0 = runtime default)");
    type1->add_flag("--all-features", all_features, "test every selected feature per replicate");
    type1->add_option("--max-attempts", max_attempts, "attempt budget as a multiple of replicates");
    type1->add_option("--out", out_dir);

    auto* power = app.add_subcommand("power", "clustered-data rejection rates over signal strengths");
    power->add_option("--config", config_path)->required();
    power->add_option("--deltas", deltas, "signal grid, e.g. 0.4,0.6,0.8");
    power->add_option("--replicates", replicates);
    power->add_option("--alpha", alpha);
    power->add_option("--sigma", sigma_spec, "identity | estimate");
    power->add_option("--seed", seed);
    power->add_option("--jobs", jobs);
    power->add_option("--max-attempts", max_attempts, "attempt budget as a multiple of replicates");
    power->add_option("--out", out_dir);

    auto* validate = app.add_subcommand("validate", "run the property suites");
    validate->add_option("--seed", seed);
    validate->add_option("--scale", scale, "trial count multiplier");

    auto* plot = app.add_subcommand("plot", "re-render plots from a rate table CSV");
    plot->add_option("--table", table_path)->required();
    plot->add_option("--kind", kind, "type1 | power")->required();
    plot->add_option("--alpha", alpha);
    plot->add_option("--out", out_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return run_command(config_path, data_path, header, delimiter, log1p, sigma_spec, holdout,
                               feature, clusters, alpha, out_dir, z_half_width);
        }
        if (type1->parsed()) {
            const PipelineGraph g = PipelineGraph::from_json_file(config_path);
            ExperimentConfig cfg;
            cfg.name = std::filesystem::path(config_path).stem().string();
            cfg.replicates = replicates;
            cfg.alpha = alpha;
            cfg.sigma = parse_sigma_mode(sigma_spec);
            cfg.seed = seed;
            cfg.jobs = jobs;
            cfg.all_features = all_features;
            cfg.max_attempt_factor = max_attempts;
            const std::vector<int> grid =
                grid_values.empty()
                    ? (grid_kind == "n" ? std::vector<int>{100, 150, 200, 250}
                                        : std::vector<int>{5, 10, 15, 20})
                    : parse_int_list(grid_values);
            const auto cells = type1_experiment(g, cfg, grid_kind, grid, fixed_n, fixed_d);
            print_rates(grid_kind, cells, alpha);
            const std::string base = "type1_" + cfg.name + "_" + grid_kind;
            emit_plots(rates_table(grid_kind, cells, alpha), "type1", out_dir, base);
            write_cells_records(out_dir + "/" + base + "_records.csv", grid_kind, cells);
            std::cout << "wrote " << out_dir << "/" << base << ".{csv,svg}\n";
            return 0;
        }
        if (power->parsed()) {
            const PipelineGraph g = PipelineGraph::from_json_file(config_path);
            ExperimentConfig cfg;
            cfg.name = std::filesystem::path(config_path).stem().string();
            cfg.replicates = replicates;
            cfg.alpha = alpha;
            cfg.sigma = parse_sigma_mode(sigma_spec);
            cfg.seed = seed;
            cfg.jobs = jobs;
            cfg.max_attempt_factor = max_attempts;
            const auto cells = power_experiment(g, cfg, parse_double_list(deltas));
            print_rates("delta", cells, alpha);
            const std::string base = "power_" + cfg.name;
            emit_plots(rates_table("delta", cells, alpha), "power", out_dir, base);
            write_cells_records(out_dir + "/" + base + "_records.csv", "delta", cells);
            std::cout << "wrote " << out_dir << "/" << base << ".{csv,svg}\n";
            return 0;
        }
        if (validate->parsed()) {
            const ValidationReport report = run_validation(seed, scale);
            for (const auto& item : report.items) {
                std::cout << (item.pass ? "PASS " : "FAIL ") << item.name << ": " << item.detail
                          << "\n";
            }
            return report.all_pass() ? 0 : 3;
        }
        if (plot->parsed()) {
            const RateTable t = read_rate_table(table_path, alpha);
            emit_plots(t, kind, out_dir, std::filesystem::path(table_path).stem().string());
            std::cout << "wrote " << out_dir << "/"
                      << std::filesystem::path(table_path).stem().string() << ".svg\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

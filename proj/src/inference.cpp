#include "sipipe/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "sipipe/errors.hpp"
#include "sipipe/normal.hpp"

namespace sipipe {

TestDirection build_eta(const PipelineResult& result, const TestSpec& spec, int n, int d,
                        const Covariance& sigma) {
    if (spec.cluster_a == spec.cluster_b) throw ConfigError("build_eta: clusters must differ");
    if (!std::binary_search(result.features.begin(), result.features.end(), spec.feature)) {
        throw ConfigError("build_eta: feature " + std::to_string(spec.feature) + " was not selected");
    }
    int na = 0, nb = 0;
    for (int i = 0; i < n; ++i) {
        if (result.labels(i) == spec.cluster_a) ++na;
        if (result.labels(i) == spec.cluster_b) ++nb;
    }
    if (na == 0 || nb == 0) throw NumericError("build_eta: untestable, empty cluster in the pair");

    TestDirection dir;
    dir.eta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * d);
    for (int i = 0; i < n; ++i) {
        const Eigen::Index l = static_cast<Eigen::Index>(i) * d + spec.feature;
        if (result.labels(i) == spec.cluster_a) {
            dir.eta(l) = 1.0 / na;
        } else if (result.labels(i) == spec.cluster_b) {
            dir.eta(l) = -1.0 / nb;
        }
    }
    const double s2 = sigma.quad_form(dir.eta, n, d);
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
        throw NumericError("build_eta: degenerate direction, eta' Sigma eta <= 0");
    }
    dir.sigma_T = std::sqrt(s2);
    return dir;
}

Decomposition decompose(const Eigen::VectorXd& x, const TestDirection& dir, const Covariance& sigma,
                        int n, int d) {
    if (x.size() != dir.eta.size()) throw EngineError("decompose: size mismatch");
    const double s2 = dir.sigma_T * dir.sigma_T;
    if (!(s2 > 0.0)) throw NumericError("decompose: degenerate direction");
    Decomposition out;
    out.z_obs = dir.eta.dot(x);
    out.line.b = sigma.mat_vec(dir.eta, n, d) / s2;
    out.line.a = x - out.line.b * out.z_obs;
    return out;
}

double tn_cdf(double t, const TruncatedNormal& tn) {
    if (tn.region.empty()) throw NumericError("tn_cdf: empty truncation region");
    if (!(tn.sd > 0.0)) throw NumericError("tn_cdf: sd must be positive");

    const double t_std = (t - tn.mean) / tn.sd;
    std::vector<double> log_all, log_below;
    log_all.reserve(tn.region.size());
    for (const Interval& p : tn.region.pieces()) {
        const double a = (p.lo - tn.mean) / tn.sd;
        const double b = (p.hi - tn.mean) / tn.sd;
        log_all.push_back(log_normal_mass(a, b));
        if (b <= t_std) {
            log_below.push_back(log_all.back());
        } else if (a < t_std) {
            log_below.push_back(log_normal_mass(a, t_std));
        }
    }
    const double log_den = log_sum_exp(log_all);
    if (log_den < std::log(1e-300)) {
        throw NumericError("tn_cdf: region mass underflow; widen the region or report the p-value "
                           "deterministically");
    }
    if (log_below.empty()) return 0.0;
    const double log_num = log_sum_exp(std::move(log_below));
    return std::clamp(std::exp(log_num - log_den), 0.0, 1.0);
}

double selective_p(double z_obs, double sigma_T, const IntervalSet& region) {
    const double tol = 1e-8 * std::max(1.0, std::abs(z_obs));
    if (!region.contains(z_obs, tol)) {
        throw EngineError("selective_p: observed statistic outside the truncation region");
    }
    const double cdf = tn_cdf(z_obs, TruncatedNormal{0.0, sigma_T, region});
    const double pi = 1.0 - cdf; // upper-tail pivot
    return std::clamp(2.0 * std::min(pi, 1.0 - pi), 0.0, 1.0);
}

double naive_p(double z_obs, double sigma_T) {
    if (!(sigma_T > 0.0)) throw NumericError("naive_p: sigma_T must be positive");
    return std::erfc(std::abs(z_obs) / (sigma_T * std::sqrt(2.0)));
}

double bonferroni_p(double naive, int n, int d) {
    if (naive < 0.0 || naive > 1.0) throw NumericError("bonferroni_p: invalid naive p-value");
    const double log_p = std::log(naive) + n * std::log(3.0) + d * std::log(2.0);
    if (log_p >= 0.0) return 1.0;
    return std::min(1.0, std::exp(log_p));
}

double wopp_p(double z_obs, double sigma_T, const Interval& single_interval) {
    if (!single_interval.contains(z_obs, 1e-8 * std::max(1.0, std::abs(z_obs)))) {
        throw EngineError("wopp_p: observed statistic outside its interval");
    }
    return selective_p(z_obs, sigma_T,
                       IntervalSet::from_intervals({single_interval, Interval::point(z_obs)}));
}

double estimate_variance(const Eigen::MatrixXd& X, int feature) {
    if (feature < 0 || feature >= X.cols()) throw ConfigError("estimate_variance: feature out of range");
    if (X.rows() < 2) throw ConfigError("estimate_variance: need at least 2 rows");
    const Eigen::VectorXd col = X.col(feature);
    const Eigen::VectorXd centered = col.array() - col.mean();
    return centered.squaredNorm() / static_cast<double>(X.rows() - 1);
}

std::optional<TestSpec> default_test_spec(const PipelineResult& result, int feature) {
    std::map<int, int> counts;
    for (Eigen::Index i = 0; i < result.labels.size(); ++i) {
        if (result.labels(i) >= 1) ++counts[result.labels(i)];
    }
    if (counts.size() < 2) return std::nullopt;
    std::vector<std::pair<int, int>> order(counts.begin(), counts.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.second > b.second || (a.second == b.second && a.first < b.first);
    });
    TestSpec spec;
    spec.cluster_a = order[0].first;
    spec.cluster_b = order[1].first;
    spec.feature = feature;
    return spec;
}

TestRecord run_selective_test(const PipelineGraph& g, const DataMatrix& X, const Covariance& sigma,
                              const TestSpec& spec, const SweepConfig& cfg,
                              const std::string& pipeline_name) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = X.n();
    const int d = X.d();

    const PipelineResult observed = run_pipeline(g, X.mat());
    const TestDirection dir = build_eta(observed, spec, n, d, sigma);
    const Decomposition dec = decompose(X.vec(), dir, sigma, n, d);

    const Eigen::MatrixXd A = unflatten(dec.line.a, n, d);
    const Eigen::MatrixXd B = unflatten(dec.line.b, n, d);
    const UpdateResult at_obs = update_interval(g, A, B, dec.z_obs);
    if (!(at_obs.result == observed)) {
        throw EngineError("run_selective_test: parametric output at z_obs differs from observed run");
    }
    const IntervalSet region = sweep_truncation_region(g, A, B, observed, dec.z_obs, dir.sigma_T, cfg);

    TestRecord rec;
    rec.pipeline = pipeline_name;
    rec.feature = spec.feature;
    rec.z_obs = dec.z_obs;
    rec.sigma_T = dir.sigma_T;
    rec.p_selective = selective_p(dec.z_obs, dir.sigma_T, region);
    rec.p_naive = naive_p(dec.z_obs, dir.sigma_T);
    rec.p_bonferroni = bonferroni_p(rec.p_naive, n, d);
    rec.p_wopp = wopp_p(dec.z_obs, dir.sigma_T, at_obs.interval);
    rec.n_intervals = static_cast<int>(region.size());
    rec.runtime_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(std::chrono::steady_clock::now() - t0)
            .count();
    return rec;
}

} // namespace sipipe

#include "sipipe/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sipipe/components.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/generators.hpp"
#include "sipipe/kernels.hpp"
#include "sipipe/normal.hpp"

namespace sipipe {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050241576528481;

double phi(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = phi(lm), frm = phi(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * 1e-13 * std::abs(left + right)) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(a, m, fa, flm, fm, left, depth - 1) +
           adaptive_simpson(m, b, fm, frm, fb, right, depth - 1);
}

double integrate_phi(double a, double b) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double whole = (b - a) / 6.0 * (phi(a) + 4.0 * phi(m) + phi(b));
    return adaptive_simpson(a, b, phi(a), phi(m), phi(b), whole, 52);
}

} // namespace

double quadrature_normal_mass(double a, double b) {
    if (b < a) return 0.0;
    const double lo = a == -kInf ? std::min(-40.0, b - 40.0) : a;
    const double hi = b == kInf ? std::max(40.0, a + 40.0) : b;
    if (hi <= lo) return 0.0;
    // Split at zero so the peak never hides inside one panel.
    if (lo < 0.0 && hi > 0.0) return integrate_phi(lo, 0.0) + integrate_phi(0.0, hi);
    return integrate_phi(lo, hi);
}

double tn_cdf_oracle(double t, const TruncatedNormal& tn) {
    double total = 0.0, below = 0.0;
    const double t_std = (t - tn.mean) / tn.sd;
    for (const Interval& p : tn.region.pieces()) {
        const double a = (p.lo - tn.mean) / tn.sd;
        const double b = (p.hi - tn.mean) / tn.sd;
        const double m = quadrature_normal_mass(a, b);
        total += m;
        if (b <= t_std) {
            below += m;
        } else if (a < t_std) {
            below += quadrature_normal_mass(a, t_std);
        }
    }
    if (total <= 0.0) throw NumericError("tn_cdf_oracle: zero region mass");
    return std::clamp(below / total, 0.0, 1.0);
}

std::vector<double> sign_sweep_roots(const Polynomial& p, double lo, double hi, int grid_points) {
    std::vector<double> roots;
    double prev_x = lo;
    double prev_v = p.eval(lo);
    for (int i = 1; i <= grid_points; ++i) {
        const double x = lo + (hi - lo) * i / grid_points;
        const double v = p.eval(x);
        if ((prev_v <= 0.0 && v > 0.0) || (prev_v >= 0.0 && v < 0.0) || (prev_v == 0.0)) {
            double a = prev_x, b = x, fa = prev_v;
            if (fa == 0.0) {
                roots.push_back(a);
            } else {
                for (int it = 0; it < 100; ++it) {
                    const double m = 0.5 * (a + b);
                    const double fm = p.eval(m);
                    if (fm == 0.0) {
                        a = b = m;
                        break;
                    }
                    if ((fa < 0.0) == (fm < 0.0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                roots.push_back(0.5 * (a + b));
            }
        }
        prev_x = x;
        prev_v = v;
    }
    return roots;
}

namespace {

double quantile_of(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * (values.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(i);
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

Eigen::MatrixXd random_data(Rng& rng, int n, int d) {
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
    }
    if (rng.below(2) == 0) {
        // split structure so clustering decisions are not pure noise
        const double shift = 2.0 + 1.5 * rng.uniform01();
        for (int i = 0; i < n / 2; ++i) X(i, 0) += shift;
        for (int i = n / 2; i < n; ++i) X(i, 0) -= shift;
    }
    return X;
}

} // namespace

RandomInstance random_instance(Rng& rng) {
    const int n = 12 + static_cast<int>(rng.below(11));
    const int d = 2 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd X = random_data(rng, n, d);

    // distance scale for hyperparameter calibration
    std::vector<double> pair_sq;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) pair_sq.push_back((X.row(i) - X.row(j)).squaredNorm());
    }
    std::vector<double> col_var;
    for (int j = 0; j < d; ++j) {
        const Eigen::VectorXd c = X.col(j).array() - X.col(j).mean();
        col_var.push_back(c.squaredNorm() / (n - 1));
    }

    const int knn_k = 1 + static_cast<int>(rng.below(3));
    const double knn_tau = quantile_of(pair_sq, 0.35 + 0.55 * rng.uniform01());
    const double var_tau = quantile_of(col_var, rng.uniform01()) * (0.4 + 0.9 * rng.uniform01());
    const double corr_tau = 0.3 + 0.65 * rng.uniform01();
    const int kmeans_k = 2 + static_cast<int>(rng.below(2));
    const int dbscan_minpts = 2 + static_cast<int>(rng.below(2));
    const int post_k = std::max(1, dbscan_minpts - 1);
    const double dbscan_eps = std::sqrt(quantile_of(pair_sq, 0.10 + 0.35 * rng.uniform01()));
    const std::uint64_t lloyd_seed = rng.next_u64();

    const auto knn = [&](const std::string& id, bool mean_variant, int k, double tau) {
        Node nd;
        nd.id = id;
        nd.kind = mean_variant ? NodeKind::KnnMeanOD : NodeKind::KnnOD;
        nd.params.k = k;
        nd.params.tau = tau;
        return nd;
    };
    const auto fs_var = [&](const std::string& id) {
        Node nd;
        nd.id = id;
        nd.kind = NodeKind::VarianceFS;
        nd.params.tau = var_tau;
        return nd;
    };
    const auto fs_corr = [&](const std::string& id) {
        Node nd;
        nd.id = id;
        nd.kind = NodeKind::CorrelationFS;
        nd.params.tau_corr = corr_tau;
        return nd;
    };
    const auto kmeans = [&](const std::string& id) {
        Node nd;
        nd.id = id;
        nd.kind = NodeKind::KMeans;
        nd.params.n_clusters = kmeans_k;
        nd.params.max_iter = 10;
        nd.params.seed = lloyd_seed;
        return nd;
    };
    const auto dbscan = [&](const std::string& id) {
        Node nd;
        nd.id = id;
        nd.kind = NodeKind::Dbscan;
        nd.params.eps = dbscan_eps;
        nd.params.min_pts = dbscan_minpts;
        return nd;
    };
    const auto agg = [&](const std::string& id, NodeKind kind) {
        Node nd;
        nd.id = id;
        nd.kind = kind;
        return nd;
    };

    std::vector<Node> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    switch (rng.below(6)) {
    case 0:
        nodes = {knn("od1", false, knn_k, knn_tau), fs_var("fs1"), kmeans("cl")};
        edges = {{"od1", "fs1"}, {"fs1", "cl"}};
        break;
    case 1:
        nodes = {knn("od1", false, knn_k, knn_tau), fs_var("fs1"), dbscan("cl"),
                 knn("od2", true, post_k, quantile_of(pair_sq, 0.5 + 0.4 * rng.uniform01()))};
        edges = {{"od1", "fs1"}, {"fs1", "cl"}, {"cl", "od2"}};
        break;
    case 2:
        nodes = {knn("od1", false, knn_k, knn_tau), fs_var("fsa"), fs_corr("fsb"),
                 agg("fsm", NodeKind::IntersectM), kmeans("cl")};
        edges = {{"od1", "fsa"}, {"od1", "fsb"}, {"fsa", "fsm"}, {"fsb", "fsm"}, {"fsm", "cl"}};
        break;
    case 3:
        nodes = {fs_var("fs1"), knn("oda", false, knn_k, knn_tau),
                 knn("odb", true, knn_k, quantile_of(pair_sq, 0.35 + 0.55 * rng.uniform01())),
                 agg("odm", rng.below(2) == 0 ? NodeKind::UnionO : NodeKind::IntersectO), dbscan("cl")};
        edges = {{"fs1", "oda"}, {"fs1", "odb"}, {"oda", "odm"}, {"odb", "odm"}, {"odm", "cl"}};
        break;
    case 4:
        nodes = {fs_corr("fs1"), kmeans("cl")};
        edges = {{"fs1", "cl"}};
        break;
    default:
        nodes = {dbscan("cl"), knn("od2", rng.below(2) == 0, post_k,
                                   quantile_of(pair_sq, 0.5 + 0.4 * rng.uniform01()))};
        edges = {{"cl", "od2"}};
        break;
    }

    RandomInstance inst{PipelineGraph(std::move(nodes), std::move(edges)), X, X,
                        Eigen::MatrixXd::Zero(n, d), 0.0};
    inst.A = X;
    inst.B = Eigen::MatrixXd(n, d);
    const double amp = (0.5 + 1.5 * rng.uniform01()) / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) inst.B(i, j) = amp * rng.normal();
    }
    inst.z = rng.uniform(-1.5, 1.5);
    inst.A -= inst.z * inst.B; // so that X(z) equals the drawn data
    return inst;
}

PropertyStats check_update_fixed_point(std::uint64_t seed, int instances, int reps_per_instance) {
    Rng rng(seed);
    PropertyStats stats;
    int made = 0;
    int guard = 0;
    while (made < instances && ++guard < instances * 50) {
        RandomInstance inst = random_instance(rng);
        UpdateResult base;
        try {
            base = update_interval(inst.graph, inst.A, inst.B, inst.z);
        } catch (const ConfigError&) {
            continue; // hyperparameter draw invalid for this data; redraw
        }
        ++made;
        const double lo = std::max(base.interval.lo, inst.z - 10.0);
        const double hi = std::min(base.interval.hi, inst.z + 10.0);
        for (int r = 0; r < reps_per_instance; ++r) {
            const double at = lo + (hi - lo) * rng.uniform01();
            ++stats.trials;
            const UpdateResult again = update_interval(inst.graph, inst.A, inst.B, at);
            const bool same_sets = again.result == base.result;
            const bool same_interval =
                again.interval.lo == base.interval.lo && again.interval.hi == base.interval.hi;
            if (!same_sets || !same_interval) {
                ++stats.violations;
                if (stats.detail.empty()) {
                    std::ostringstream os;
                    os << "first violation: z=" << inst.z << " r=" << at << " interval ["
                       << base.interval.lo << "," << base.interval.hi << "] vs [" << again.interval.lo
                       << "," << again.interval.hi << "]";
                    stats.detail = os.str();
                }
            }
        }
    }
    if (made < instances) stats.detail += " (instance generation starved)";
    return stats;
}

PropertyStats check_masked_run(std::uint64_t seed, int tests, int per_side) {
    Rng rng(seed);
    PropertyStats stats;
    int made = 0;
    int guard = 0;
    while (made < tests && ++guard < tests * 80) {
        RandomInstance inst = random_instance(rng);
        PipelineResult observed;
        try {
            observed = run_pipeline(inst.graph, inst.X);
        } catch (const ConfigError&) {
            continue;
        }
        if (observed.features.empty()) continue;
        const int feature =
            observed.features[static_cast<std::size_t>(rng.below(observed.features.size()))];
        const auto spec = default_test_spec(observed, feature);
        if (!spec) continue;

        const int n = static_cast<int>(inst.X.rows());
        const int d = static_cast<int>(inst.X.cols());
        const Covariance sigma = Covariance::identity_scaled(1.0);
        TestDirection dir;
        Decomposition dec;
        IntervalSet region;
        try {
            dir = build_eta(observed, *spec, n, d, sigma);
            dec = decompose(flatten(inst.X), dir, sigma, n, d);
            const Eigen::MatrixXd A = unflatten(dec.line.a, n, d);
            const Eigen::MatrixXd B = unflatten(dec.line.b, n, d);
            region = sweep_truncation_region(inst.graph, A, B, observed, dec.z_obs, dir.sigma_T);
        } catch (const ConfigError&) {
            continue;
        } catch (const NumericError&) {
            continue;
        }
        ++made;

        const double bound = std::abs(dec.z_obs) + 10.0 * dir.sigma_T;
        const IntervalSet range(Interval{-bound, bound});
        const IntervalSet inside = interval_intersect(region, range);
        const IntervalSet outside = interval_intersect(complement_closed(region), range);
        const Eigen::MatrixXd A = unflatten(dec.line.a, n, d);
        const Eigen::MatrixXd B = unflatten(dec.line.b, n, d);

        const auto sample_from = [&](const IntervalSet& set, double margin) -> std::vector<double> {
            std::vector<double> draws;
            std::vector<Interval> usable;
            std::vector<double> weights;
            double total = 0.0;
            for (const Interval& p : set.pieces()) {
                const double lo = p.lo + margin, hi = p.hi - margin;
                if (hi <= lo) continue;
                usable.push_back({lo, hi});
                weights.push_back(hi - lo);
                total += hi - lo;
            }
            if (usable.empty()) return draws;
            for (int i = 0; i < per_side; ++i) {
                double pick = rng.uniform01() * total;
                std::size_t idx = 0;
                while (idx + 1 < usable.size() && pick > weights[idx]) {
                    pick -= weights[idx];
                    ++idx;
                }
                draws.push_back(usable[idx].lo + rng.uniform01() * (usable[idx].hi - usable[idx].lo));
            }
            return draws;
        };

        const auto check_point = [&](double zt, bool expect_match) {
            ++stats.trials;
            const Eigen::MatrixXd Xz = A + zt * B;
            bool match = false;
            try {
                match = run_pipeline(inst.graph, Xz) == observed;
            } catch (const ConfigError&) {
                match = false;
            }
            if (match != expect_match) {
                ++stats.violations;
                if (stats.detail.empty()) {
                    std::ostringstream os;
                    os << "first violation: z=" << zt << " expected " << (expect_match ? "match" : "differ")
                       << " region=" << region.str();
                    stats.detail = os.str();
                }
            }
        };

        for (double zt : sample_from(inside, 1e-8)) check_point(zt, true);
        for (double zt : sample_from(outside, 1e-8)) check_point(zt, false);
    }
    if (made < tests) stats.detail += " (instance generation starved)";
    return stats;
}

PropertyStats check_tn_quadrature(std::uint64_t seed, int cases, double tol) {
    Rng rng(seed);
    PropertyStats stats;
    for (int c = 0; c < cases; ++c) {
        const double sd = 0.3 + 3.0 * rng.uniform01();
        const double mean = 4.0 * rng.normal() * 0.25;
        const int pieces = 1 + static_cast<int>(rng.below(5));
        std::vector<Interval> ivs;
        for (int i = 0; i < pieces; ++i) {
            double lo = mean + sd * rng.uniform(-8.0, 8.0);
            double hi = lo + sd * (0.05 + 2.5 * rng.uniform01());
            if (i == 0 && rng.below(6) == 0) lo = -kInf;
            if (i + 1 == pieces && rng.below(6) == 0) hi = kInf;
            ivs.push_back({std::min(lo, hi), std::max(lo, hi)});
        }
        TruncatedNormal tn{mean, sd, IntervalSet::from_intervals(std::move(ivs))};
        const Interval span{tn.region.pieces().front().lo, tn.region.pieces().back().hi};
        const double lo_t = span.lo == -kInf ? mean - 10.0 * sd : span.lo - sd;
        const double hi_t = span.hi == kInf ? mean + 10.0 * sd : span.hi + sd;
        const double t = rng.uniform(lo_t, hi_t);
        ++stats.trials;
        double got, want;
        try {
            got = tn_cdf(t, tn);
            want = tn_cdf_oracle(t, tn);
        } catch (const NumericError&) {
            continue; // both sides reject pathological mass; not a disagreement
        }
        const double err = std::abs(got - want);
        stats.worst = std::max(stats.worst, err);
        if (err > tol) {
            ++stats.violations;
            if (stats.detail.empty()) {
                std::ostringstream os;
                os << "tn mismatch " << err << " at t=" << t << " region=" << tn.region.str();
                stats.detail = os.str();
            }
        }
    }
    return stats;
}

PropertyStats check_quartic_signsweep(std::uint64_t seed, int cases, double tol) {
    Rng rng(seed);
    PropertyStats stats;
    for (int c = 0; c < cases; ++c) {
        Polynomial p;
        p.deg = 4;
        if (rng.below(3) == 0) {
            // assemble from roots inside the window for guaranteed crossings
            const int nroots = 2 + 2 * static_cast<int>(rng.below(2));
            Polynomial acc = Polynomial::constant(rng.uniform(-2.0, 2.0));
            for (int r = 0; r < nroots; ++r) {
                acc = poly_mul(acc, Polynomial::linear(1.0, -rng.uniform(-8.0, 8.0)));
            }
            p = acc;
            p.deg = 4;
        } else {
            for (int i = 0; i <= 4; ++i) p.c[static_cast<std::size_t>(i)] = rng.normal();
        }
        ++stats.trials;
        const IntervalSet sol = solve_quartic_leq(p);
        const auto oracle = sign_sweep_roots(p, -10.0, 10.0, 100000);
        bool bad = false;
        double worst = 0.0;
        for (const Interval& piece : sol.pieces()) {
            for (double endpoint : {piece.lo, piece.hi}) {
                if (!std::isfinite(endpoint) || std::abs(endpoint) > 9.99) continue;
                double best = kInf;
                for (double r : oracle) best = std::min(best, std::abs(r - endpoint));
                worst = std::max(worst, best);
                if (best > tol) bad = true;
            }
        }
        stats.worst = std::max(stats.worst, worst);
        if (bad) {
            ++stats.violations;
            if (stats.detail.empty()) {
                std::ostringstream os;
                os << "quartic endpoint off by " << worst;
                stats.detail = os.str();
            }
        }
    }
    return stats;
}

PropertyStats check_decompose_reconstruction(std::uint64_t seed, int cases, double tol) {
    Rng rng(seed);
    PropertyStats stats;
    for (int c = 0; c < cases; ++c) {
        const int n = 4 + static_cast<int>(rng.below(18));
        const int d = 1 + static_cast<int>(rng.below(5));
        Eigen::MatrixXd X = random_data(rng, n, d);

        PipelineResult fake;
        fake.labels = Eigen::VectorXi::Zero(n);
        for (int i = 0; i < n; ++i) fake.labels(i) = 1 + static_cast<int>(rng.below(2));
        fake.labels(0) = 1;
        fake.labels(1) = 2;
        fake.features.resize(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) fake.features[static_cast<std::size_t>(j)] = j;

        Covariance sigma = Covariance::identity_scaled(1.0);
        switch (rng.below(3)) {
        case 1:
            sigma = Covariance::ar1(0.5);
            break;
        case 2: {
            Eigen::VectorXd v(d);
            for (int j = 0; j < d; ++j) v(j) = 0.3 + 2.0 * rng.uniform01();
            sigma = Covariance::kronecker_row_identity(v.asDiagonal());
            break;
        }
        default:
            break;
        }

        TestSpec spec{1, 2, static_cast<int>(rng.below(static_cast<std::uint64_t>(d)))};
        const TestDirection dir = build_eta(fake, spec, n, d, sigma);
        const Eigen::VectorXd x = flatten(X);
        const Decomposition dec = decompose(x, dir, sigma, n, d);
        ++stats.trials;

        const double recon = (dec.line.a + dec.line.b * dec.z_obs - x).norm();
        const double ortho = std::abs(dir.eta.dot(dec.line.a));
        // direct projector route
        const Eigen::VectorXd se = sigma.mat_vec(dir.eta, n, d);
        const Eigen::VectorXd proj = x - se * (dir.eta.dot(x) / (dir.sigma_T * dir.sigma_T));
        const double proj_err = (proj - dec.line.a).norm();
        const double err = std::max({recon, ortho, proj_err});
        stats.worst = std::max(stats.worst, err);
        if (err > tol) {
            ++stats.violations;
            if (stats.detail.empty()) {
                std::ostringstream os;
                os << "decompose error " << err;
                stats.detail = os.str();
            }
        }
    }
    return stats;
}

PropertyStats check_kernels_match(std::uint64_t seed, int cases, double tol) {
    Rng rng(seed);
    PropertyStats stats;
    for (int c = 0; c < cases; ++c) {
        const double z = rng.uniform(-2.0, 2.0);
        const int m = 1 + static_cast<int>(rng.below(2000));
        std::vector<kernels::QuadEvent> events;
        events.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            kernels::QuadEvent e;
            e.a = rng.normal();
            e.b = rng.normal();
            e.c = rng.normal();
            if (rng.below(8) == 0) e.a = 0.0;
            const double q = e.a * z * z + e.b * z + e.c;
            e.leq = q <= 0.0;
            events.push_back(e);
        }
        ++stats.trials;
        const Interval fast = kernels::tightest_interval(events, z);
        const Interval ref = kernels::tightest_interval_serial(events, z);
        const auto close = [&](double x, double y) {
            if (x == y) return true;
            if (!std::isfinite(x) || !std::isfinite(y)) return false;
            return std::abs(x - y) <= tol * std::max(1.0, std::max(std::abs(x), std::abs(y)));
        };
        const double gap = std::max(std::isfinite(fast.lo) && std::isfinite(ref.lo)
                                        ? std::abs(fast.lo - ref.lo)
                                        : (fast.lo == ref.lo ? 0.0 : kInf),
                                    std::isfinite(fast.hi) && std::isfinite(ref.hi)
                                        ? std::abs(fast.hi - ref.hi)
                                        : (fast.hi == ref.hi ? 0.0 : kInf));
        if (std::isfinite(gap)) stats.worst = std::max(stats.worst, gap);
        if (!close(fast.lo, ref.lo) || !close(fast.hi, ref.hi)) {
            ++stats.violations;
            if (stats.detail.empty()) {
                std::ostringstream os;
                os << "kernel mismatch: [" << fast.lo << "," << fast.hi << "] vs [" << ref.lo << ","
                   << ref.hi << "]";
                stats.detail = os.str();
            }
        }
    }
    return stats;
}

bool ValidationReport::all_pass() const {
    for (const auto& item : items) {
        if (!item.pass) return false;
    }
    return true;
}

ValidationReport run_validation(std::uint64_t seed, int scale) {
    ValidationReport report;
    const auto add = [&](const std::string& name, const PropertyStats& s) {
        std::ostringstream os;
        os << s.trials << " trials, " << s.violations << " violations";
        if (s.worst > 0.0) os << ", worst " << s.worst;
        if (!s.detail.empty()) os << "; " << s.detail;
        report.items.push_back({name, s.violations == 0 && s.trials > 0, os.str()});
    };
    add("update_fixed_point", check_update_fixed_point(Rng::derive(seed, 1), 20 * scale, 5));
    add("masked_run_equivalence", check_masked_run(Rng::derive(seed, 2), 5 * scale, 5));
    add("tn_cdf_vs_quadrature", check_tn_quadrature(Rng::derive(seed, 3), 200 * scale, 1e-8));
    add("quartic_vs_sign_sweep", check_quartic_signsweep(Rng::derive(seed, 4), 150 * scale, 1e-8));
    add("decompose_reconstruction", check_decompose_reconstruction(Rng::derive(seed, 5), 200 * scale, 1e-10));
    add("kernels_parallel_vs_serial", check_kernels_match(Rng::derive(seed, 6), 60 * scale, 1e-9));
    return report;
}

} // namespace sipipe

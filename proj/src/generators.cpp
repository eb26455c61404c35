#include "sipipe/generators.hpp"

#include <cmath>

#include "sipipe/errors.hpp"

namespace sipipe {

DataMatrix generate_null(const NullGenSpec& spec) {
    if (spec.n < 2 || spec.d < 1) throw ConfigError("generate_null: need n >= 2, d >= 1");
    Rng rng(spec.seed);
    const Eigen::VectorXd eps = spec.sigma.sample(rng, spec.n, spec.d);
    return DataMatrix(unflatten(eps, spec.n, spec.d));
}

PowerData generate_power_data(const PowerGenSpec& spec) {
    const int n = spec.n;
    const int d = spec.d;
    const int K = spec.n_clusters;
    if (d < 3) throw ConfigError("generate_power_data: need d >= 3");
    if (K < 1) throw ConfigError("generate_power_data: need at least one cluster");
    if (spec.n_outlier < 0 || spec.n_outlier >= n) {
        throw ConfigError("generate_power_data: outlier count must be in [0, n)");
    }
    const int n_inlier = n - spec.n_outlier;
    if (n_inlier < K) throw ConfigError("generate_power_data: too few inliers for the cluster count");
    if (!(spec.delta >= 0.0 && spec.delta <= 1.0)) {
        throw ConfigError("generate_power_data: delta must lie in [0, 1]");
    }

    Rng rng(spec.seed);
    const double radius = 5.0 * spec.delta;
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(K, d);
    for (int c = 0; c < K; ++c) {
        const double angle = 2.0 * M_PI * c / K;
        centers(c, 0) = radius * std::cos(angle);
        centers(c, 1) = radius * std::sin(angle);
        // third structured coordinate stays at zero
    }

    const bool has_factors = d >= 10;
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, d);
    Eigen::VectorXi truth(n);

    const auto fill_factor_features = [&](int row) {
        if (!has_factors) return;
        const double f1 = 2.5 * rng.normal();
        const double f2 = 2.5 * rng.normal();
        mu(row, 6) = f1;
        mu(row, 7) = f1;
        mu(row, 8) = f2;
        mu(row, 9) = -f2;
    };

    for (int i = 0; i < n_inlier; ++i) {
        const int c = i % K;
        truth(i) = c + 1;
        mu.row(i).head(3) = centers.row(c).head(3);
        fill_factor_features(i);
    }

    const int n_large = spec.n_outlier / 2;
    std::vector<int> outliers;
    for (int s = 0; s < spec.n_outlier; ++s) {
        const int row = n_inlier + s;
        outliers.push_back(row);
        truth(row) = -1;
        if (s < n_large) {
            // far outlier: +-8 mean in a random direction per feature
            for (int j = 0; j < d; ++j) {
                mu(row, j) = rng.below(2) == 0 ? 8.0 : -8.0;
            }
        } else {
            // boundary outlier: 1.5 units outward from the nearest center
            // along that center's dominant axis; factor features stay inlier-like
            const int c = s % K;
            mu.row(row).head(3) = centers.row(c).head(3);
            int axis = 0;
            double best = std::abs(centers(c, 0));
            for (int j = 1; j < 3; ++j) {
                if (std::abs(centers(c, j)) > best) {
                    best = std::abs(centers(c, j));
                    axis = j;
                }
            }
            const double sign = centers(c, axis) >= 0.0 ? 1.0 : -1.0;
            mu(row, axis) += 1.5 * sign;
            fill_factor_features(row);
        }
    }

    Eigen::MatrixXd X = mu;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) += rng.normal();
    }

    PowerData out{DataMatrix(std::move(X)), std::move(truth), std::move(outliers)};
    return out;
}

} // namespace sipipe

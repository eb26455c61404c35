#pragma once

#include <cstdint>
#include <vector>

#include "sipipe/types.hpp"

namespace sipipe {

// Null model: X = noise only, mean zero.
struct NullGenSpec {
    int n = 100;
    int d = 10;
    Covariance sigma = Covariance::identity_scaled(1.0);
    std::uint64_t seed = 0;
};

DataMatrix generate_null(const NullGenSpec& spec);

// Clustered model: three centers on a circle of radius 5*delta in the first
// two coordinates (third zero), three zero features, two correlated feature
// pairs driven by shared factors, and ten planted outliers.
struct PowerGenSpec {
    int n = 100;
    int d = 10;
    int n_clusters = 3;
    double delta = 0.5; // in [0, 1]
    int n_outlier = 10;
    std::uint64_t seed = 0;
};

struct PowerData {
    DataMatrix X;
    Eigen::VectorXi truth;      // true cluster of each row, -1 for planted outliers
    std::vector<int> outliers;  // planted outlier rows, ascending
};

PowerData generate_power_data(const PowerGenSpec& spec);

} // namespace sipipe

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "sipipe/interval.hpp"
#include "sipipe/rng.hpp"

namespace sipipe {

// Row-major flattening: entry (i, j) of an n x d matrix lives at index i*d + j
// of the length-n*d vector. All line and covariance indexing follows it.
Eigen::VectorXd flatten(const Eigen::MatrixXd& X);
Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n, int d);

// Observed data: n samples (rows) by d features (columns), all finite,
// n >= 2 and d >= 1.
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values);

    int n() const { return static_cast<int>(values_.rows()); }
    int d() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& mat() const { return values_; }
    Eigen::VectorXd vec() const { return flatten(values_); }

private:
    Eigen::MatrixXd values_;
};

// Noise covariance over the flattened n*d vector. Four representations:
//   identity-scaled s2*I, dense full, kronecker(row_cov (x) col_cov), and a
//   structural AR(1) form (entry 2^-|i-j| by default) kept implicit so that
//   products and sampling stay O(nd).
class Covariance {
public:
    enum class Kind { IdentityScaled, Full, Kronecker, Ar1 };

    static Covariance identity_scaled(double s2);
    static Covariance full(Eigen::MatrixXd sigma);
    static Covariance kronecker(Eigen::MatrixXd row_cov, Eigen::MatrixXd col_cov);
    // Kronecker with an identity row factor of whatever n the data has.
    static Covariance kronecker_row_identity(Eigen::MatrixXd col_cov);
    static Covariance ar1(double rho = 0.5);

    Kind kind() const { return kind_; }
    double scale() const { return s2_; }

    Eigen::VectorXd mat_vec(const Eigen::VectorXd& v, int n, int d) const;
    double quad_form(const Eigen::VectorXd& v, int n, int d) const;
    // One noise draw ~ N(0, Sigma) as a flattened length-n*d vector.
    Eigen::VectorXd sample(Rng& rng, int n, int d) const;

private:
    Covariance() = default;

    Kind kind_ = Kind::IdentityScaled;
    double s2_ = 1.0;    // identity-scaled
    double rho_ = 0.5;   // ar1
    bool row_identity_ = false;
    Eigen::MatrixXd full_;
    Eigen::MatrixXd full_chol_;
    Eigen::MatrixXd row_cov_, col_cov_;
    Eigen::MatrixXd row_chol_, col_chol_;
};

// The line X(z) = a + b*z through the data space.
struct ParametricLine {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

// Per-node pipeline state: outlier rows, selected features, cluster labels,
// and the running event-interval bounds. Labels: 0 not yet clustered,
// -1 sample-level outlier/noise, 1..K cluster ids.
struct NodeState {
    std::vector<int> outliers;  // ascending
    std::vector<int> features;  // ascending
    Eigen::VectorXi labels;     // length n
    double lo = -kInf;
    double hi = kInf;

    static NodeState initial(int n, int d);
    // Rows not flagged as outliers, ascending.
    std::vector<int> active_rows() const;
    bool is_outlier(int row) const;
};

} // namespace sipipe

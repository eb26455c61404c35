#include "sipipe/types.hpp"

#include <algorithm>
#include <cmath>

#include "sipipe/errors.hpp"

namespace sipipe {

Eigen::VectorXd flatten(const Eigen::MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    Eigen::VectorXd v(static_cast<Eigen::Index>(n) * d);
    for (int i = 0; i < n; ++i) {
        v.segment(static_cast<Eigen::Index>(i) * d, d) = X.row(i).transpose();
    }
    return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n, int d) {
    if (v.size() != static_cast<Eigen::Index>(n) * d) throw EngineError("unflatten: size mismatch");
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
        X.row(i) = v.segment(static_cast<Eigen::Index>(i) * d, d).transpose();
    }
    return X;
}

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 2 || values_.cols() < 1) {
        throw ConfigError("DataMatrix requires n >= 2 samples and d >= 1 features");
    }
    if (!values_.allFinite()) throw ConfigError("DataMatrix contains non-finite values");
}

namespace {

Eigen::MatrixXd psd_cholesky_like(const Eigen::MatrixXd& S, const char* what) {
    if (S.rows() != S.cols()) throw ConfigError(std::string(what) + ": matrix not square");
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ConfigError(std::string(what) + ": matrix not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // Semidefinite fallback via LDLT with negative eigenvalue guard.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success) throw ConfigError(std::string(what) + ": factorization failed");
    Eigen::VectorXd dvec = ldlt.vectorD();
    for (Eigen::Index i = 0; i < dvec.size(); ++i) {
        if (dvec(i) < -1e-9 * scale) throw ConfigError(std::string(what) + ": matrix not positive semidefinite");
        dvec(i) = std::max(dvec(i), 0.0);
    }
    Eigen::MatrixXd L = ldlt.matrixL();
    L = ldlt.transpositionsP().transpose() * L;
    return L * dvec.cwiseSqrt().asDiagonal();
}

// s_i = sum_j rho^|i-j| v_j via forward/backward geometric recursions.
Eigen::VectorXd ar1_mat_vec(const Eigen::VectorXd& v, double rho) {
    const Eigen::Index m = v.size();
    Eigen::VectorXd fwd(m), bwd(m);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        acc = rho * acc + v(i);
        fwd(i) = acc;
    }
    acc = 0.0;
    for (Eigen::Index i = m - 1; i >= 0; --i) {
        bwd(i) = acc;
        acc = rho * (acc + v(i));
    }
    return fwd + bwd;
}

} // namespace

Covariance Covariance::identity_scaled(double s2) {
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw ConfigError("identity-scaled covariance requires s2 > 0");
    Covariance c;
    c.kind_ = Kind::IdentityScaled;
    c.s2_ = s2;
    return c;
}

Covariance Covariance::full(Eigen::MatrixXd sigma) {
    Covariance c;
    c.kind_ = Kind::Full;
    c.full_chol_ = psd_cholesky_like(sigma, "full covariance");
    c.full_ = std::move(sigma);
    return c;
}

Covariance Covariance::kronecker(Eigen::MatrixXd row_cov, Eigen::MatrixXd col_cov) {
    Covariance c;
    c.kind_ = Kind::Kronecker;
    c.row_chol_ = psd_cholesky_like(row_cov, "kronecker row covariance");
    c.col_chol_ = psd_cholesky_like(col_cov, "kronecker column covariance");
    c.row_cov_ = std::move(row_cov);
    c.col_cov_ = std::move(col_cov);
    return c;
}

Covariance Covariance::kronecker_row_identity(Eigen::MatrixXd col_cov) {
    Covariance c;
    c.kind_ = Kind::Kronecker;
    c.row_identity_ = true;
    c.col_chol_ = psd_cholesky_like(col_cov, "kronecker column covariance");
    c.col_cov_ = std::move(col_cov);
    return c;
}

Covariance Covariance::ar1(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("ar1 covariance requires |rho| < 1");
    Covariance c;
    c.kind_ = Kind::Ar1;
    c.rho_ = rho;
    return c;
}

Eigen::VectorXd Covariance::mat_vec(const Eigen::VectorXd& v, int n, int d) const {
    const Eigen::Index nd = static_cast<Eigen::Index>(n) * d;
    if (v.size() != nd) throw EngineError("covariance mat_vec: size mismatch");
    switch (kind_) {
    case Kind::IdentityScaled:
        return s2_ * v;
    case Kind::Full:
        if (full_.rows() != nd) throw ConfigError("full covariance size does not match n*d");
        return full_ * v;
    case Kind::Kronecker: {
        if (col_cov_.rows() != d || (!row_identity_ && row_cov_.rows() != n)) {
            throw ConfigError("kronecker covariance factor sizes do not match (n, d)");
        }
        const Eigen::MatrixXd V = unflatten(v, n, d);
        if (row_identity_) return flatten(V * col_cov_.transpose());
        return flatten(row_cov_ * V * col_cov_.transpose());
    }
    case Kind::Ar1:
        return ar1_mat_vec(v, rho_);
    }
    throw EngineError("covariance mat_vec: unknown kind");
}

double Covariance::quad_form(const Eigen::VectorXd& v, int n, int d) const {
    return v.dot(mat_vec(v, n, d));
}

Eigen::VectorXd Covariance::sample(Rng& rng, int n, int d) const {
    const Eigen::Index nd = static_cast<Eigen::Index>(n) * d;
    Eigen::VectorXd xi(nd);
    for (Eigen::Index i = 0; i < nd; ++i) xi(i) = rng.normal();
    switch (kind_) {
    case Kind::IdentityScaled:
        return std::sqrt(s2_) * xi;
    case Kind::Full:
        if (full_chol_.rows() != nd) throw ConfigError("full covariance size does not match n*d");
        return full_chol_ * xi;
    case Kind::Kronecker: {
        const Eigen::MatrixXd Xi = unflatten(xi, n, d);
        if (row_identity_) return flatten(Xi * col_chol_.transpose());
        return flatten(row_chol_ * Xi * col_chol_.transpose());
    }
    case Kind::Ar1: {
        // Stationary AR(1) over the flattened index has exactly the
        // geometric covariance profile.
        Eigen::VectorXd eps(nd);
        const double innov = std::sqrt(1.0 - rho_ * rho_);
        eps(0) = xi(0);
        for (Eigen::Index i = 1; i < nd; ++i) eps(i) = rho_ * eps(i - 1) + innov * xi(i);
        return eps;
    }
    }
    throw EngineError("covariance sample: unknown kind");
}

NodeState NodeState::initial(int n, int d) {
    NodeState s;
    s.features.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) s.features[static_cast<std::size_t>(j)] = j;
    s.labels = Eigen::VectorXi::Zero(n);
    s.lo = -kInf;
    s.hi = kInf;
    return s;
}

std::vector<int> NodeState::active_rows() const {
    std::vector<int> rows;
    rows.reserve(static_cast<std::size_t>(labels.size()));
    std::size_t oi = 0;
    for (int i = 0; i < labels.size(); ++i) {
        while (oi < outliers.size() && outliers[oi] < i) ++oi;
        if (oi < outliers.size() && outliers[oi] == i) continue;
        rows.push_back(i);
    }
    return rows;
}

bool NodeState::is_outlier(int row) const {
    return std::binary_search(outliers.begin(), outliers.end(), row);
}

} // namespace sipipe

#include <cmath>

#include "components_common.hpp"
#include "sipipe/components.hpp"
#include "sipipe/errors.hpp"
#include "sipipe/kernels.hpp"
#include "sipipe/polyroot.hpp"

namespace sipipe {

using detail::centered_column_stats;
using detail::submatrix;

namespace {

// Unbiased column variances of a materialized submatrix.
Eigen::VectorXd column_variances(const Eigen::MatrixXd& Xs) {
    if (Xs.rows() < 2) throw ConfigError("feature selection: fewer than 2 rows");
    const Eigen::MatrixXd Xc = Xs.rowwise() - Xs.colwise().mean();
    return Xc.colwise().squaredNorm() / static_cast<double>(Xs.rows() - 1);
}

// Pair flags for the correlation rule in cross-multiplied form:
// cov^2 > tau^2 * var_i * var_j. Zero-variance columns never flag.
Eigen::MatrixXd column_covariance(const Eigen::MatrixXd& Xs) {
    const Eigen::MatrixXd Xc = Xs.rowwise() - Xs.colwise().mean();
    return (Xc.transpose() * Xc) / static_cast<double>(Xs.rows() - 1);
}

} // namespace

std::vector<int> variance_fs_observed(const Eigen::MatrixXd& X, double tau, const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(X, active, state.features);
    const Eigen::VectorXd var = column_variances(Xs);
    std::vector<int> kept;
    for (std::size_t j = 0; j < state.features.size(); ++j) {
        if (var(static_cast<Eigen::Index>(j)) > tau) kept.push_back(state.features[j]);
    }
    return kept;
}

ComponentOutput variance_fs_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                       double tau, const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(A + z * B, active, state.features);
    const Eigen::VectorXd var = column_variances(Xs);

    const auto stats = centered_column_stats(submatrix(A, active, state.features),
                                             submatrix(B, active, state.features));

    std::vector<kernels::QuadEvent> events;
    events.reserve(state.features.size());
    ComponentOutput out;
    out.state = state;
    out.state.features.clear();
    for (std::size_t j = 0; j < state.features.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const bool kept = var(jj) > tau;
        if (kept) out.state.features.push_back(state.features[j]);
        // var_j(z) = cbb_jj z^2 + 2 cab_jj z + caa_jj, compared against tau.
        events.push_back({stats.cbb(jj, jj), 2.0 * stats.cab(jj, jj), stats.caa(jj, jj) - tau, !kept});
    }
    out.event = kernels::tightest_interval(events, z);
    return out;
}

std::vector<int> correlation_fs_observed(const Eigen::MatrixXd& X, double tau_corr,
                                         const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(X, active, state.features);
    const Eigen::MatrixXd C = column_covariance(Xs);
    const int dd = static_cast<int>(state.features.size());
    const double t2 = tau_corr * tau_corr;

    std::vector<char> redundant(static_cast<std::size_t>(dd), 0);
    for (int i = 0; i < dd; ++i) {
        for (int j = i + 1; j < dd; ++j) {
            if (C(i, j) * C(i, j) > t2 * C(i, i) * C(j, j)) redundant[static_cast<std::size_t>(j)] = 1;
        }
    }
    std::vector<int> kept;
    for (int j = 0; j < dd; ++j) {
        if (!redundant[static_cast<std::size_t>(j)]) kept.push_back(state.features[static_cast<std::size_t>(j)]);
    }
    return kept;
}

ComponentOutput correlation_fs_parametric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double z,
                                          double tau_corr, const NodeState& state) {
    const std::vector<int> active = state.active_rows();
    const Eigen::MatrixXd Xs = submatrix(A + z * B, active, state.features);
    const Eigen::MatrixXd C = column_covariance(Xs);
    const auto stats = centered_column_stats(submatrix(A, active, state.features),
                                             submatrix(B, active, state.features));
    const int dd = static_cast<int>(state.features.size());
    const double t2 = tau_corr * tau_corr;

    const auto cov_poly = [&](int i, int j) {
        return Polynomial::quadratic(stats.cbb(i, j), stats.cab(i, j) + stats.cab(j, i), stats.caa(i, j));
    };

    double lo = -kInf, hi = kInf;
    std::vector<char> redundant(static_cast<std::size_t>(dd), 0);
    const double ztol = 1e-9 * std::max(1.0, std::abs(z));
    for (int i = 0; i < dd; ++i) {
        for (int j = i + 1; j < dd; ++j) {
            const bool flagged = C(i, j) * C(i, j) > t2 * C(i, i) * C(j, j);
            if (flagged) redundant[static_cast<std::size_t>(j)] = 1;
            // Quartic event: cov_ij(z)^2 - tau^2 var_i(z) var_j(z) <=> 0.
            const Polynomial sij = cov_poly(i, j);
            const Polynomial quart =
                poly_axpy(poly_mul(sij, sij), -t2, poly_mul(cov_poly(i, i), cov_poly(j, j)));
            IntervalSet sol = solve_quartic_leq(quart);
            if (flagged) sol = strict_complement(sol);
            Interval piece{};
            if (sol.empty()) {
                piece = Interval::point(z);
            } else if (auto hit = sol.piece_containing(z, ztol)) {
                piece = *hit;
            } else {
                piece = sol.nearest_piece(z);
            }
            lo = std::max(lo, piece.lo);
            hi = std::min(hi, piece.hi);
        }
    }

    ComponentOutput out;
    out.state = state;
    out.state.features.clear();
    for (int j = 0; j < dd; ++j) {
        if (!redundant[static_cast<std::size_t>(j)]) {
            out.state.features.push_back(state.features[static_cast<std::size_t>(j)]);
        }
    }
    if (lo > hi) {
        out.event = Interval::point(std::clamp(z, hi, lo));
    } else {
        out.event = {lo, hi};
    }
    return out;
}

} // namespace sipipe

#pragma once

// Test-only oracles kept independent of the library code paths they check.

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "sipipe/interval.hpp"

namespace testoracle {

// Largest contiguous region around z (scanned at `step`) on which
// `same_decision(z')` stays true. Endpoints are grid-resolution accurate.
inline sipipe::Interval scan_constancy(const std::function<bool(double)>& same_decision, double z,
                                       double lo, double hi, double step) {
    double left = z, right = z;
    for (double t = z - step; t >= lo; t -= step) {
        if (!same_decision(t)) break;
        left = t;
    }
    for (double t = z + step; t <= hi; t += step) {
        if (!same_decision(t)) break;
        right = t;
    }
    if (left - step < lo && same_decision(lo)) left = -sipipe::kInf;
    if (right + step > hi && same_decision(hi)) right = sipipe::kInf;
    return {left, right};
}

// Textbook density clustering by connected components of the core-point
// graph; border points join the lowest-ordered adjacent component, noise -1.
inline Eigen::VectorXi reference_dbscan(const Eigen::MatrixXd& X, double eps, int min_pts) {
    const int m = static_cast<int>(X.rows());
    const double eps2 = eps * eps;
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if ((X.row(i) - X.row(j)).squaredNorm() <= eps2) nb[static_cast<std::size_t>(i)].push_back(j);
        }
    }
    std::vector<bool> core(static_cast<std::size_t>(m), false);
    for (int i = 0; i < m; ++i) core[static_cast<std::size_t>(i)] = static_cast<int>(nb[static_cast<std::size_t>(i)].size()) >= min_pts;

    Eigen::VectorXi labels = Eigen::VectorXi::Constant(m, -1);
    int next = 0;
    for (int i = 0; i < m; ++i) {
        if (!core[static_cast<std::size_t>(i)] || labels(i) != -1) continue;
        ++next;
        std::vector<int> stack{i};
        labels(i) = next;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : nb[static_cast<std::size_t>(v)]) {
                if (core[static_cast<std::size_t>(w)] && labels(w) == -1) {
                    labels(w) = next;
                    stack.push_back(w);
                }
            }
        }
    }
    for (int i = 0; i < m; ++i) {
        if (core[static_cast<std::size_t>(i)] || labels(i) != -1) continue;
        int best = 0;
        for (int w : nb[static_cast<std::size_t>(i)]) {
            if (core[static_cast<std::size_t>(w)] && (best == 0 || labels(w) < best)) best = labels(w);
        }
        if (best > 0) labels(i) = best;
    }
    return labels;
}

} // namespace testoracle

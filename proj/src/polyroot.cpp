#include "sipipe/polyroot.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "sipipe/errors.hpp"

namespace sipipe {

namespace {

constexpr double kDegreeCollapse = 1e-12; // |lead| <= kDegreeCollapse * max|c_i| drops a degree
constexpr double kRootDedupe = 1e-10;

int effective_degree(const Polynomial& p) {
    const double scale = p.max_abs_coeff();
    if (scale == 0.0) return 0;
    int deg = std::min(p.deg, 4);
    while (deg > 0 && std::abs(p.c[static_cast<std::size_t>(deg)]) <= kDegreeCollapse * scale) --deg;
    return deg;
}

double poly_derivative_eval(const Polynomial& p, int deg, double z) {
    double v = 0.0;
    for (int i = deg; i >= 1; --i) v = v * z + i * p.c[static_cast<std::size_t>(i)];
    return v;
}

// Stable real roots of a*z^2 + b*z + c with a != 0; empty if discriminant < 0.
std::vector<double> quadratic_roots(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b == 0.0 ? 1.0 : b));
    double r1, r2;
    if (q == 0.0) {
        r1 = 0.0;
        r2 = 0.0;
    } else {
        r1 = q / a;
        r2 = c / q;
    }
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

std::vector<double> companion_real_roots(const Polynomial& p, int deg) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    const double lead = p.c[static_cast<std::size_t>(deg)];
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -p.c[static_cast<std::size_t>(i)] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericError("companion eigensolve failed");

    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) {
        const std::complex<double> ev = es.eigenvalues()(i);
        const double scale = std::max(1.0, std::abs(ev.real()));
        if (std::abs(ev.imag()) <= 1e-7 * scale) roots.push_back(ev.real());
    }

    // Three guarded Newton steps per root.
    for (double& r : roots) {
        double x = r;
        double fx = p.eval(x);
        for (int it = 0; it < 3; ++it) {
            const double dfx = poly_derivative_eval(p, deg, x);
            if (dfx == 0.0) break;
            const double x1 = x - fx / dfx;
            if (!std::isfinite(x1)) break;
            const double fx1 = p.eval(x1);
            if (std::abs(fx1) > std::abs(fx)) break;
            x = x1;
            fx = fx1;
        }
        r = x;
    }
    return roots;
}

std::vector<double> dedupe_sorted(std::vector<double> roots) {
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots) {
        if (!out.empty() && r - out.back() <= kRootDedupe * std::max(1.0, std::abs(r))) continue;
        out.push_back(r);
    }
    return out;
}

// Builds {p <= 0} from the sorted distinct roots by midpoint sign probes.
IntervalSet sign_intervals(const Polynomial& p, const std::vector<double>& roots) {
    const double scale = p.max_abs_coeff();
    const auto nonpositive = [&](double z) {
        const double v = p.eval(z);
        return v <= 1e-14 * scale;
    };

    if (roots.empty()) {
        return nonpositive(0.0) ? IntervalSet::all() : IntervalSet();
    }

    std::vector<Interval> out;
    const double step0 = std::max(1.0, std::abs(roots.front()));
    if (nonpositive(roots.front() - step0)) out.push_back({-kInf, roots.front()});
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        const double mid = 0.5 * (roots[i] + roots[i + 1]);
        if (nonpositive(mid)) out.push_back({roots[i], roots[i + 1]});
    }
    const double stepN = std::max(1.0, std::abs(roots.back()));
    if (nonpositive(roots.back() + stepN)) out.push_back({roots.back(), kInf});
    return IntervalSet::from_intervals(std::move(out));
}

} // namespace

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (int i = 0; i <= std::min(deg, 4); ++i) m = std::max(m, std::abs(c[static_cast<std::size_t>(i)]));
    return m;
}

Polynomial poly_mul(const Polynomial& p, const Polynomial& q) {
    if (p.deg + q.deg > 4) throw EngineError("poly_mul: product degree exceeds 4");
    Polynomial out;
    out.deg = p.deg + q.deg;
    for (int i = 0; i <= p.deg; ++i) {
        for (int j = 0; j <= q.deg; ++j) {
            out.c[static_cast<std::size_t>(i + j)] +=
                p.c[static_cast<std::size_t>(i)] * q.c[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

Polynomial poly_axpy(const Polynomial& p, double s, const Polynomial& q) {
    Polynomial out;
    out.deg = std::max(p.deg, q.deg);
    for (int i = 0; i <= 4; ++i) {
        out.c[static_cast<std::size_t>(i)] =
            (i <= p.deg ? p.c[static_cast<std::size_t>(i)] : 0.0) +
            s * (i <= q.deg ? q.c[static_cast<std::size_t>(i)] : 0.0);
    }
    return out;
}

std::vector<double> polynomial_real_roots(const Polynomial& p) {
    for (int i = 0; i <= p.deg; ++i) {
        if (!std::isfinite(p.c[static_cast<std::size_t>(i)])) {
            throw NumericError("polynomial_real_roots: non-finite coefficient");
        }
    }
    const int deg = effective_degree(p);
    switch (deg) {
    case 0:
        return {};
    case 1:
        return {-p.c[0] / p.c[1]};
    case 2:
        return dedupe_sorted(quadratic_roots(p.c[2], p.c[1], p.c[0]));
    default:
        return dedupe_sorted(companion_real_roots(p, deg));
    }
}

IntervalSet solve_quadratic_leq(const Polynomial& p) {
    if (p.deg > 2) throw EngineError("solve_quadratic_leq: degree above 2");
    const int deg = effective_degree(p);
    if (deg == 0) {
        return p.c[0] <= 0.0 || p.max_abs_coeff() == 0.0 ? IntervalSet::all() : IntervalSet();
    }
    if (deg == 1) {
        const double r = -p.c[0] / p.c[1];
        return IntervalSet(p.c[1] > 0.0 ? Interval{-kInf, r} : Interval{r, kInf});
    }
    const auto roots = quadratic_roots(p.c[2], p.c[1], p.c[0]);
    if (p.c[2] > 0.0) {
        if (roots.empty()) return IntervalSet();
        return IntervalSet({roots[0], roots[1]});
    }
    if (roots.empty()) return IntervalSet::all();
    if (roots[1] - roots[0] <= kRootDedupe * std::max(1.0, std::abs(roots[0]))) return IntervalSet::all();
    return interval_union(IntervalSet({-kInf, roots[0]}), IntervalSet({roots[1], kInf}));
}

IntervalSet solve_quartic_leq(const Polynomial& p) {
    if (p.deg > 4) throw EngineError("solve_quartic_leq: degree above 4");
    const int deg = effective_degree(p);
    if (deg <= 2) {
        Polynomial q = p;
        q.deg = deg;
        return solve_quadratic_leq(q);
    }
    Polynomial q = p;
    q.deg = deg;
    const auto roots = dedupe_sorted(companion_real_roots(q, deg));
    return sign_intervals(q, roots);
}

IntervalSet strict_complement(const IntervalSet& s) { return complement_closed(s); }

} // namespace sipipe

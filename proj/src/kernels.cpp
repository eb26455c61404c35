#include "sipipe/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sipipe::kernels {

namespace {
constexpr double kCollapse = 1e-12;

// Stable ascending roots of a*z^2 + b*z + c, a != 0, disc >= 0.
inline void stable_roots(double a, double b, double c, double disc, double& r1, double& r2) {
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b == 0.0 ? 1.0 : b));
    if (q == 0.0) {
        r1 = r2 = 0.0;
        return;
    }
    r1 = q / a;
    r2 = c / q;
    if (r1 > r2) std::swap(r1, r2);
}
} // namespace

Interval quad_event_piece(const QuadEvent& e, double z) {
    // Normalize to q <= 0: the closure of {q > 0} equals {-q <= 0}.
    double a = e.a, b = e.b, c = e.c;
    if (!e.leq) {
        a = -a;
        b = -b;
        c = -c;
    }
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0) return Interval::all();
    if (std::abs(a) <= kCollapse * scale) {
        if (std::abs(b) <= kCollapse * scale) {
            // Constant sign; a positive constant contradicts the query point
            // and collapses the piece.
            return c <= kCollapse * scale ? Interval::all() : Interval::point(z);
        }
        const double r = -c / b;
        return b > 0.0 ? Interval{-kInf, r} : Interval{r, kInf};
    }
    const double disc = b * b - 4.0 * a * c;
    if (a > 0.0) {
        if (disc <= 0.0) {
            const double v = -b / (2.0 * a);
            return Interval::point(v);
        }
        double r1, r2;
        stable_roots(a, b, c, disc, r1, r2);
        return {r1, r2};
    }
    if (disc <= 0.0) return Interval::all();
    double r1, r2;
    stable_roots(a, b, c, disc, r1, r2);
    // Solution set is two rays; take the side z lies on.
    return z <= 0.5 * (r1 + r2) ? Interval{-kInf, r1} : Interval{r2, kInf};
}

Interval tightest_interval(std::span<const QuadEvent> events, double z) {
    double lo = -kInf;
    double hi = kInf;
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(events.size());
#ifdef _OPENMP
    if (omp_get_max_threads() > 1 && m > 2048) {
#pragma omp parallel for reduction(max : lo) reduction(min : hi) schedule(static)
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            const Interval piece = quad_event_piece(events[static_cast<std::size_t>(i)], z);
            lo = std::max(lo, piece.lo);
            hi = std::min(hi, piece.hi);
        }
        if (lo > hi) return Interval::point(std::clamp(z, hi, lo));
        return {lo, hi};
    }
#endif
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        const Interval piece = quad_event_piece(events[static_cast<std::size_t>(i)], z);
        lo = std::max(lo, piece.lo);
        hi = std::min(hi, piece.hi);
    }
    if (lo > hi) {
        // Conflicting constraints can only arise from round-off at a decision
        // boundary; collapse to a point and let the sweep nudge past it.
        return Interval::point(std::clamp(z, hi, lo));
    }
    return {lo, hi};
}

} // namespace sipipe::kernels

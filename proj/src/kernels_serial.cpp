#include <algorithm>
#include <cmath>

#include "sipipe/kernels.hpp"
#include "sipipe/polyroot.hpp"

namespace sipipe::kernels {

// Reference implementation: solve each constraint's full solution set with
// the polynomial machinery, then intersect the pieces containing z.
Interval tightest_interval_serial(std::span<const QuadEvent> events, double z) {
    double lo = -kInf;
    double hi = kInf;
    for (const QuadEvent& e : events) {
        const Polynomial p = Polynomial::quadratic(e.a, e.b, e.c);
        IntervalSet sol = solve_quadratic_leq(p);
        if (!e.leq) sol = strict_complement(sol);
        Interval piece{};
        if (sol.empty()) {
            piece = Interval::point(z);
        } else if (auto hit = sol.piece_containing(z, 1e-9 * std::max(1.0, std::abs(z)))) {
            piece = *hit;
        } else {
            piece = sol.nearest_piece(z);
        }
        lo = std::max(lo, piece.lo);
        hi = std::min(hi, piece.hi);
    }
    if (lo > hi) return Interval::point(std::clamp(z, hi, lo));
    return {lo, hi};
}

} // namespace sipipe::kernels

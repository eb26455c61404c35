#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sipipe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval on the extended real line, lo <= hi. Endpoints may be +-inf;
// no arithmetic is ever performed on infinite endpoints, only comparisons.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    static Interval all() { return {-kInf, kInf}; }
    static Interval point(double x) { return {x, x}; }

    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
    bool bounded() const { return lo > -kInf && hi < kInf; }
    double length() const { return hi - lo; } // +inf when unbounded

    bool operator==(const Interval&) const = default;
};

// Endpoint coalescing tolerance: root solvers report endpoints with ~1e-13
// relative error, so gaps below this are treated as contact.
inline double merge_tolerance(double endpoint) {
    const double a = endpoint < 0 ? -endpoint : endpoint;
    return 1e-12 * (a > 1.0 ? a : 1.0);
}

// Finite union of disjoint closed intervals, sorted by lower endpoint with
// strictly positive gaps between consecutive pieces.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(Interval iv) : pieces_{iv} {}

    // Normalizes an arbitrary collection: sorts, merges overlaps and gaps
    // within the merge tolerance.
    static IntervalSet from_intervals(std::vector<Interval> ivs);
    static IntervalSet all() { return IntervalSet(Interval::all()); }

    bool empty() const { return pieces_.empty(); }
    std::size_t size() const { return pieces_.size(); }
    const std::vector<Interval>& pieces() const { return pieces_; }
    const Interval& piece(std::size_t i) const { return pieces_[i]; }

    bool contains(double x, double tol = 0.0) const;
    std::optional<Interval> piece_containing(double x, double tol = 0.0) const;
    // Piece minimizing the distance to x; set must be nonempty.
    Interval nearest_piece(double x) const;

    // Total length of the bounded pieces (unbounded pieces contribute nothing).
    double finite_measure() const;
    bool has_unbounded_piece() const;

    std::string str() const;

    bool operator==(const IntervalSet&) const = default;

private:
    std::vector<Interval> pieces_;
};

IntervalSet interval_intersect(const IntervalSet& s1, const IntervalSet& s2);
IntervalSet interval_union(const IntervalSet& s1, const IntervalSet& s2);

// Closure of R \ s. Strict and non-strict inequalities produce sets differing
// on a measure-zero boundary, which is irrelevant for a continuous parameter;
// everything is kept closed.
IntervalSet complement_closed(const IntervalSet& s);

} // namespace sipipe

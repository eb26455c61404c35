#include "sipipe/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sipipe/errors.hpp"

namespace sipipe {

IntervalSet IntervalSet::from_intervals(std::vector<Interval> ivs) {
    for (const auto& iv : ivs) {
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) {
            throw EngineError("IntervalSet: invalid interval endpoints");
        }
    }
    std::sort(ivs.begin(), ivs.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });

    IntervalSet out;
    for (const auto& iv : ivs) {
        if (!out.pieces_.empty()) {
            Interval& last = out.pieces_.back();
            const double tol = std::max(merge_tolerance(last.hi), merge_tolerance(iv.lo));
            if (iv.lo <= last.hi + tol) {
                last.hi = std::max(last.hi, iv.hi);
                continue;
            }
        }
        out.pieces_.push_back(iv);
    }
    return out;
}

bool IntervalSet::contains(double x, double tol) const {
    for (const auto& p : pieces_) {
        if (p.contains(x, tol)) return true;
        if (p.lo > x + tol) break;
    }
    return false;
}

std::optional<Interval> IntervalSet::piece_containing(double x, double tol) const {
    const Interval* best = nullptr;
    double best_dist = kInf;
    for (const auto& p : pieces_) {
        if (p.contains(x, tol)) {
            const double d = x < p.lo ? p.lo - x : (x > p.hi ? x - p.hi : 0.0);
            if (d < best_dist) {
                best = &p;
                best_dist = d;
            }
        }
        if (p.lo > x + tol) break;
    }
    if (best) return *best;
    return std::nullopt;
}

Interval IntervalSet::nearest_piece(double x) const {
    if (pieces_.empty()) throw EngineError("nearest_piece on empty IntervalSet");
    const Interval* best = &pieces_.front();
    double best_dist = kInf;
    for (const auto& p : pieces_) {
        const double d = x < p.lo ? p.lo - x : (x > p.hi ? x - p.hi : 0.0);
        if (d < best_dist) {
            best = &p;
            best_dist = d;
        }
        if (d == 0.0) break;
    }
    return *best;
}

double IntervalSet::finite_measure() const {
    double m = 0.0;
    for (const auto& p : pieces_) {
        if (p.bounded()) m += p.length();
    }
    return m;
}

bool IntervalSet::has_unbounded_piece() const {
    for (const auto& p : pieces_) {
        if (!p.bounded()) return true;
    }
    return false;
}

std::string IntervalSet::str() const {
    if (pieces_.empty()) return "{}";
    std::ostringstream os;
    os.precision(12);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (i) os << " u ";
        os << "[" << pieces_[i].lo << ", " << pieces_[i].hi << "]";
    }
    return os.str();
}

IntervalSet interval_intersect(const IntervalSet& s1, const IntervalSet& s2) {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    const auto& a = s1.pieces();
    const auto& b = s2.pieces();
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].lo, b[j].lo);
        const double hi = std::min(a[i].hi, b[j].hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (a[i].hi < b[j].hi) {
            ++i;
        } else {
            ++j;
        }
    }
    return IntervalSet::from_intervals(std::move(out));
}

IntervalSet interval_union(const IntervalSet& s1, const IntervalSet& s2) {
    std::vector<Interval> out;
    out.reserve(s1.size() + s2.size());
    out.insert(out.end(), s1.pieces().begin(), s1.pieces().end());
    out.insert(out.end(), s2.pieces().begin(), s2.pieces().end());
    return IntervalSet::from_intervals(std::move(out));
}

IntervalSet complement_closed(const IntervalSet& s) {
    if (s.empty()) return IntervalSet::all();
    std::vector<Interval> out;
    const auto& ps = s.pieces();
    if (ps.front().lo > -kInf) out.push_back({-kInf, ps.front().lo});
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        out.push_back({ps[i].hi, ps[i + 1].lo});
    }
    if (ps.back().hi < kInf) out.push_back({ps.back().hi, kInf});
    return IntervalSet::from_intervals(std::move(out));
}

} // namespace sipipe

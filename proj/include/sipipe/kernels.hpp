#pragma once

#include <span>

#include "sipipe/interval.hpp"

namespace sipipe::kernels {

// One selection-event constraint: q(z) = a*z^2 + b*z + c, required to stay
// <= 0 (leq) or > 0 (!leq) throughout the event interval. The query z is
// assumed to satisfy the constraint up to round-off.
struct QuadEvent {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool leq = true;
};

// Contiguous piece of the constraint's solution set containing (or nearest
// to) z. Closed; unbounded sides use +-inf.
Interval quad_event_piece(const QuadEvent& e, double z);

// Intersection over all constraints of their piece around z: the tightest
// interval on which every event keeps its observed sign. OpenMP max/min
// reduction over the constraint span.
Interval tightest_interval(std::span<const QuadEvent> events, double z);

// Serial reference: full interval-set solve per constraint, then the piece
// containing z. Independent code path kept for tests and the benchmark.
Interval tightest_interval_serial(std::span<const QuadEvent> events, double z);

} // namespace sipipe::kernels

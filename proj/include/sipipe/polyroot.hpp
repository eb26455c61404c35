#pragma once

#include <array>
#include <vector>

#include "sipipe/interval.hpp"

namespace sipipe {

// Dense real polynomial of degree <= 4; c[i] multiplies z^i. The nominal
// degree may exceed the effective one (leading coefficients near zero);
// solvers collapse the degree themselves.
struct Polynomial {
    std::array<double, 5> c{};
    int deg = 0;

    static Polynomial constant(double c0) { return {{c0, 0, 0, 0, 0}, 0}; }
    static Polynomial linear(double c1, double c0) { return {{c0, c1, 0, 0, 0}, 1}; }
    static Polynomial quadratic(double c2, double c1, double c0) { return {{c0, c1, c2, 0, 0}, 2}; }

    double eval(double z) const {
        double v = 0.0;
        for (int i = deg; i >= 0; --i) v = v * z + c[static_cast<std::size_t>(i)];
        return v;
    }
    double max_abs_coeff() const;
};

// Product of two polynomials; degrees must sum to <= 4.
Polynomial poly_mul(const Polynomial& p, const Polynomial& q);
// p - s*q, degree = max(deg p, deg q).
Polynomial poly_axpy(const Polynomial& p, double s, const Polynomial& q);

// Real roots, ascending, near-duplicates (within 1e-10 absolute-relative)
// collapsed to one representative.
std::vector<double> polynomial_real_roots(const Polynomial& p);

// {z : p(z) <= 0} for degree <= 2. Degree collapse handled: |lead| below
// 1e-12 * max|c_i| drops a degree; the all-constant case resolves by sign.
IntervalSet solve_quadratic_leq(const Polynomial& p);

// {z : p(z) <= 0} for degree <= 4. Roots from the companion matrix with
// Newton polish; sign on each inter-root segment decided at its midpoint.
IntervalSet solve_quartic_leq(const Polynomial& p);

// Closure of R \ s; the solution set of the matching strict '>' inequality
// up to a measure-zero boundary.
IntervalSet strict_complement(const IntervalSet& s);

} // namespace sipipe

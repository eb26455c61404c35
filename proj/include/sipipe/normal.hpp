#pragma once

#include <vector>

namespace sipipe {

// Standard normal tail machinery. All masses can be taken in log space so
// that regions many standard deviations out stay representable.

double normal_cdf(double x);
double normal_sf(double x); // upper tail, underflows past ~x = 38

// log P(N(0,1) >= x), valid for any x (asymptotic series for large x).
double log_normal_sf(double x);

// P(a <= N(0,1) <= b), b >= a, stable straddling zero.
double normal_mass(double a, double b);

// log P(a <= N(0,1) <= b); -inf for zero mass.
double log_normal_mass(double a, double b);

double normal_quantile(double p);

// log(exp(la) - exp(lb)) for la >= lb.
double log_diff_exp(double la, double lb);

// log(sum exp(l_i)) with ascending-sorted accumulation.
double log_sum_exp(std::vector<double> logs);

} // namespace sipipe

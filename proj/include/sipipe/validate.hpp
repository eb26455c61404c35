#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sipipe/inference.hpp"
#include "sipipe/pipeline_graph.hpp"
#include "sipipe/polyroot.hpp"
#include "sipipe/rng.hpp"

namespace sipipe {

// ---- Independent oracles ----
// These deliberately avoid the code paths they check: masses by adaptive
// quadrature instead of tail formulas, roots by grid sign sweep plus
// bisection instead of companion matrices.

double quadrature_normal_mass(double a, double b);
double tn_cdf_oracle(double t, const TruncatedNormal& tn);
std::vector<double> sign_sweep_roots(const Polynomial& p, double lo, double hi, int grid_points);

// ---- Random test instances ----

struct RandomInstance {
    PipelineGraph graph;
    Eigen::MatrixXd X;
    Eigen::MatrixXd A, B; // line, unflattened
    double z = 0.0;
};

// Random valid pipeline over random small data with data-calibrated
// hyperparameters, plus a generic line through the data.
RandomInstance random_instance(Rng& rng);

// ---- Property drivers ----

struct PropertyStats {
    int trials = 0;
    int violations = 0;
    double worst = 0.0;
    std::string detail;
};

// Fixed-point property of the parametric pass: re-running at any point of a
// returned interval reproduces the identical interval and output.
PropertyStats check_update_fixed_point(std::uint64_t seed, int instances, int reps_per_instance);

// Membership property of the swept region: the plain pipeline at X(z)
// matches the observed output exactly iff z lies in the region.
PropertyStats check_masked_run(std::uint64_t seed, int tests, int per_side);

PropertyStats check_tn_quadrature(std::uint64_t seed, int cases, double tol);
PropertyStats check_quartic_signsweep(std::uint64_t seed, int cases, double tol);
PropertyStats check_decompose_reconstruction(std::uint64_t seed, int cases, double tol);
PropertyStats check_kernels_match(std::uint64_t seed, int cases, double tol);

struct ValidationItem {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    bool all_pass() const;
};

// The property suites at CLI scale; `scale` multiplies every trial count.
ValidationReport run_validation(std::uint64_t seed, int scale = 1);

} // namespace sipipe

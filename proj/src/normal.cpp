#include "sipipe/normal.hpp"

#include <algorithm>
#include <cmath>

#include "sipipe/errors.hpp"
#include "sipipe/interval.hpp"

namespace sipipe {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
} // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_normal_sf(double x) {
    if (std::isnan(x)) throw NumericError("log_normal_sf: NaN argument");
    if (x < 0.0) {
        // sf(x) = 1 - sf(-x), with sf(-x) <= 1/2.
        return std::log1p(-normal_sf(-x));
    }
    if (x <= 30.0) {
        return std::log(0.5 * std::erfc(x * kInvSqrt2));
    }
    // sf(x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8), x > 30.
    const double x2 = x * x;
    const double inv2 = 1.0 / x2;
    const double series = inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)));
    return -0.5 * x2 - std::log(x) - kLogSqrt2Pi + std::log1p(series);
}

double log_diff_exp(double la, double lb) {
    if (lb == -kInf) return la;
    if (la < lb) throw NumericError("log_diff_exp: la < lb");
    const double d = lb - la;
    const double e = std::exp(d);
    if (e >= 1.0) return -kInf;
    return la + std::log1p(-e);
}

double normal_mass(double a, double b) {
    if (b < a) return 0.0;
    if (a >= 0.0) return normal_sf(a) - normal_sf(b);
    if (b <= 0.0) return normal_sf(-b) - normal_sf(-a);
    // Straddles zero: erf is accurate near the origin and the two terms add.
    return 0.5 * (std::erf(b * kInvSqrt2) + std::erf(-a * kInvSqrt2));
}

double log_normal_mass(double a, double b) {
    if (b < a) return -kInf;
    if (a >= 0.0) {
        const double la = log_normal_sf(a);
        const double lb = b == kInf ? -kInf : log_normal_sf(b);
        return log_diff_exp(la, lb);
    }
    if (b <= 0.0) {
        return log_normal_mass(-b, -a);
    }
    return std::log(normal_mass(a, b));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("normal_quantile: p outside (0,1)");
    // Acklam's rational approximation, polished by one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double log_sum_exp(std::vector<double> logs) {
    logs.erase(std::remove_if(logs.begin(), logs.end(), [](double v) { return v == -kInf; }), logs.end());
    if (logs.empty()) return -kInf;
    std::sort(logs.begin(), logs.end());
    const double m = logs.back();
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - m);
    return m + std::log(acc);
}

} // namespace sipipe

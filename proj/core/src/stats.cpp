#include "mlsep/stats.hpp"

#include <algorithm>

namespace mlsep {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
    // Acklam's algorithm
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double two_proportion_z(long long k1, long long n1, long long k2, long long n2) {
    if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("two_proportion_z: empty sample");
    const double p1 = static_cast<double>(k1) / n1;
    const double p2 = static_cast<double>(k2) / n2;
    const double pp = static_cast<double>(k1 + k2) / (n1 + n2);
    const double var = pp * (1 - pp) * (1.0 / n1 + 1.0 / n2);
    if (var == 0) return p1 == p2 ? 0 : std::numeric_limits<double>::infinity();
    return (p1 - p2) / std::sqrt(var);
}

void apply_bonferroni(std::vector<ZTest>& tests, double alpha) {
    if (tests.empty()) return;
    const double thresh = normal_two_sided_threshold(alpha / tests.size());
    for (auto& t : tests) t.significant = std::abs(t.z) > thresh;
}

}  // namespace mlsep

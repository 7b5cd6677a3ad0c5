#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsep {

struct MeanStderr {
    double mean = 0;
    double stderr_ = 0;  // standard error of the mean
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr m;
    m.n = xs.size();
    if (m.n == 0) return m;
    double s = 0;
    for (double x : xs) s += x;
    m.mean = s / m.n;
    if (m.n < 2) return m;
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / (m.n - 1) / m.n);
    return m;
}

// standard normal quantile (Acklam's rational approximation, |eps| < 1.15e-9)
double normal_quantile(double p);

inline double normal_two_sided_threshold(double alpha) { return normal_quantile(1.0 - alpha / 2.0); }

// z statistic for the difference of two independent sample means; 0 when both
// spreads vanish and the means agree, +-inf when they differ
inline double two_sample_z(const MeanStderr& a, const MeanStderr& b) {
    const double denom = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
    const double diff = a.mean - b.mean;
    if (denom == 0) {
        if (diff == 0) return 0;
        return diff > 0 ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
    }
    return diff / denom;
}

// pooled two-proportion z statistic for counts k1/n1 vs k2/n2
double two_proportion_z(long long k1, long long n1, long long k2, long long n2);

struct ZTest {
    std::string name;
    double value0 = 0, value1 = 0;
    double z = 0;
    bool significant = false;
};

// applies the Bonferroni-corrected two-sided threshold at level alpha
void apply_bonferroni(std::vector<ZTest>& tests, double alpha);

}  // namespace mlsep

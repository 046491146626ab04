#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "homp/errors.hpp"

namespace homp {

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the pooled
// sample, computed by sorted merge.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw config_error("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d_max = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] == x) ++ia;
        while (ib < b.size() && b[ib] == x) ++ib;
        // CDF difference from integer counts: exactly 0 for identical samples
        const double diff = static_cast<double>(ia) / na - static_cast<double>(ib) / nb;
        d_max = std::max(d_max, std::abs(diff));
    }
    return d_max;
}

// Large-sample two-sided critical value: c(alpha) * sqrt((n+m)/(n*m)) with
// c(alpha) = sqrt(-ln(alpha/2) / 2); c(0.01) ~= 1.628.
inline double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("ks_critical_value: alpha must be in (0,1)");
    if (n == 0 || m == 0) throw config_error("ks_critical_value: empty sample");
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return c * std::sqrt((nn + mm) / (nn * mm));
}

struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
};

inline MeanStdErr mean_std_error(const std::vector<double>& xs) {
    if (xs.empty()) throw config_error("mean_std_error: empty sample");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace homp

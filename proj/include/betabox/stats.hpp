#pragma once

// Small statistics toolbox: Kolmogorov-Smirnov tests (one and two sample),
// chi-square goodness of fit, and the special functions they need. The
// p-values use the asymptotic Kolmogorov distribution with the usual
// small-sample correction (Stephens), which is accurate to a few percent
// for n >= 100, plenty for the acceptance thresholds used here. Reference
// values in the tests come from SciPy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <betabox/errors.hpp>

namespace betabox::stats {

// Survival function of the Kolmogorov distribution,
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_q(double x) {
    if (x <= 0.0) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * x * x);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// Regularized upper incomplete gamma Q(a, x), series for x < a + 1 and
// continued fraction (modified Lentz) otherwise.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw OutOfRangeInput("gamma_q needs a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) series, return 1 - P
        double term = 1.0 / a, sum = term, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

// chi-square survival function with k degrees of freedom
inline double chi2_sf(double stat, int dof) { return gamma_q(0.5 * dof, 0.5 * stat); }

struct KsResult {
    double statistic = 0.0;  // sup |F_emp - F|
    double p_value = 1.0;
};

// One-sample KS against a CDF callable. Sorts a copy of the data.
inline KsResult ks_test(std::vector<double> data, const std::function<double(double)>& cdf) {
    if (data.empty()) throw OutOfRangeInput("KS test needs data");
    std::sort(data.begin(), data.end());
    const double n = double(data.size());
    double d = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double f = cdf(data[i]);
        d = std::max(d, std::max(double(i + 1) / n - f, f - double(i) / n));
    }
    double sn = std::sqrt(n);
    return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

// Two-sample KS with the effective-size correction.
inline KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw OutOfRangeInput("KS test needs data");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    double ne = double(a.size()) * double(b.size()) / double(a.size() + b.size());
    double sn = std::sqrt(ne);
    return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

struct Chi2Result {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Goodness of fit of observed counts against expected counts.
inline Chi2Result chi2_test(const std::vector<double>& observed, const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw DimensionMismatch("chi-square test needs matching, nonempty count vectors");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw OutOfRangeInput("expected counts must be positive");
        double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    int dof = int(observed.size()) - 1;
    return {stat, dof, chi2_sf(stat, dof)};
}

}  // namespace betabox::stats

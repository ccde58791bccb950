#pragma once

// Kolmogorov-Smirnov statistics with the asymptotic Kolmogorov p-value
// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2), x = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace ks {

inline double kolmogorov_q(double x)
{
    if (x < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double p_value(double d, double n_eff)
{
    const double rn = std::sqrt(n_eff);
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

inline double one_sample_statistic(std::vector<double> x, const std::function<double(double)>& cdf)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

inline double one_sample(std::vector<double> x, const std::function<double(double)>& cdf)
{
    const double n = static_cast<double>(x.size());
    return p_value(one_sample_statistic(std::move(x), cdf), n);
}

inline double two_sample(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return p_value(d, na * nb / (na + nb));
}

}  // namespace ks

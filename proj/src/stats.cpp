#include "zirec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zirec/errors.hpp"

namespace zirec {

double log_sum_exp(std::span<const double> x)
{
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : x) hi = std::max(hi, v);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double v : x) acc += std::exp(v - hi);
    return hi + std::log(acc);
}

double log_add_exp(double a, double b)
{
    if (a < b) std::swap(a, b);
    if (a == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

double quantile_sorted(std::span<const double> sorted, double prob)
{
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability outside [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double logistic(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_logistic(double x)
{
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double log_normal_kernel(double x, double variance)
{
    return -0.5 * x * x / variance;
}

double log_gamma_density(double x, double shape, double rate)
{
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace zirec

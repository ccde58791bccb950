#include "zirec/dp_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zirec/errors.hpp"

namespace zirec {

namespace {

constexpr double kMinOneMinusStick = 1e-12;

}  // namespace

std::vector<double> stick_to_weights(std::span<const double> raw_sticks, std::size_t truncation)
{
    if (truncation == 0) throw ConfigError("truncation level must be >= 1");
    if (raw_sticks.size() + 1 != truncation) throw ConfigError("expected K - 1 raw sticks");
    std::vector<double> w(truncation);
    double remaining = 1.0;
    for (std::size_t k = 0; k + 1 < truncation; ++k) {
        const double v = raw_sticks[k];
        if (!(v > 0.0 && v < 1.0)) throw DomainError("raw stick outside (0,1)");
        w[k] = v * remaining;
        remaining *= 1.0 - v;
    }
    w[truncation - 1] = remaining;
    return w;
}

std::vector<double> posterior_stick_update(std::span<const int> counts, double concentration, Rng& rng)
{
    if (counts.empty()) throw ConfigError("truncation level must be >= 1");
    if (!(concentration > 0.0)) throw DomainError("concentration must be positive");
    long long tail = 0;
    for (int c : counts) {
        if (c < 0) throw ContractViolation("negative assignment count");
        tail += c;
    }
    std::vector<double> sticks(counts.size() - 1);
    for (std::size_t l = 0; l + 1 < counts.size(); ++l) {
        tail -= counts[l];
        double v = rng.beta(1.0 + counts[l], concentration + static_cast<double>(tail));
        // Beta draws can round to the boundary for extreme counts.
        v = std::clamp(v, std::numeric_limits<double>::min(), 1.0 - kMinOneMinusStick);
        sticks[l] = v;
    }
    return sticks;
}

std::size_t sample_assignment(std::span<const double> log_scores, Rng& rng)
{
    double hi = -std::numeric_limits<double>::infinity();
    for (double s : log_scores) hi = std::max(hi, s);
    if (!std::isfinite(hi)) throw DegenerateDistribution("all assignment scores are -inf");
    double total = 0.0;
    for (double s : log_scores) total += std::exp(s - hi);
    double target = rng.uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < log_scores.size(); ++k) {
        const double p = std::exp(log_scores[k] - hi);
        if (p <= 0.0) continue;
        last_positive = k;
        if (target < p) return k;
        target -= p;
    }
    return last_positive;
}

double update_concentration(std::span<const double> raw_sticks, double a, double b, Rng& rng)
{
    double rate = b;
    for (double v : raw_sticks) rate -= std::log(std::max(1.0 - v, kMinOneMinusStick));
    return rng.gamma(a + static_cast<double>(raw_sticks.size()), rate);
}

TruncatedDP draw_stick_prior(std::size_t truncation, std::size_t num_units, double concentration, Rng& rng)
{
    TruncatedDP dp;
    dp.concentration = concentration;
    dp.raw_sticks.resize(truncation - 1);
    for (auto& v : dp.raw_sticks)
        v = std::clamp(rng.beta(1.0, concentration), std::numeric_limits<double>::min(), 1.0 - kMinOneMinusStick);
    dp.weights = stick_to_weights(dp.raw_sticks, truncation);
    dp.atoms.assign(truncation, 0.0);
    std::vector<double> log_w(truncation);
    for (std::size_t k = 0; k < truncation; ++k) log_w[k] = std::log(dp.weights[k]);
    dp.assignments.resize(num_units);
    for (auto& a : dp.assignments) a = static_cast<int>(sample_assignment(log_w, rng));
    return dp;
}

}  // namespace zirec

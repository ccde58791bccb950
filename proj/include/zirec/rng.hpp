#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace zirec {

/// Random stream for one chain or replicate. Streams derived from the same
/// (seed, stream index) pair are identical.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform on the open interval (0, 1).
    double uniform()
    {
        double u;
        do {
            u = std::generate_canonical<double, 53>(engine_);
        } while (u <= 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

    double gamma(double shape, double rate)
    {
        std::gamma_distribution<double> d(shape, 1.0 / rate);
        return d(engine_);
    }

    double inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

    double beta(double a, double b)
    {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential() { return -std::log(uniform()); }

    std::uint64_t index(std::uint64_t n)
    {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace zirec

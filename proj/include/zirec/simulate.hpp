#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "zirec/baseline.hpp"
#include "zirec/model.hpp"
#include "zirec/rng.hpp"
#include "zirec/sampler.hpp"

namespace zirec {

struct SimConfig {
    std::size_t num_participants = 600;
    std::size_t num_clusters = 20;
    BaselineVariant baseline = BaselineVariant::piecewise;
    std::vector<double> levels{2.0, 2.3, 2.1, 2.4, 1.7};
    double weibull_shape = 1.5;

    void validate() const;
};

/// Generating values and every drawn latent.
struct SimTruth {
    std::vector<double> beta{0.4, 0.3, 0.2};
    std::vector<double> alpha{0.2, 0.3, 0.4};
    double alpha0 = 0.15;
    double xi1 = 0.1;
    double xi2 = -0.5;
    std::vector<double> zeta{1.0, 1.0, 1.0, 1.0};
    double log_gamma_variance = 0.3;  // gamma ~ LN(0, 0.3), 0.3 read as the variance of log gamma
    std::vector<double> mu_means{-0.4, -0.2, 0.0, 0.2, 0.4};  // equal weights
    double mu_sd = 0.1;
    std::vector<double> kappa_values{0.7, 2.2, 5.2, 8.2};  // drawn uniformly
    double censoring_prob = 0.5;                          // P(Delta = 0)
    double covariate_sd = 0.1;
    BaselineHazard baseline;

    std::vector<double> mu;  // per cluster
    std::vector<double> gamma;
    std::vector<double> kappa;
    std::vector<std::uint8_t> unsusceptible;
    std::vector<double> p_unsusceptible;
    std::vector<double> terminal_time;  // uncensored R
};

/// NHPP with intensity c * lambda0(t) on (0, horizon] by inversion of Lambda0.
std::vector<double> sample_piecewise_nhpp(double rate_multiplier, const BaselineHazard& baseline, double horizon,
                                          Rng& rng);

struct TerminalLatents {
    std::vector<double> z;
    double gamma = 1.0;
    double mu = 0.0;
    double kappa = 1.0;
};

/// exp(alpha0 + alpha'Z + xi1 log gamma + xi2 mu + eps / kappa), eps = log(-log U).
double simulate_terminal_time(const TerminalLatents& latents, const SimTruth& truth, Rng& rng);

/// Equal cluster sizes; recurrent events are zeroed for D = 1. The generating
/// piecewise grid is the quintile grid of the observed follow-up times.
std::pair<Dataset, SimTruth> simulate_dataset(const SimConfig& config, std::uint64_t seed);

}  // namespace zirec

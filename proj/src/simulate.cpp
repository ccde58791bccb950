#include "zirec/simulate.hpp"

#include <cmath>

#include "zirec/errors.hpp"
#include "zirec/likelihood.hpp"
#include "zirec/stats.hpp"

namespace zirec {

void SimConfig::validate() const
{
    if (num_participants == 0 || num_clusters == 0) throw ConfigError("simulation needs N > 0 and J > 0");
    if (num_participants % num_clusters != 0) throw ConfigError("N must be divisible by J");
    if (baseline == BaselineVariant::piecewise && levels.empty()) throw ConfigError("piecewise levels are empty");
    for (double l : levels)
        if (!(l > 0.0)) throw ConfigError("piecewise levels must be positive");
    if (!(weibull_shape > 0.0)) throw ConfigError("Weibull shape must be positive");
}

std::vector<double> sample_piecewise_nhpp(double rate_multiplier, const BaselineHazard& baseline, double horizon,
                                          Rng& rng)
{
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    std::vector<double> times;
    if (!(rate_multiplier > 0.0)) return times;
    const double limit = rate_multiplier * baseline.cumulative(horizon);
    double s = rng.exponential();
    while (s <= limit) {
        times.push_back(std::min(baseline.inverse_cumulative(s / rate_multiplier), horizon));
        s += rng.exponential();
    }
    return times;
}

double simulate_terminal_time(const TerminalLatents& latents, const SimTruth& truth, Rng& rng)
{
    if (!(latents.kappa > 0.0) || !(latents.gamma > 0.0)) throw DomainError("kappa and gamma must be positive");
    const double eps = std::log(-std::log(rng.uniform()));
    const double loc = truth.alpha0 + linear_predictor(truth.alpha, latents.z) + truth.xi1 * std::log(latents.gamma) +
                       truth.xi2 * latents.mu;
    return std::exp(loc + eps / latents.kappa);
}

std::pair<Dataset, SimTruth> simulate_dataset(const SimConfig& config, std::uint64_t seed)
{
    config.validate();
    Rng rng(seed);
    SimTruth truth;
    const std::size_t n = config.num_participants;
    const std::size_t J = config.num_clusters;
    const std::size_t per_cluster = n / J;

    truth.mu.resize(J);
    for (auto& m : truth.mu) {
        const double centre = truth.mu_means[rng.index(truth.mu_means.size())];
        m = rng.normal(centre, truth.mu_sd);
    }

    std::vector<ParticipantRecord> records(n);
    truth.gamma.resize(n);
    truth.kappa.resize(n);
    truth.unsusceptible.resize(n);
    truth.p_unsusceptible.resize(n);
    truth.terminal_time.resize(n);
    const double sd = truth.covariate_sd;
    for (std::size_t i = 0; i < n; ++i) {
        ParticipantRecord& r = records[i];
        r.cluster = static_cast<int>(i / per_cluster);
        r.participant = static_cast<int>(i % per_cluster);
        r.z = {rng.normal(0.0, sd), rng.normal(0.0, sd), rng.normal(0.0, sd)};
        r.x = {r.z[0], r.z[1], rng.normal(0.0, sd)};
        r.u = {r.x[0], r.x[1], r.x[2], r.z[2]};

        truth.gamma[i] = std::exp(rng.normal(0.0, std::sqrt(truth.log_gamma_variance)));
        truth.kappa[i] = truth.kappa_values[rng.index(truth.kappa_values.size())];
        truth.p_unsusceptible[i] = logistic(linear_predictor(truth.zeta, r.u));
        truth.unsusceptible[i] = rng.bernoulli(truth.p_unsusceptible[i]) ? 1 : 0;

        const TerminalLatents latents{r.z, truth.gamma[i], truth.mu[static_cast<std::size_t>(r.cluster)],
                                      truth.kappa[i]};
        const double R = simulate_terminal_time(latents, truth, rng);
        truth.terminal_time[i] = R;
        const bool censored = rng.bernoulli(truth.censoring_prob);
        r.event_indicator = censored ? 0 : 1;
        r.followup_time = censored ? rng.uniform(0.0, R) : R;
    }

    if (config.baseline == BaselineVariant::piecewise) {
        std::vector<double> followup(n);
        for (std::size_t i = 0; i < n; ++i) followup[i] = records[i].followup_time;
        auto grid = quantile_grid(followup, config.levels.size());
        if (grid.size() != config.levels.size() + 1) throw DegenerateDistribution("simulated follow-up grid collapsed");
        truth.baseline = BaselineHazard::piecewise(std::move(grid), config.levels);
    } else {
        truth.baseline = BaselineHazard::power_law(config.weibull_shape);
    }

    for (std::size_t i = 0; i < n; ++i) {
        ParticipantRecord& r = records[i];
        const double c = truth.gamma[i] * std::exp(linear_predictor(truth.beta, r.x) +
                                                   truth.mu[static_cast<std::size_t>(r.cluster)]);
        auto times = sample_piecewise_nhpp(c, truth.baseline, r.followup_time, rng);
        if (!truth.unsusceptible[i]) r.recurrent_times = std::move(times);
    }
    return {Dataset::create(std::move(records), J, 3, 3, 4), truth};
}

}  // namespace zirec

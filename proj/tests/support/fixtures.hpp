#pragma once

#include <cmath>
#include <vector>

#include "zirec/model.hpp"
#include "zirec/rng.hpp"

namespace fixtures {

inline zirec::TruncatedDP single_atom(double value, std::size_t units)
{
    return zirec::TruncatedDP{{value}, {}, {1.0}, std::vector<int>(units, 0), 1.0};
}

/// gamma = 1, coefficients 0, mu = 0, kappa = 1, everyone susceptible.
inline zirec::ParamState neutral_state(const zirec::Dataset& d, zirec::BaselineHazard baseline)
{
    zirec::ParamState s;
    s.beta.assign(d.dim_x(), 0.0);
    s.alpha.assign(d.dim_z(), 0.0);
    s.gamma.assign(d.size(), 1.0);
    s.tau2.assign(d.num_clusters(), 1.0);
    s.mu_dp = single_atom(0.0, d.num_clusters());
    s.kappa_dp = single_atom(1.0, d.size());
    s.unsusceptible.assign(d.size(), 0);
    s.baseline = std::move(baseline);
    return s;
}

inline zirec::ParticipantRecord record(int cluster, int id, double followup, int delta, std::vector<double> times,
                                       std::vector<double> x = {}, std::vector<double> z = {},
                                       std::vector<double> u = {})
{
    zirec::ParticipantRecord r;
    r.cluster = cluster;
    r.participant = id;
    r.followup_time = followup;
    r.event_indicator = delta;
    r.recurrent_times = std::move(times);
    r.x = std::move(x);
    r.z = std::move(z);
    r.u = std::move(u);
    return r;
}

/// Random tiny dataset and state: 1-3 clusters of 1-3 participants, 0-4 events each,
/// multi-atom mixtures, random baseline of either variant.
struct Instance {
    zirec::Dataset data;
    zirec::ParamState state;
};

inline Instance random_instance(zirec::Rng& rng)
{
    const std::size_t J = 1 + rng.index(3);
    const std::size_t dx = 2, dz = 2, du = 1;
    std::vector<zirec::ParticipantRecord> recs;
    for (std::size_t j = 0; j < J; ++j) {
        const std::size_t nj = 1 + rng.index(3);
        for (std::size_t k = 0; k < nj; ++k) {
            const double R = rng.uniform(0.2, 3.0);
            std::vector<double> times(rng.index(5));
            for (auto& t : times) t = rng.uniform(0.0, R);
            std::sort(times.begin(), times.end());
            std::vector<double> x{rng.normal(), rng.normal()}, z{rng.normal(), rng.normal()}, u{rng.normal()};
            recs.push_back(record(static_cast<int>(j), static_cast<int>(k), R, rng.bernoulli(0.5) ? 1 : 0, times, x, z, u));
        }
    }
    Instance inst;
    inst.data = zirec::Dataset::create(recs, J, dx, dz, du);
    const std::size_t n = inst.data.size();
    zirec::ParamState& s = inst.state;
    s.beta = {rng.normal(0, 0.5), rng.normal(0, 0.5)};
    s.alpha = {rng.normal(0, 0.5), rng.normal(0, 0.5)};
    s.alpha0 = rng.normal(0, 0.5);
    s.xi1 = rng.normal(0, 0.5);
    s.xi2 = rng.normal(0, 0.5);
    s.gamma.resize(n);
    for (auto& g : s.gamma) g = std::exp(rng.normal(0, 0.5));
    s.tau2.assign(J, 1.0);
    s.mu_dp.atoms = {rng.normal(0, 0.5), rng.normal(0, 0.5)};
    s.mu_dp.raw_sticks = {0.5};
    s.mu_dp.weights = {0.5, 0.5};
    for (std::size_t j = 0; j < J; ++j) s.mu_dp.assignments.push_back(static_cast<int>(rng.index(2)));
    s.kappa_dp.atoms = {rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)};
    s.kappa_dp.raw_sticks = {0.4, 0.5};
    s.kappa_dp.weights = {0.4, 0.3, 0.3};
    for (std::size_t i = 0; i < n; ++i) s.kappa_dp.assignments.push_back(static_cast<int>(rng.index(3)));
    s.unsusceptible.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (inst.data[i].event_count() == 0) s.unsusceptible[i] = rng.bernoulli(0.5) ? 1 : 0;
    if (rng.bernoulli(0.5)) {
        std::vector<double> grid{0.0};
        for (int g = 0; g < 3; ++g) grid.push_back(grid.back() + rng.uniform(0.2, 0.8));
        s.baseline = zirec::BaselineHazard::piecewise(grid, {rng.uniform(0.5, 3), rng.uniform(0.5, 3), rng.uniform(0.5, 3)});
    } else {
        s.baseline = zirec::BaselineHazard::power_law(rng.uniform(0.6, 2.5));
    }
    return inst;
}

}  // namespace fixtures

#include "zirec/simulate.hpp"

namespace fixtures {

/// Parameter state at the generating values: one mu atom per cluster, one kappa atom per value.
inline zirec::ParamState truth_state(const zirec::Dataset& d, const zirec::SimTruth& t)
{
    zirec::ParamState s;
    s.beta = t.beta;
    s.alpha = t.alpha;
    s.alpha0 = t.alpha0;
    s.xi1 = t.xi1;
    s.xi2 = t.xi2;
    s.zeta = t.zeta;
    s.gamma = t.gamma;
    s.tau2.assign(d.num_clusters(), t.log_gamma_variance);
    const std::size_t J = d.num_clusters();
    s.mu_dp.atoms = t.mu;
    s.mu_dp.raw_sticks.resize(J - 1);
    for (std::size_t k = 0; k + 1 < J; ++k) s.mu_dp.raw_sticks[k] = 1.0 / static_cast<double>(J - k);
    s.mu_dp.weights.assign(J, 1.0 / static_cast<double>(J));
    for (std::size_t j = 0; j < J; ++j) s.mu_dp.assignments.push_back(static_cast<int>(j));
    const std::size_t K = t.kappa_values.size();
    s.kappa_dp.atoms = t.kappa_values;
    s.kappa_dp.raw_sticks.resize(K - 1);
    for (std::size_t k = 0; k + 1 < K; ++k) s.kappa_dp.raw_sticks[k] = 1.0 / static_cast<double>(K - k);
    s.kappa_dp.weights.assign(K, 1.0 / static_cast<double>(K));
    for (double kappa : t.kappa) {
        const auto it = std::find(t.kappa_values.begin(), t.kappa_values.end(), kappa);
        s.kappa_dp.assignments.push_back(static_cast<int>(it - t.kappa_values.begin()));
    }
    s.unsusceptible = t.unsusceptible;
    s.baseline = t.baseline;
    return s;
}

}  // namespace fixtures

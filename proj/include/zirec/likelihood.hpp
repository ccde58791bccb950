#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "zirec/model.hpp"

namespace zirec {

/// corrected: the terminal factor multiplies both susceptibility branches.
/// literal:   the terminal factor is dropped for unsusceptible participants with no events.
enum class LikelihoodMode { corrected, literal };

double linear_predictor(std::span<const double> coef, std::span<const double> cov);

/// Scalar building blocks shared by the evaluators below and by the sampler caches.
namespace kernel {

/// Delta * log h(t) + log H(t) for the Weibull AFT terminal model, written in terms of
/// the scaled log time w = log t - (alpha0 + alpha'Z + xi2 mu) - xi1 log gamma:
/// log H = -exp(kappa w), log h = log kappa - log t + kappa w.
inline double terminal(int delta, double log_t, double kappa, double log_kappa, double w)
{
    const double kw = kappa * w;
    return (delta != 0 ? (log_kappa - log_t + kw) : 0.0) - std::exp(kw);
}

/// Recurrent-process log likelihood of a susceptible participant:
/// sum_k log lambda_ij(T_k) + log S_ij(R), with log_rate = log gamma + beta'X + mu.
inline double recurrent(std::size_t events, double log_rate, double sum_log_baseline, double cumulative_hazard)
{
    return static_cast<double>(events) * log_rate + sum_log_baseline - std::exp(log_rate) * cumulative_hazard;
}

}  // namespace kernel

// Evaluators for participant `index` of the dataset that `record` belongs to.

double recurrent_log_intensity(double t, const ParticipantRecord& record, const ParamState& state,
                               std::size_t index);

/// log S_ij(R~); zero for an unsusceptible participant (S = 1).
double recurrent_log_survival(const ParticipantRecord& record, const ParamState& state, std::size_t index);

double terminal_log_hazard(double t, const ParticipantRecord& record, const ParamState& state, std::size_t index);
double terminal_log_survival(double t, const ParticipantRecord& record, const ParamState& state,
                             std::size_t index);
double terminal_log_density(double t, const ParticipantRecord& record, const ParamState& state,
                            std::size_t index);

/// Observed-data log likelihood of one participant given D. The Bernoulli prior on D is excluded.
double participant_log_likelihood(const ParticipantRecord& record, const ParamState& state, std::size_t index,
                                  LikelihoodMode mode = LikelihoodMode::corrected);

/// Sum over records in index order.
double total_log_likelihood(const Dataset& data, const ParamState& state,
                            LikelihoodMode mode = LikelihoodMode::corrected);

/// Log likelihood with D integrated out under P(D = 1) = p_unsusceptible.
/// p_unsusceptible = 0 gives the model without structural zeros.
double marginal_participant_log_likelihood(const ParticipantRecord& record, const ParamState& state,
                                           std::size_t index, double p_unsusceptible,
                                           LikelihoodMode mode = LikelihoodMode::corrected);

}  // namespace zirec

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zirec/sampler.hpp"

namespace zirec {

struct PosteriorSummary {
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
};

/// Mean, sd and type-7 quantiles of a draw sequence. Throws on an empty input.
PosteriorSummary posterior_summary(std::span<const double> draws);
/// Pools the named column over all chains.
PosteriorSummary posterior_summary(std::span<const ChainTrace> chains, std::string_view column);

/// Classic PSRF sqrt(((n-1)/n W + B/n) / W). Returns 1 when every chain is constant.
double gelman_rubin_psrf(std::span<const std::vector<double>> chains);
double gelman_rubin_psrf(std::span<const ChainTrace> chains, std::string_view column);
/// PSRF of the total log-likelihood series.
double loglik_psrf(std::span<const ChainTrace> chains);

struct CpoResult {
    std::vector<double> log_cpo;
    double lpml = 0.0;
};

/// Harmonic-mean CPO from a draws x participants row-major matrix:
/// log CPO_i = log S - logsumexp_s(-l_is). Non-finite entries throw naming draw and participant.
CpoResult cpo_lpml(std::span<const double> loglik, std::size_t num_draws, std::size_t num_participants);
/// Per-chain reduction that chains combine exactly: logsumexp_s(-l_is) per participant.
struct CpoPartial {
    std::vector<double> neg_loglik_lse;
    std::size_t draws = 0;
};
CpoPartial cpo_partial(const ChainTrace& chain);
CpoResult combine_cpo(std::span<const CpoPartial> parts);
/// Pools all chains through their partials.
CpoResult cpo_lpml(std::span<const ChainTrace> chains);

struct ReplicateEstimate {
    std::string name;
    PosteriorSummary summary;
    double truth = 0.0;
};

struct AggregateRow {
    std::string name;
    double truth = 0.0;
    double mean = 0.0;      // average posterior mean
    double bias = 0.0;      // percent of truth, or absolute when truth == 0
    bool bias_absolute = false;
    double coverage = 0.0;  // fraction of 95% intervals containing truth
    std::size_t replicates = 0;
};

/// One row per parameter name, in first-seen order. Each replicate lists its estimates;
/// all replicates must agree on the truth of a parameter.
std::vector<AggregateRow> replicate_aggregate(std::span<const std::vector<ReplicateEstimate>> replicates);

}  // namespace zirec

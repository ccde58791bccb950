#include "zirec/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "zirec/errors.hpp"
#include "zirec/stats.hpp"

namespace zirec {

namespace {

double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean)
{
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

PosteriorSummary posterior_summary(std::span<const double> draws)
{
    if (draws.empty()) throw ContractViolation("posterior summary of an empty trace");
    PosteriorSummary s;
    s.mean = mean_of(draws);
    s.sd = std::sqrt(variance_of(draws, s.mean));
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    s.q025 = quantile_sorted(sorted, 0.025);
    s.q50 = quantile_sorted(sorted, 0.5);
    s.q975 = quantile_sorted(sorted, 0.975);
    return s;
}

PosteriorSummary posterior_summary(std::span<const ChainTrace> chains, std::string_view column)
{
    std::vector<double> pooled;
    for (const auto& c : chains) {
        const auto v = c.column(column);
        pooled.insert(pooled.end(), v.begin(), v.end());
    }
    return posterior_summary(pooled);
}

double gelman_rubin_psrf(std::span<const std::vector<double>> chains)
{
    if (chains.size() < 2) throw ContractViolation("PSRF needs at least two chains");
    const std::size_t n = chains.front().size();
    if (n < 2) throw ContractViolation("PSRF needs chains of length >= 2");
    for (const auto& c : chains)
        if (c.size() != n) throw ContractViolation("PSRF chains differ in length");

    const auto m = static_cast<double>(chains.size());
    const auto nd = static_cast<double>(n);
    std::vector<double> means;
    double W = 0.0;
    for (const auto& c : chains) {
        means.push_back(mean_of(c));
        W += variance_of(c, means.back());
    }
    W /= m;
    if (W == 0.0) return 1.0;
    const double grand = mean_of(means);
    double B = 0.0;
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= nd / (m - 1.0);
    return std::sqrt(((nd - 1.0) / nd * W + B / nd) / W);
}

double gelman_rubin_psrf(std::span<const ChainTrace> chains, std::string_view column)
{
    std::vector<std::vector<double>> series;
    for (const auto& c : chains) series.push_back(c.column(column));
    return gelman_rubin_psrf(series);
}

double loglik_psrf(std::span<const ChainTrace> chains)
{
    std::vector<std::vector<double>> series;
    for (const auto& c : chains) series.push_back(c.total_loglik);
    return gelman_rubin_psrf(series);
}

CpoResult cpo_lpml(std::span<const double> loglik, std::size_t num_draws, std::size_t num_participants)
{
    if (num_draws == 0) throw ContractViolation("CPO needs at least one draw");
    if (loglik.size() != num_draws * num_participants) throw ContractViolation("log-likelihood matrix has wrong size");
    CpoResult out;
    out.log_cpo.resize(num_participants);
    std::vector<double> neg(num_draws);
    const double log_s = std::log(static_cast<double>(num_draws));
    for (std::size_t i = 0; i < num_participants; ++i) {
        for (std::size_t s = 0; s < num_draws; ++s) {
            const double l = loglik[s * num_participants + i];
            if (!std::isfinite(l))
                throw DegenerateDistribution("non-finite log likelihood at draw " + std::to_string(s) +
                                             ", participant " + std::to_string(i));
            neg[s] = -l;
        }
        out.log_cpo[i] = log_s - log_sum_exp(neg);
    }
    // Summing in sorted order keeps LPML independent of participant order.
    std::vector<double> sorted = out.log_cpo;
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) out.lpml += v;
    return out;
}

CpoPartial cpo_partial(const ChainTrace& chain)
{
    const std::size_t n = chain.num_participants;
    if (chain.num_draws == 0) throw ContractViolation("CPO needs at least one draw");
    if (chain.participant_loglik.size() != chain.num_draws * n)
        throw ContractViolation("chain does not store participant log likelihoods");
    CpoPartial part;
    part.draws = chain.num_draws;
    part.neg_loglik_lse.resize(n);
    std::vector<double> neg(chain.num_draws);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < chain.num_draws; ++s) {
            const double l = chain.participant_loglik[s * n + i];
            if (!std::isfinite(l))
                throw DegenerateDistribution("non-finite log likelihood at draw " + std::to_string(s) +
                                             ", participant " + std::to_string(i));
            neg[s] = -l;
        }
        part.neg_loglik_lse[i] = log_sum_exp(neg);
    }
    return part;
}

CpoResult combine_cpo(std::span<const CpoPartial> parts)
{
    if (parts.empty()) throw ContractViolation("CPO needs at least one chain");
    const std::size_t n = parts.front().neg_loglik_lse.size();
    std::size_t draws = 0;
    for (const auto& p : parts) {
        if (p.neg_loglik_lse.size() != n) throw ContractViolation("chains disagree on the participant count");
        draws += p.draws;
    }
    CpoResult out;
    out.log_cpo.resize(n);
    const double log_s = std::log(static_cast<double>(draws));
    std::vector<double> terms(parts.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < parts.size(); ++c) terms[c] = parts[c].neg_loglik_lse[i];
        out.log_cpo[i] = log_s - log_sum_exp(terms);
    }
    std::vector<double> sorted = out.log_cpo;
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) out.lpml += v;
    return out;
}

CpoResult cpo_lpml(std::span<const ChainTrace> chains)
{
    std::vector<CpoPartial> parts;
    for (const auto& c : chains) parts.push_back(cpo_partial(c));
    return combine_cpo(parts);
}

std::vector<AggregateRow> replicate_aggregate(std::span<const std::vector<ReplicateEstimate>> replicates)
{
    std::vector<AggregateRow> rows;
    std::map<std::string, std::size_t, std::less<>> index;
    for (const auto& rep : replicates) {
        for (const auto& e : rep) {
            auto it = index.find(e.name);
            if (it == index.end()) {
                it = index.emplace(e.name, rows.size()).first;
                rows.push_back({e.name, e.truth});
            }
            AggregateRow& row = rows[it->second];
            if (row.truth != e.truth) throw ContractViolation("replicates disagree on the truth of " + e.name);
            row.mean += e.summary.mean;
            row.coverage += (e.summary.q025 <= e.truth && e.truth <= e.summary.q975) ? 1.0 : 0.0;
            ++row.replicates;
        }
    }
    for (auto& row : rows) {
        const auto r = static_cast<double>(row.replicates);
        row.mean /= r;
        row.coverage /= r;
        row.bias_absolute = row.truth == 0.0;
        row.bias = row.bias_absolute ? row.mean - row.truth : 100.0 * (row.mean - row.truth) / row.truth;
    }
    return rows;
}

}  // namespace zirec

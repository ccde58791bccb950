#include "zirec/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "zirec/errors.hpp"
#include "zirec/stats.hpp"

namespace zirec {

namespace {

double terminal_scaled_log_time(double t, const ParticipantRecord& r, const ParamState& s, std::size_t i)
{
    const double lin = s.alpha0 + linear_predictor(s.alpha, r.z) + s.xi2 * s.mu(static_cast<std::size_t>(r.cluster));
    return std::log(t) - lin - s.xi1 * std::log(s.gamma[i]);
}

double recurrent_log_rate(const ParticipantRecord& r, const ParamState& s, std::size_t i)
{
    return std::log(s.gamma[i]) + linear_predictor(s.beta, r.x) + s.mu(static_cast<std::size_t>(r.cluster));
}

void require_positive_time(double t)
{
    if (!(t > 0.0)) throw DomainError("event time must be positive");
}

// Recurrent part for a susceptible participant: events plus survival at follow-up.
double recurrent_part(const ParticipantRecord& r, const ParamState& s, std::size_t i)
{
    double sum_log_baseline = 0.0;
    for (double t : r.recurrent_times) sum_log_baseline += s.baseline.log_hazard(t);
    return kernel::recurrent(r.event_count(), recurrent_log_rate(r, s, i), sum_log_baseline,
                             s.baseline.cumulative(r.followup_time));
}

double terminal_part(const ParticipantRecord& r, const ParamState& s, std::size_t i)
{
    const double kappa = s.kappa(i);
    return kernel::terminal(r.event_indicator, std::log(r.followup_time), kappa, std::log(kappa),
                            terminal_scaled_log_time(r.followup_time, r, s, i));
}

}  // namespace

double linear_predictor(std::span<const double> coef, std::span<const double> cov)
{
    if (coef.size() != cov.size()) throw ConfigError("coefficient and covariate dimensions differ");
    return std::inner_product(coef.begin(), coef.end(), cov.begin(), 0.0);
}

double recurrent_log_intensity(double t, const ParticipantRecord& record, const ParamState& state, std::size_t index)
{
    require_positive_time(t);
    if (state.unsusceptible[index]) throw ContractViolation("recurrent intensity is zero for an unsusceptible participant");
    return recurrent_log_rate(record, state, index) + state.baseline.log_hazard(t);
}

double recurrent_log_survival(const ParticipantRecord& record, const ParamState& state, std::size_t index)
{
    if (state.unsusceptible[index]) return 0.0;
    return -std::exp(recurrent_log_rate(record, state, index)) * state.baseline.cumulative(record.followup_time);
}

double terminal_log_hazard(double t, const ParticipantRecord& record, const ParamState& state, std::size_t index)
{
    require_positive_time(t);
    const double kappa = state.kappa(index);
    return std::log(kappa) - std::log(t) + kappa * terminal_scaled_log_time(t, record, state, index);
}

double terminal_log_survival(double t, const ParticipantRecord& record, const ParamState& state, std::size_t index)
{
    require_positive_time(t);
    return -std::exp(state.kappa(index) * terminal_scaled_log_time(t, record, state, index));
}

double terminal_log_density(double t, const ParticipantRecord& record, const ParamState& state, std::size_t index)
{
    return terminal_log_hazard(t, record, state, index) + terminal_log_survival(t, record, state, index);
}

double participant_log_likelihood(const ParticipantRecord& record, const ParamState& state, std::size_t index,
                                  LikelihoodMode mode)
{
    const bool unsusceptible = state.unsusceptible[index] != 0;
    if (unsusceptible && record.event_count() > 0)
        throw ContractViolation("unsusceptible participant has recurrent events");
    if (unsusceptible) return mode == LikelihoodMode::literal ? 0.0 : terminal_part(record, state, index);
    return terminal_part(record, state, index) + recurrent_part(record, state, index);
}

double total_log_likelihood(const Dataset& data, const ParamState& state, LikelihoodMode mode)
{
    if (data.empty()) return 0.0;
    state.validate(data);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) total += participant_log_likelihood(data[i], state, i, mode);
    return total;
}

double marginal_participant_log_likelihood(const ParticipantRecord& record, const ParamState& state,
                                           std::size_t index, double p_unsusceptible, LikelihoodMode mode)
{
    const double terminal = terminal_part(record, state, index);
    const double susceptible = terminal + recurrent_part(record, state, index);
    if (record.event_count() > 0 || p_unsusceptible <= 0.0)
        return std::log1p(-p_unsusceptible) + susceptible;
    const double structural_zero = mode == LikelihoodMode::literal ? 0.0 : terminal;
    return log_add_exp(std::log(p_unsusceptible) + structural_zero, std::log1p(-p_unsusceptible) + susceptible);
}

}  // namespace zirec

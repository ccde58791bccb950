#include "zirec/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "zirec/dp_mixture.hpp"
#include "zirec/errors.hpp"
#include "zirec/stats.hpp"

namespace zirec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string participant_label(const ParticipantRecord& r)
{
    return "(cluster " + std::to_string(r.cluster) + ", participant " + std::to_string(r.participant) + ")";
}

double sum_squares(std::span<const double> v)
{
    return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

// Uniform weights over n atoms expressed as raw sticks v_k = 1 / (n - k).
std::vector<double> uniform_sticks(std::size_t n)
{
    std::vector<double> v(n > 0 ? n - 1 : 0);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 / static_cast<double>(n - k);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Names and parsing

std::string_view to_string(ModelVariant v)
{
    switch (v) {
    case ModelVariant::bmz_dp: return "BMZ-DP";
    case ModelVariant::bm_dp: return "BM-DP";
    case ModelVariant::bz_dp: return "BZ-DP";
    case ModelVariant::bmz: return "BMZ";
    }
    return "?";
}

std::string_view to_string(BaselineVariant v)
{
    return v == BaselineVariant::piecewise ? "piecewise" : "powerlaw";
}

std::string_view to_string(LikelihoodMode m)
{
    return m == LikelihoodMode::corrected ? "corrected" : "literal";
}

ModelVariant parse_model_variant(std::string_view s)
{
    for (auto v : {ModelVariant::bmz_dp, ModelVariant::bm_dp, ModelVariant::bz_dp, ModelVariant::bmz})
        if (s == to_string(v)) return v;
    throw ConfigError("unknown model variant '" + std::string(s) + "'");
}

BaselineVariant parse_baseline_variant(std::string_view s)
{
    if (s == "piecewise") return BaselineVariant::piecewise;
    if (s == "powerlaw" || s == "power-law" || s == "weibull") return BaselineVariant::power_law;
    throw ConfigError("unknown baseline variant '" + std::string(s) + "'");
}

LikelihoodMode parse_likelihood_mode(std::string_view s)
{
    if (s == "corrected") return LikelihoodMode::corrected;
    if (s == "literal") return LikelihoodMode::literal;
    throw ConfigError("unknown likelihood mode '" + std::string(s) + "'");
}

bool has_zero_inflation(ModelVariant v) { return v != ModelVariant::bm_dp; }
bool has_cluster_effect(ModelVariant v) { return v != ModelVariant::bz_dp; }
bool has_cluster_dp(ModelVariant v) { return v == ModelVariant::bmz_dp || v == ModelVariant::bm_dp; }

std::string_view block_name(Block b)
{
    static constexpr std::array<std::string_view, kNumBlocks> names{
        "beta", "alpha", "alpha0", "gamma", "eta", "baseline", "theta", "xi1", "xi2", "zeta"};
    return names[static_cast<std::size_t>(b)];
}

double target_acceptance(Block b)
{
    return (b == Block::beta || b == Block::alpha || b == Block::zeta) ? 0.30 : 0.44;
}

void ProposalScales::validate() const
{
    for (double r : rho)
        if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("proposal scales must be positive");
}

void McmcConfig::validate() const
{
    if (!(burn_in < iterations)) throw ConfigError("burn_in must be smaller than iterations");
    if (thin < 1) throw ConfigError("thin must be >= 1");
    if (chains < 1) throw ConfigError("chains must be >= 1");
    if (adapt_window < 1) throw ConfigError("adapt_window must be >= 1");
    initial_scales.validate();
}

std::size_t ChainTrace::column_index(std::string_view name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("trace has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

bool ChainTrace::has_column(std::string_view name) const
{
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> ChainTrace::column(std::string_view name) const
{
    const std::size_t c = column_index(name);
    std::vector<double> out(num_draws);
    for (std::size_t d = 0; d < num_draws; ++d) out[d] = at(d, c);
    return out;
}

// ---------------------------------------------------------------------------
// Generic steps

MhOutcome mh_step(double& value, double current_log_target, double scale,
                  const std::function<double(double)>& log_target, Rng& rng, Support support)
{
    if (!std::isfinite(current_log_target)) throw ContractViolation("MH target is not finite at the current state");
    const double proposal = value + scale * rng.normal();
    if (support == Support::positive && !(proposal > 0.0)) return {false, current_log_target};
    const double proposed_target = log_target(proposal);
    if (std::log(rng.uniform()) < proposed_target - current_log_target) {
        value = proposal;
        return {true, proposed_target};
    }
    return {false, current_log_target};
}

MhOutcome mh_step(double& value, double scale, const std::function<double(double)>& log_target, Rng& rng,
                  Support support)
{
    return mh_step(value, log_target(value), scale, log_target, rng, support);
}

MhOutcome mh_step(std::vector<double>& value, double current_log_target, double scale,
                  const std::function<double(std::span<const double>)>& log_target, Rng& rng)
{
    if (!std::isfinite(current_log_target)) throw ContractViolation("MH target is not finite at the current state");
    std::vector<double> proposal(value.size());
    for (std::size_t k = 0; k < value.size(); ++k) proposal[k] = value[k] + scale * rng.normal();
    const double proposed_target = log_target(proposal);
    if (std::log(rng.uniform()) < proposed_target - current_log_target) {
        value = std::move(proposal);
        return {true, proposed_target};
    }
    return {false, current_log_target};
}

double gibbs_tau2(std::span<const double> cluster_gammas, double a0, double b0, Rng& rng)
{
    double ss = 0.0;
    for (double g : cluster_gammas) {
        if (!(g > 0.0)) throw ContractViolation("frailty must be positive");
        const double lg = std::log(g);
        ss += lg * lg;
    }
    return rng.inverse_gamma(a0 + 0.5 * static_cast<double>(cluster_gammas.size()), b0 + 0.5 * ss);
}

double susceptibility_probability(std::size_t event_count, double p_unsusceptible, double recurrent_log_survival,
                                  double literal_terminal_term)
{
    if (event_count > 0) return 0.0;
    const double l1 = std::log(p_unsusceptible);
    const double l0 = std::log1p(-p_unsusceptible) + recurrent_log_survival + literal_terminal_term;
    return std::exp(l1 - log_add_exp(l1, l0));
}

int gibbs_susceptibility(const ParticipantRecord& record, const ParamState& state, std::size_t index,
                         double p_unsusceptible, LikelihoodMode mode, Rng& rng)
{
    if (record.event_count() > 0) return 0;
    ParamState susceptible = state;
    susceptible.unsusceptible[index] = 0;
    const double log_surv = recurrent_log_survival(record, susceptible, index);
    double literal_term = 0.0;
    if (mode == LikelihoodMode::literal) {
        const double t = record.followup_time;
        literal_term = terminal_log_survival(t, record, state, index) +
                       (record.event_indicator ? terminal_log_hazard(t, record, state, index) : 0.0);
    }
    return rng.bernoulli(susceptibility_probability(0, p_unsusceptible, log_surv, literal_term)) ? 1 : 0;
}

double adapt_scale(double acceptance_rate, double scale, double target)
{
    return std::clamp(scale * std::exp(0.5 * (acceptance_rate - target)), 1e-8, 1e8);
}

// ---------------------------------------------------------------------------
// GibbsSampler

struct GibbsSampler::ClusterTerms {
    double events = 0.0;        // sum of Q over members
    double rate_mass = 0.0;     // sum over susceptible members of exp(log gamma + beta'X) Lambda0(R)
    double delta_kappa = 0.0;   // sum of Delta * kappa over members with a terminal factor
    std::vector<std::pair<double, double>> shape_mass;  // (kappa, sum exp(kappa w0)) per shape atom
};

GibbsSampler::GibbsSampler(const Dataset& data, McmcConfig config, Hyperparams hyper, std::uint64_t chain)
    : data_(&data), config_(std::move(config)), hyper_(std::move(hyper)), rng_(config_.seed, chain)
{
    config_.validate();
    hyper_.validate();
    scales_ = config_.initial_scales;
    build_static_caches();
    initialize_from_prior();
    refresh_all_caches();
    check_initial_likelihood();
}

GibbsSampler::GibbsSampler(const Dataset& data, McmcConfig config, Hyperparams hyper, ParamState initial, Rng rng)
    : data_(&data), config_(std::move(config)), hyper_(std::move(hyper)), state_(std::move(initial)),
      rng_(std::move(rng))
{
    config_.validate();
    hyper_.validate();
    scales_ = config_.initial_scales;
    build_static_caches();
    if (!data.empty()) state_.validate(data);
    refresh_all_caches();
    check_initial_likelihood();
}

void GibbsSampler::build_static_caches()
{
    const Dataset& d = *data_;
    n_ = d.size();
    log_t_.resize(n_);
    sum_log_times_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        log_t_[i] = std::log(d[i].followup_time);
        double s = 0.0;
        for (double t : d[i].recurrent_times) s += std::log(t);
        sum_log_times_[i] = s;
    }
    const bool logistic = has_zero_inflation(config_.variant) && !hyper_.fixed_p;
    dim_zeta_ = logistic ? d.dim_u() + (hyper_.u_intercept ? 1 : 0) : 0;
    u_design_.assign(n_ * dim_zeta_, 0.0);
    for (std::size_t i = 0; i < n_ && dim_zeta_ > 0; ++i) {
        std::size_t c = 0;
        if (hyper_.u_intercept) u_design_[i * dim_zeta_ + c++] = 1.0;
        for (double v : d[i].u) u_design_[i * dim_zeta_ + c++] = v;
    }
}

void GibbsSampler::initialize_from_prior()
{
    const Dataset& d = *data_;
    const std::size_t J = d.num_clusters();
    auto jitter = [&](std::size_t dim) {
        std::vector<double> v(dim);
        for (auto& x : v) x = rng_.normal(0.0, 0.1);
        return v;
    };
    state_.beta = jitter(d.dim_x());
    state_.alpha = jitter(d.dim_z());
    state_.alpha0 = rng_.normal(0.0, 0.1);
    state_.xi1 = rng_.normal(0.0, 0.1);
    state_.xi2 = rng_.normal(0.0, 0.1);
    state_.zeta = jitter(dim_zeta_);
    state_.sigma2_beta = 1.0;
    state_.sigma2_alpha = 1.0;

    state_.tau2.resize(J);
    for (auto& t : state_.tau2) t = rng_.inverse_gamma(hyper_.a_tau, hyper_.b_tau);
    // Frailties start at the prior median. Prior draws under a wide tau^2 can start the chain
    // thousands of log-likelihood units away, from where beta drifts along the frailty ridge.
    state_.gamma.assign(n_, 1.0);

    const double sd_mu = std::sqrt(hyper_.sigma2_mu);
    switch (config_.variant) {
    case ModelVariant::bmz_dp:
    case ModelVariant::bm_dp: {
        const double phi = rng_.gamma(hyper_.a_phi, hyper_.b_phi);
        state_.mu_dp = draw_stick_prior(hyper_.resolved_mu_truncation(J), J, phi, rng_);
        for (auto& a : state_.mu_dp.atoms) a = rng_.normal(0.0, sd_mu);
        break;
    }
    case ModelVariant::bmz: {
        TruncatedDP& m = state_.mu_dp;
        m.atoms.resize(J);
        for (auto& a : m.atoms) a = rng_.normal(0.0, sd_mu);
        m.raw_sticks = uniform_sticks(J);
        m.weights.assign(J, J > 0 ? 1.0 / static_cast<double>(J) : 0.0);
        m.assignments.resize(J);
        std::iota(m.assignments.begin(), m.assignments.end(), 0);
        break;
    }
    case ModelVariant::bz_dp:
        state_.mu_dp = TruncatedDP{{0.0}, {}, {1.0}, std::vector<int>(J, 0), 1.0};
        break;
    }

    const double phi0 = rng_.gamma(hyper_.a_phi, hyper_.b_phi);
    state_.kappa_dp = draw_stick_prior(hyper_.resolved_kappa_truncation(n_), n_, phi0, rng_);
    for (auto& a : state_.kappa_dp.atoms) a = rng_.gamma(hyper_.a_kappa, hyper_.b_kappa);

    if (config_.baseline == BaselineVariant::piecewise) {
        const auto grid = quantile_grid(d.pooled_event_times(), hyper_.grid_count);
        double events = 0.0;
        double exposure = 0.0;
        for (const auto& r : d.records()) {
            events += static_cast<double>(r.event_count());
            exposure += r.followup_time;
        }
        const double crude = events > 0.0 ? events / exposure : 1.0;
        std::vector<double> levels(grid.size() - 1);
        for (auto& l : levels) l = crude * std::exp(rng_.normal(0.0, 0.1));
        state_.baseline = BaselineHazard::piecewise(grid, std::move(levels));
    } else {
        state_.baseline = BaselineHazard::power_law(rng_.gamma(hyper_.a_psi, hyper_.b_psi));
    }

    // D needs p, which needs zeta.
    state_.unsusceptible.assign(n_, 0);
    log_p_.assign(n_, kNegInf);
    log_1mp_.assign(n_, 0.0);
    refresh_susceptibility_probs();
    if (has_zero_inflation(config_.variant))
        for (std::size_t i = 0; i < n_; ++i)
            if (d[i].event_count() == 0) state_.unsusceptible[i] = rng_.bernoulli(std::exp(log_p_[i])) ? 1 : 0;
}

void GibbsSampler::refresh_susceptibility_probs()
{
    log_p_.assign(n_, kNegInf);
    log_1mp_.assign(n_, 0.0);
    if (!has_zero_inflation(config_.variant)) return;
    for (std::size_t i = 0; i < n_; ++i) {
        if (hyper_.fixed_p) {
            log_p_[i] = std::log(*hyper_.fixed_p);
            log_1mp_[i] = std::log1p(-*hyper_.fixed_p);
        } else {
            const double eta = linear_predictor(state_.zeta, {u_design_.data() + i * dim_zeta_, dim_zeta_});
            log_p_[i] = log_logistic(eta);
            log_1mp_[i] = log_logistic(-eta);
        }
    }
}

void GibbsSampler::refresh_all_caches()
{
    const Dataset& d = *data_;
    lin_x_.resize(n_);
    lin_z_.resize(n_);
    log_gamma_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        lin_x_[i] = linear_predictor(state_.beta, d[i].x);
        lin_z_[i] = linear_predictor(state_.alpha, d[i].z);
        log_gamma_[i] = std::log(state_.gamma[i]);
    }
    levels_ = state_.baseline.num_levels();
    if (state_.baseline.is_piecewise()) {
        interval_counts_.assign(n_ * levels_, 0);
        interval_exposure_.assign(n_ * levels_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (double t : d[i].recurrent_times) ++interval_counts_[i * levels_ + state_.baseline.interval_of(t)];
            const auto e = state_.baseline.exposure(d[i].followup_time);
            std::copy(e.begin(), e.end(), interval_exposure_.begin() + static_cast<std::ptrdiff_t>(i * levels_));
        }
    }
    refresh_baseline_caches();
    refresh_susceptibility_probs();
}

void GibbsSampler::refresh_baseline_caches()
{
    sum_log_baseline_.resize(n_);
    cumhaz_.resize(n_);
    if (state_.baseline.is_piecewise()) {
        std::vector<double> log_levels(levels_);
        for (std::size_t g = 0; g < levels_; ++g) log_levels[g] = std::log(state_.baseline.level(g));
        for (std::size_t i = 0; i < n_; ++i) {
            double slb = 0.0;
            double ch = 0.0;
            for (std::size_t g = 0; g < levels_; ++g) {
                slb += interval_counts_[i * levels_ + g] * log_levels[g];
                ch += state_.baseline.level(g) * interval_exposure_[i * levels_ + g];
            }
            sum_log_baseline_[i] = slb;
            cumhaz_[i] = ch;
        }
    } else {
        const double psi = state_.baseline.shape();
        const double log_psi = std::log(psi);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto q = static_cast<double>((*data_)[i].event_count());
            sum_log_baseline_[i] = q * log_psi + (psi - 1.0) * sum_log_times_[i];
            cumhaz_[i] = std::exp(psi * log_t_[i]);
        }
    }
}

void GibbsSampler::check_initial_likelihood() const
{
    for (std::size_t i = 0; i < n_; ++i)
        if (!std::isfinite(participant_ll(i)))
            throw DataError("non-finite initial log likelihood for " + participant_label((*data_)[i]));
}

bool GibbsSampler::terminal_active(std::size_t i) const
{
    return config_.likelihood_mode == LikelihoodMode::corrected || state_.unsusceptible[i] == 0;
}

double GibbsSampler::scaled_log_time(std::size_t i) const
{
    const auto j = static_cast<std::size_t>((*data_)[i].cluster);
    return log_t_[i] - state_.alpha0 - lin_z_[i] - state_.xi2 * state_.mu(j) - state_.xi1 * log_gamma_[i];
}

double GibbsSampler::terminal_ll(std::size_t i, double w, double kappa) const
{
    return kernel::terminal((*data_)[i].event_indicator, log_t_[i], kappa, std::log(kappa), w);
}

double GibbsSampler::log_rate(std::size_t i) const
{
    const auto j = static_cast<std::size_t>((*data_)[i].cluster);
    return log_gamma_[i] + lin_x_[i] + state_.mu(j);
}

double GibbsSampler::recurrent_ll(std::size_t i, double rate) const
{
    return kernel::recurrent((*data_)[i].event_count(), rate, sum_log_baseline_[i], cumhaz_[i]);
}

double GibbsSampler::participant_ll(std::size_t i) const
{
    double ll = terminal_active(i) ? terminal_ll(i, scaled_log_time(i), state_.kappa(i)) : 0.0;
    if (!state_.unsusceptible[i]) ll += recurrent_ll(i, log_rate(i));
    return ll;
}

double GibbsSampler::conditional_loglik() const
{
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) total += participant_ll(i);
    return total;
}

double GibbsSampler::p_unsusceptible(std::size_t i) const
{
    return std::exp(log_p_[i]);
}

void GibbsSampler::marginal_loglik(std::span<double> out) const
{
    const bool corrected = config_.likelihood_mode == LikelihoodMode::corrected;
    for (std::size_t i = 0; i < n_; ++i) {
        const double term = terminal_ll(i, scaled_log_time(i), state_.kappa(i));
        const double susceptible = log_1mp_[i] + term + recurrent_ll(i, log_rate(i));
        if ((*data_)[i].event_count() > 0 || log_p_[i] == kNegInf) {
            out[i] = susceptible;
        } else {
            out[i] = log_add_exp(log_p_[i] + (corrected ? term : 0.0), susceptible);
        }
    }
}

double GibbsSampler::total_marginal_loglik() const
{
    std::vector<double> ll(n_);
    marginal_loglik(ll);
    return std::accumulate(ll.begin(), ll.end(), 0.0);
}

double GibbsSampler::sum_terminal(double alpha0, double xi1, double xi2, std::span<const double> lin_z) const
{
    const Dataset& d = *data_;
    std::vector<double> log_atoms(state_.kappa_dp.atoms.size());
    for (std::size_t k = 0; k < log_atoms.size(); ++k) log_atoms[k] = std::log(state_.kappa_dp.atoms[k]);
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!terminal_active(i)) continue;
        const auto j = static_cast<std::size_t>(d[i].cluster);
        const auto k = static_cast<std::size_t>(state_.kappa_dp.assignments[i]);
        const double w = log_t_[i] - alpha0 - lin_z[i] - xi2 * state_.mu(j) - xi1 * log_gamma_[i];
        total += kernel::terminal(d[i].event_indicator, log_t_[i], state_.kappa_dp.atoms[k], log_atoms[k], w);
    }
    return total;
}

// --- regression blocks -------------------------------------------------------

void GibbsSampler::update_beta()
{
    const Dataset& d = *data_;
    std::vector<double> lin(n_);
    auto target = [&](std::span<const double> beta) {
        double ll = -0.5 * sum_squares(beta) / state_.sigma2_beta;
        for (std::size_t i = 0; i < n_; ++i) {
            lin[i] = linear_predictor(beta, d[i].x);
            if (state_.unsusceptible[i]) continue;
            const auto j = static_cast<std::size_t>(d[i].cluster);
            ll += recurrent_ll(i, log_gamma_[i] + lin[i] + state_.mu(j));
        }
        return ll;
    };
    const double current = target(state_.beta);
    const auto out = mh_step(state_.beta, current, scales_[Block::beta], target, rng_);
    counters_[0].record(out.accepted);
    window_[0].record(out.accepted);
    if (out.accepted) lin_x_ = lin;  // lin holds the proposal's predictors after the last evaluation
}

void GibbsSampler::update_alpha()
{
    const Dataset& d = *data_;
    std::vector<double> lin(n_);
    auto target = [&](std::span<const double> alpha) {
        for (std::size_t i = 0; i < n_; ++i) lin[i] = linear_predictor(alpha, d[i].z);
        return -0.5 * sum_squares(alpha) / state_.sigma2_alpha + sum_terminal(state_.alpha0, state_.xi1, state_.xi2, lin);
    };
    const double current = target(state_.alpha);
    const auto out = mh_step(state_.alpha, current, scales_[Block::alpha], target, rng_);
    counters_[1].record(out.accepted);
    window_[1].record(out.accepted);
    if (out.accepted) lin_z_ = lin;
}

void GibbsSampler::update_alpha0()
{
    auto target = [&](double a0) { return sum_terminal(a0, state_.xi1, state_.xi2, lin_z_); };
    const auto out = mh_step(state_.alpha0, scales_[Block::alpha0], target, rng_);
    counters_[2].record(out.accepted);
    window_[2].record(out.accepted);
}

void GibbsSampler::update_xi1()
{
    auto target = [&](double xi1) {
        return log_normal_kernel(xi1, hyper_.sigma2_xi1) + sum_terminal(state_.alpha0, xi1, state_.xi2, lin_z_);
    };
    const auto out = mh_step(state_.xi1, scales_[Block::xi1], target, rng_);
    counters_[7].record(out.accepted);
    window_[7].record(out.accepted);
}

void GibbsSampler::update_xi2()
{
    auto target = [&](double xi2) {
        return log_normal_kernel(xi2, hyper_.sigma2_xi2) + sum_terminal(state_.alpha0, state_.xi1, xi2, lin_z_);
    };
    const auto out = mh_step(state_.xi2, scales_[Block::xi2], target, rng_);
    counters_[8].record(out.accepted);
    window_[8].record(out.accepted);
}

void GibbsSampler::update_zeta()
{
    if (dim_zeta_ == 0) return;
    auto target = [&](std::span<const double> zeta) {
        double ll = -0.5 * sum_squares(zeta) / hyper_.sigma2_zeta;
        for (std::size_t i = 0; i < n_; ++i) {
            const double eta = linear_predictor(zeta, {u_design_.data() + i * dim_zeta_, dim_zeta_});
            ll += state_.unsusceptible[i] ? log_logistic(eta) : log_logistic(-eta);
        }
        return ll;
    };
    const double current = target(state_.zeta);
    const auto out = mh_step(state_.zeta, current, scales_[Block::zeta], target, rng_);
    counters_[9].record(out.accepted);
    window_[9].record(out.accepted);
    if (out.accepted) refresh_susceptibility_probs();
}

void GibbsSampler::update_prior_variances()
{
    state_.sigma2_beta = rng_.inverse_gamma(hyper_.a_sigma + 0.5 * static_cast<double>(state_.beta.size()),
                                            hyper_.b_sigma + 0.5 * sum_squares(state_.beta));
    state_.sigma2_alpha = rng_.inverse_gamma(hyper_.a_sigma + 0.5 * static_cast<double>(state_.alpha.size()),
                                             hyper_.b_sigma + 0.5 * sum_squares(state_.alpha));
}

// --- frailties -----------------------------------------------------------------

void GibbsSampler::update_tau2()
{
    const auto& members = data_->cluster_members();
    std::vector<double> g;
    for (std::size_t j = 0; j < members.size(); ++j) {
        g.clear();
        for (std::size_t i : members[j]) g.push_back(state_.gamma[i]);
        state_.tau2[j] = gibbs_tau2(g, hyper_.a_tau, hyper_.b_tau, rng_);
    }
}

void GibbsSampler::update_gamma()
{
    const Dataset& d = *data_;
    for (std::size_t i = 0; i < n_; ++i) {
        const auto j = static_cast<std::size_t>(d[i].cluster);
        const double tau2 = state_.tau2[j];
        const double kappa = state_.kappa(i);
        const bool term = terminal_active(i);
        const bool rec = !state_.unsusceptible[i];
        const double w_base = scaled_log_time(i) + state_.xi1 * log_gamma_[i];  // w without the frailty term
        const double rate_base = log_rate(i) - log_gamma_[i];
        auto target = [&](double gamma) {
            const double lg = std::log(gamma);
            double ll = -lg - 0.5 * lg * lg / tau2;
            if (term) ll += terminal_ll(i, w_base - state_.xi1 * lg, kappa);
            if (rec) ll += recurrent_ll(i, rate_base + lg);
            return ll;
        };
        const auto out = mh_step(state_.gamma[i], scales_[Block::gamma], target, rng_, Support::positive);
        counters_[3].record(out.accepted);
        window_[3].record(out.accepted);
        if (out.accepted) log_gamma_[i] = std::log(state_.gamma[i]);
    }
}

// --- cluster effects -----------------------------------------------------------

GibbsSampler::ClusterTerms GibbsSampler::cluster_terms(std::size_t j) const
{
    ClusterTerms t;
    const auto& kd = state_.kappa_dp;
    std::vector<double> mass(kd.atoms.size(), 0.0);
    std::vector<std::uint8_t> used(kd.atoms.size(), 0);
    const double mu = state_.mu(j);
    for (std::size_t i : data_->cluster_members()[j]) {
        const auto& r = (*data_)[i];
        t.events += static_cast<double>(r.event_count());
        if (!state_.unsusceptible[i]) t.rate_mass += std::exp(log_gamma_[i] + lin_x_[i]) * cumhaz_[i];
        if (!terminal_active(i)) continue;
        const auto k = static_cast<std::size_t>(kd.assignments[i]);
        const double kappa = kd.atoms[k];
        const double w0 = scaled_log_time(i) + state_.xi2 * mu;
        t.delta_kappa += r.event_indicator * kappa;
        mass[k] += std::exp(kappa * w0);
        used[k] = 1;
    }
    for (std::size_t k = 0; k < mass.size(); ++k)
        if (used[k]) t.shape_mass.emplace_back(kd.atoms[k], mass[k]);
    return t;
}

// Cluster log likelihood as a function of mu_j = eta, up to terms free of eta.
double GibbsSampler::cluster_profile(const ClusterTerms& t, double eta) const
{
    double ll = t.events * eta - std::exp(eta) * t.rate_mass - state_.xi2 * eta * t.delta_kappa;
    for (const auto& [kappa, mass] : t.shape_mass) ll -= mass * std::exp(-kappa * state_.xi2 * eta);
    return ll;
}

void GibbsSampler::update_mu_block()
{
    if (!has_cluster_effect(config_.variant)) return;
    const std::size_t J = data_->num_clusters();
    std::vector<ClusterTerms> terms(J);
    for (std::size_t j = 0; j < J; ++j) terms[j] = cluster_terms(j);
    TruncatedDP& m = state_.mu_dp;
    const double sd = std::sqrt(hyper_.sigma2_mu);

    if (config_.variant == ModelVariant::bmz) {
        for (std::size_t j = 0; j < J; ++j) {
            auto target = [&](double eta) {
                return log_normal_kernel(eta, hyper_.sigma2_mu) + cluster_profile(terms[j], eta);
            };
            const auto out = mh_step(m.atoms[j], scales_[Block::eta], target, rng_);
            counters_[4].record(out.accepted);
            window_[4].record(out.accepted);
        }
        return;
    }

    const std::size_t L = m.truncation();
    std::vector<double> scores(L);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t l = 0; l < L; ++l) scores[l] = std::log(m.weights[l]) + cluster_profile(terms[j], m.atoms[l]);
        m.assignments[j] = static_cast<int>(sample_assignment(scores, rng_));
    }
    const auto counts = m.counts();
    m.raw_sticks = posterior_stick_update(counts, m.concentration, rng_);
    m.weights = stick_to_weights(m.raw_sticks, L);

    std::vector<std::vector<std::size_t>> members(L);
    for (std::size_t j = 0; j < J; ++j) members[static_cast<std::size_t>(m.assignments[j])].push_back(j);
    for (std::size_t l = 0; l < L; ++l) {
        if (members[l].empty()) {
            m.atoms[l] = rng_.normal(0.0, sd);
            continue;
        }
        auto target = [&](double eta) {
            double ll = log_normal_kernel(eta, hyper_.sigma2_mu);
            for (std::size_t j : members[l]) ll += cluster_profile(terms[j], eta);
            return ll;
        };
        const auto out = mh_step(m.atoms[l], scales_[Block::eta], target, rng_);
        counters_[4].record(out.accepted);
        window_[4].record(out.accepted);
    }
}

// --- susceptibility ------------------------------------------------------------

void GibbsSampler::update_susceptibility()
{
    if (!has_zero_inflation(config_.variant)) return;
    const Dataset& d = *data_;
    const bool literal = config_.likelihood_mode == LikelihoodMode::literal;
    for (std::size_t i = 0; i < n_; ++i) {
        if (d[i].event_count() > 0) {
            state_.unsusceptible[i] = 0;
            continue;
        }
        const double log_surv = -std::exp(log_rate(i)) * cumhaz_[i];
        const double literal_term = literal ? terminal_ll(i, scaled_log_time(i), state_.kappa(i)) : 0.0;
        const double p1 = susceptibility_probability(0, std::exp(log_p_[i]), log_surv, literal_term);
        state_.unsusceptible[i] = rng_.bernoulli(p1) ? 1 : 0;
    }
}

// --- baseline hazard -----------------------------------------------------------

void GibbsSampler::update_baseline()
{
    std::vector<double> rate(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        if (!state_.unsusceptible[i]) rate[i] = std::exp(log_rate(i));

    if (state_.baseline.is_piecewise()) {
        for (std::size_t g = 0; g < levels_; ++g) {
            double events = 0.0;
            double exposure = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (state_.unsusceptible[i]) continue;
                events += interval_counts_[i * levels_ + g];
                exposure += rate[i] * interval_exposure_[i * levels_ + g];
            }
            // flat prior on (0, inf)
            auto target = [&](double lambda) { return events * std::log(lambda) - lambda * exposure; };
            double level = state_.baseline.level(g);
            const auto out = mh_step(level, scales_[Block::baseline], target, rng_, Support::positive);
            counters_[5].record(out.accepted);
            window_[5].record(out.accepted);
            if (out.accepted) state_.baseline.set_level(g, level);
        }
    } else {
        const Dataset& d = *data_;
        auto target = [&](double psi) {
            double ll = log_gamma_density(psi, hyper_.a_psi, hyper_.b_psi);
            const double log_psi = std::log(psi);
            for (std::size_t i = 0; i < n_; ++i) {
                if (state_.unsusceptible[i]) continue;
                ll += static_cast<double>(d[i].event_count()) * log_psi + (psi - 1.0) * sum_log_times_[i] -
                      rate[i] * std::exp(psi * log_t_[i]);
            }
            return ll;
        };
        double psi = state_.baseline.shape();
        const auto out = mh_step(psi, scales_[Block::baseline], target, rng_, Support::positive);
        counters_[5].record(out.accepted);
        window_[5].record(out.accepted);
        if (out.accepted) state_.baseline.set_shape(psi);
    }
    refresh_baseline_caches();
}

// --- terminal shape mixture ----------------------------------------------------

void GibbsSampler::update_kappa_block()
{
    TruncatedDP& kd = state_.kappa_dp;
    const std::size_t K = kd.truncation();
    std::vector<double> w(n_);
    for (std::size_t i = 0; i < n_; ++i) w[i] = scaled_log_time(i);

    std::vector<double> log_weights(K);
    std::vector<double> log_atoms(K);
    for (std::size_t k = 0; k < K; ++k) {
        log_weights[k] = std::log(kd.weights[k]);
        log_atoms[k] = std::log(kd.atoms[k]);
    }
    std::vector<double> scores(K);
    const Dataset& d = *data_;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!terminal_active(i)) {
            kd.assignments[i] = static_cast<int>(sample_assignment(log_weights, rng_));
            continue;
        }
        for (std::size_t k = 0; k < K; ++k)
            scores[k] = log_weights[k] + kernel::terminal(d[i].event_indicator, log_t_[i], kd.atoms[k], log_atoms[k], w[i]);
        kd.assignments[i] = static_cast<int>(sample_assignment(scores, rng_));
    }
    kd.raw_sticks = posterior_stick_update(kd.counts(), kd.concentration, rng_);
    kd.weights = stick_to_weights(kd.raw_sticks, K);

    std::vector<std::vector<std::size_t>> members(K);
    for (std::size_t i = 0; i < n_; ++i) members[static_cast<std::size_t>(kd.assignments[i])].push_back(i);
    for (std::size_t k = 0; k < K; ++k) {
        if (members[k].empty()) {
            kd.atoms[k] = rng_.gamma(hyper_.a_kappa, hyper_.b_kappa);
            continue;
        }
        auto target = [&](double kappa) {
            double ll = log_gamma_density(kappa, hyper_.a_kappa, hyper_.b_kappa);
            const double log_kappa = std::log(kappa);
            for (std::size_t i : members[k])
                if (terminal_active(i)) ll += kernel::terminal(d[i].event_indicator, log_t_[i], kappa, log_kappa, w[i]);
            return ll;
        };
        const auto out = mh_step(kd.atoms[k], scales_[Block::theta], target, rng_, Support::positive);
        counters_[6].record(out.accepted);
        window_[6].record(out.accepted);
    }
}

void GibbsSampler::update_concentrations()
{
    if (config_.freeze_concentration) return;
    if (has_cluster_dp(config_.variant))
        state_.mu_dp.concentration = update_concentration(state_.mu_dp.raw_sticks, hyper_.a_phi, hyper_.b_phi, rng_);
    state_.kappa_dp.concentration =
        update_concentration(state_.kappa_dp.raw_sticks, hyper_.a_phi, hyper_.b_phi, rng_);
}

// --- driver ----------------------------------------------------------------------

void GibbsSampler::sweep()
{
    update_beta();
    update_alpha();
    update_alpha0();
    update_tau2();
    update_gamma();
    update_mu_block();
    update_susceptibility();
    update_baseline();
    update_kappa_block();
    update_xi1();
    update_xi2();
    update_zeta();
    update_prior_variances();
    update_concentrations();
}

void GibbsSampler::adapt()
{
    for (std::size_t b = 0; b < kNumBlocks; ++b) {
        if (window_[b].proposed == 0) continue;
        scales_.rho[b] = adapt_scale(window_[b].rate(), scales_.rho[b], target_acceptance(static_cast<Block>(b)));
    }
    window_ = {};
}

void GibbsSampler::reset_counters()
{
    counters_ = {};
    window_ = {};
}

std::vector<std::string> GibbsSampler::trace_columns() const
{
    std::vector<std::string> c;
    auto indexed = [&](const std::string& stem, std::size_t n) {
        for (std::size_t k = 1; k <= n; ++k) c.push_back(stem + "_" + std::to_string(k));
    };
    indexed("beta", state_.beta.size());
    indexed("alpha", state_.alpha.size());
    c.push_back("alpha0");
    c.push_back("xi1");
    c.push_back("xi2");
    indexed("zeta", dim_zeta_);
    c.push_back("sigma2_beta");
    c.push_back("sigma2_alpha");
    if (has_cluster_effect(config_.variant)) indexed("mu", data_->num_clusters());
    if (has_cluster_dp(config_.variant)) {
        c.push_back("phi_mu");
        c.push_back("occupied_mu");
    }
    c.push_back("phi_kappa");
    c.push_back("occupied_kappa");
    if (state_.baseline.is_piecewise())
        indexed("lambda", levels_);
    else
        c.push_back("psi");
    if (has_zero_inflation(config_.variant)) c.push_back("fraction_unsusceptible");
    c.push_back("loglik");
    return c;
}

void GibbsSampler::trace_row(std::vector<double>& row) const
{
    row.clear();
    row.insert(row.end(), state_.beta.begin(), state_.beta.end());
    row.insert(row.end(), state_.alpha.begin(), state_.alpha.end());
    row.push_back(state_.alpha0);
    row.push_back(state_.xi1);
    row.push_back(state_.xi2);
    row.insert(row.end(), state_.zeta.begin(), state_.zeta.end());
    row.push_back(state_.sigma2_beta);
    row.push_back(state_.sigma2_alpha);
    if (has_cluster_effect(config_.variant))
        for (std::size_t j = 0; j < data_->num_clusters(); ++j) row.push_back(state_.mu(j));
    if (has_cluster_dp(config_.variant)) {
        row.push_back(state_.mu_dp.concentration);
        row.push_back(static_cast<double>(state_.mu_dp.occupied()));
    }
    row.push_back(state_.kappa_dp.concentration);
    row.push_back(static_cast<double>(state_.kappa_dp.occupied()));
    if (state_.baseline.is_piecewise())
        for (std::size_t g = 0; g < levels_; ++g) row.push_back(state_.baseline.level(g));
    else
        row.push_back(state_.baseline.shape());
    if (has_zero_inflation(config_.variant)) {
        const auto n1 = std::count(state_.unsusceptible.begin(), state_.unsusceptible.end(), 1);
        row.push_back(n_ > 0 ? static_cast<double>(n1) / static_cast<double>(n_) : 0.0);
    }
    row.push_back(total_marginal_loglik());
}

ChainTrace run_chain(const Dataset& data, const McmcConfig& config, const Hyperparams& hyper, std::uint64_t chain)
{
    GibbsSampler sampler(data, config, hyper, chain);
    const std::size_t n = data.size();
    ChainTrace trace;
    trace.columns = sampler.trace_columns();
    trace.num_participants = n;
    if (sampler.state().baseline.is_piecewise()) trace.baseline_grid = sampler.state().baseline.piecewise_spec().grid;
    const std::size_t kept = config.kept_draws();
    trace.values.reserve(kept * trace.columns.size());
    if (config.store_participant_loglik) trace.participant_loglik.reserve(kept * n);
    trace.prob_unsusceptible.assign(n, 0.0);
    trace.mean_gamma.assign(n, 0.0);
    trace.mean_kappa.assign(n, 0.0);

    std::vector<double> row;
    std::vector<double> ll(n);
    for (std::size_t it = 0; it < config.iterations; ++it) {
        if (it == config.burn_in) sampler.reset_counters();
        sampler.sweep();
        if (it < config.burn_in) {
            if ((it + 1) % config.adapt_window == 0) sampler.adapt();
            continue;
        }
        if ((it - config.burn_in + 1) % config.thin != 0) continue;
        sampler.trace_row(row);
        trace.values.insert(trace.values.end(), row.begin(), row.end());
        trace.total_loglik.push_back(row.back());
        if (config.store_participant_loglik) {
            sampler.marginal_loglik(ll);
            trace.participant_loglik.insert(trace.participant_loglik.end(), ll.begin(), ll.end());
        }
        const ParamState& s = sampler.state();
        for (std::size_t i = 0; i < n; ++i) {
            trace.prob_unsusceptible[i] += s.unsusceptible[i];
            trace.mean_gamma[i] += s.gamma[i];
            trace.mean_kappa[i] += s.kappa(i);
        }
        ++trace.num_draws;
    }
    if (trace.num_draws > 0) {
        const double inv = 1.0 / static_cast<double>(trace.num_draws);
        for (std::size_t i = 0; i < n; ++i) {
            trace.prob_unsusceptible[i] *= inv;
            trace.mean_gamma[i] *= inv;
            trace.mean_kappa[i] *= inv;
        }
    }
    trace.acceptance = sampler.counters();
    trace.scales = sampler.scales();
    return trace;
}

}  // namespace zirec

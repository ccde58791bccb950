#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zirec/likelihood.hpp"
#include "zirec/model.hpp"
#include "zirec/rng.hpp"

namespace zirec {

/// Full model and its three ablations.
enum class ModelVariant {
    bmz_dp,  // zero-inflation, DP cluster effects
    bm_dp,   // no zero-inflation (D = 0, no zeta)
    bz_dp,   // no cluster effects (mu = 0)
    bmz,     // parametric normal cluster effects
};

enum class BaselineVariant { piecewise, power_law };

std::string_view to_string(ModelVariant v);
std::string_view to_string(BaselineVariant v);
std::string_view to_string(LikelihoodMode m);
ModelVariant parse_model_variant(std::string_view s);
BaselineVariant parse_baseline_variant(std::string_view s);
LikelihoodMode parse_likelihood_mode(std::string_view s);

bool has_zero_inflation(ModelVariant v);
bool has_cluster_effect(ModelVariant v);
bool has_cluster_dp(ModelVariant v);

/// Metropolis-Hastings blocks, in sweep order.
enum class Block : std::size_t { beta, alpha, alpha0, gamma, eta, baseline, theta, xi1, xi2, zeta, count };
inline constexpr std::size_t kNumBlocks = static_cast<std::size_t>(Block::count);
std::string_view block_name(Block b);
/// Target acceptance: 0.30 for the vector blocks (beta, alpha, zeta), 0.44 otherwise.
double target_acceptance(Block b);

/// Random-walk standard deviation per MH block. The piecewise levels share the `baseline` scale.
struct ProposalScales {
    std::array<double, kNumBlocks> rho{0.05, 0.05, 0.05, 0.3, 0.1, 0.1, 0.3, 0.1, 0.1, 0.3};

    double& operator[](Block b) { return rho[static_cast<std::size_t>(b)]; }
    double operator[](Block b) const { return rho[static_cast<std::size_t>(b)]; }
    void validate() const;

    friend bool operator==(const ProposalScales&, const ProposalScales&) = default;
};

struct McmcConfig {
    std::size_t iterations = 10000;
    std::size_t burn_in = 5000;
    std::size_t thin = 1;
    std::size_t chains = 1;
    std::uint64_t seed = 1;
    ModelVariant variant = ModelVariant::bmz_dp;
    BaselineVariant baseline = BaselineVariant::piecewise;
    LikelihoodMode likelihood_mode = LikelihoodMode::corrected;
    std::size_t adapt_window = 50;
    bool freeze_concentration = false;
    bool store_participant_loglik = true;
    ProposalScales initial_scales;

    void validate() const;
    std::size_t kept_draws() const { return (iterations - burn_in) / thin; }
};

struct BlockCounter {
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;

    double rate() const { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed); }
    void record(bool ok)
    {
        ++proposed;
        accepted += ok ? 1 : 0;
    }
    friend bool operator==(const BlockCounter&, const BlockCounter&) = default;
};

/// Kept draws of one chain.
struct ChainTrace {
    std::vector<std::string> columns;
    std::vector<double> values;  // num_draws x columns, row-major
    std::size_t num_draws = 0;
    std::vector<double> total_loglik;        // per draw, D integrated out
    std::vector<double> participant_loglik;  // num_draws x num_participants, row-major; may be empty
    std::size_t num_participants = 0;
    std::array<BlockCounter, kNumBlocks> acceptance{};  // post burn-in
    ProposalScales scales;                              // frozen after burn-in
    std::vector<double> baseline_grid;                  // piecewise variant only
    std::vector<double> prob_unsusceptible;             // per participant posterior means
    std::vector<double> mean_gamma;
    std::vector<double> mean_kappa;

    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;
    std::vector<double> column(std::string_view name) const;
    double at(std::size_t draw, std::size_t col) const { return values[draw * columns.size() + col]; }
    std::span<const double> participant_row(std::size_t draw) const
    {
        return {participant_loglik.data() + draw * num_participants, num_participants};
    }

    friend bool operator==(const ChainTrace&, const ChainTrace&) = default;
};

enum class Support { real_line, positive };

struct MhOutcome {
    bool accepted = false;
    double log_target = 0.0;  // target at the returned state
};

/// Gaussian random-walk MH step. Draw order: one normal per coordinate, then one
/// uniform unless the proposal left the support (rejected without a uniform).
/// Accepts when log(u) < target(proposal) - current_log_target.
MhOutcome mh_step(double& value, double current_log_target, double scale,
                  const std::function<double(double)>& log_target, Rng& rng, Support support = Support::real_line);
MhOutcome mh_step(double& value, double scale, const std::function<double(double)>& log_target, Rng& rng,
                  Support support = Support::real_line);
MhOutcome mh_step(std::vector<double>& value, double current_log_target, double scale,
                  const std::function<double(std::span<const double>)>& log_target, Rng& rng);

/// tau_j^2 | gamma ~ IG(a0 + n/2, b0 + sum (log gamma)^2 / 2).
double gibbs_tau2(std::span<const double> cluster_gammas, double a0, double b0, Rng& rng);

/// P(D = 1) given the participant's recurrent log survival and, in literal mode, the terminal
/// log contribution that only the susceptible branch carries.
double susceptibility_probability(std::size_t event_count, double p_unsusceptible, double recurrent_log_survival,
                                  double literal_terminal_term = 0.0);

/// Draws D for a participant. Participants with events are always susceptible.
int gibbs_susceptibility(const ParticipantRecord& record, const ParamState& state, std::size_t index,
                         double p_unsusceptible, LikelihoodMode mode, Rng& rng);

/// scale * exp(0.5 * (rate - target)).
double adapt_scale(double acceptance_rate, double scale, double target);

/// MH-within-Gibbs kernel with per-participant caches of the linear predictors and
/// baseline integrals. Every block keeps the caches consistent with the state.
class GibbsSampler {
public:
    /// Initializes all parameters from the prior on stream `chain` of config.seed.
    GibbsSampler(const Dataset& data, McmcConfig config, Hyperparams hyper, std::uint64_t chain = 0);
    /// Starts from a caller-supplied state.
    GibbsSampler(const Dataset& data, McmcConfig config, Hyperparams hyper, ParamState initial, Rng rng);

    void sweep();

    void update_beta();
    void update_alpha();
    void update_alpha0();
    void update_tau2();
    void update_gamma();
    void update_mu_block();
    void update_susceptibility();
    void update_baseline();
    void update_kappa_block();
    void update_xi1();
    void update_xi2();
    void update_zeta();
    void update_prior_variances();
    void update_concentrations();

    /// Adapts every block from the acceptance counts of the current window, then clears the window.
    void adapt();
    void reset_counters();

    const ParamState& state() const { return state_; }
    const ProposalScales& scales() const { return scales_; }
    ProposalScales& scales() { return scales_; }
    const std::array<BlockCounter, kNumBlocks>& counters() const { return counters_; }
    const McmcConfig& config() const { return config_; }
    Rng& rng() { return rng_; }

    /// P(D_ij = 1) under the current zeta or fixed p; 0 without zero-inflation.
    double p_unsusceptible(std::size_t i) const;
    /// Per-participant log likelihood with D integrated out, from the caches.
    void marginal_loglik(std::span<double> out) const;
    double total_marginal_loglik() const;
    /// Conditional-on-D log likelihood from the caches (matches total_log_likelihood).
    double conditional_loglik() const;

    std::vector<std::string> trace_columns() const;
    void trace_row(std::vector<double>& row) const;

private:
    struct ClusterTerms;

    void build_static_caches();
    void initialize_from_prior();
    void refresh_all_caches();
    void refresh_baseline_caches();
    void refresh_susceptibility_probs();
    void check_initial_likelihood() const;

    bool terminal_active(std::size_t i) const;
    double scaled_log_time(std::size_t i) const;  // w with current mu
    double terminal_ll(std::size_t i, double w, double kappa) const;
    double recurrent_ll(std::size_t i, double log_rate) const;
    double log_rate(std::size_t i) const;
    double participant_ll(std::size_t i) const;
    ClusterTerms cluster_terms(std::size_t j) const;
    double cluster_profile(const ClusterTerms& terms, double eta) const;
    double sum_terminal(double alpha0, double xi1, double xi2, std::span<const double> lin_z) const;

    const Dataset* data_;
    McmcConfig config_;
    Hyperparams hyper_;
    ParamState state_;
    Rng rng_;
    ProposalScales scales_;
    std::array<BlockCounter, kNumBlocks> counters_{};
    std::array<BlockCounter, kNumBlocks> window_{};

    std::size_t n_ = 0;
    std::size_t levels_ = 0;  // piecewise intervals G
    std::vector<double> log_t_;
    std::vector<double> sum_log_times_;
    std::vector<int> interval_counts_;     // n x G
    std::vector<double> interval_exposure_;  // n x G
    std::vector<double> u_design_;           // n x dim(zeta)
    std::size_t dim_zeta_ = 0;

    std::vector<double> lin_x_;
    std::vector<double> lin_z_;
    std::vector<double> log_gamma_;
    std::vector<double> sum_log_baseline_;
    std::vector<double> cumhaz_;
    std::vector<double> log_p_;
    std::vector<double> log_1mp_;
};

/// Runs one chain: burn-in with adaptation every config.adapt_window sweeps, then
/// config.kept_draws() recorded draws. Same inputs produce an identical trace.
ChainTrace run_chain(const Dataset& data, const McmcConfig& config, const Hyperparams& hyper,
                     std::uint64_t chain = 0);

}  // namespace zirec

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zirec/baseline.hpp"

namespace zirec {

/// Observed data for one participant.
struct ParticipantRecord {
    int cluster = 0;      // in [0, J)
    int participant = 0;  // unique within its cluster
    double followup_time = 1.0;
    int event_indicator = 0;  // 1 = terminal event observed
    std::vector<double> recurrent_times;  // strictly increasing, each in (0, followup_time]
    std::vector<double> x;  // recurrent-process covariates
    std::vector<double> z;  // terminal-process covariates
    std::vector<double> u;  // susceptibility covariates

    std::size_t event_count() const { return recurrent_times.size(); }

    /// Throws DataError describing the first violated invariant.
    void validate() const;

    friend bool operator==(const ParticipantRecord&, const ParticipantRecord&) = default;
};

class Dataset {
public:
    Dataset() = default;

    /// Validates every record and the cluster layout. Clusters must be non-empty.
    static Dataset create(std::vector<ParticipantRecord> records, std::size_t num_clusters,
                          std::size_t dim_x, std::size_t dim_z, std::size_t dim_u);

    /// An empty dataset that still declares covariate dimensions.
    static Dataset empty(std::size_t dim_x, std::size_t dim_z, std::size_t dim_u);

    const std::vector<ParticipantRecord>& records() const { return records_; }
    const ParticipantRecord& operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    std::size_t num_clusters() const { return cluster_sizes_.size(); }
    const std::vector<std::size_t>& cluster_sizes() const { return cluster_sizes_; }
    /// Record indices belonging to each cluster, in record order.
    const std::vector<std::vector<std::size_t>>& cluster_members() const { return members_; }

    std::size_t dim_x() const { return dim_x_; }
    std::size_t dim_z() const { return dim_z_; }
    std::size_t dim_u() const { return dim_u_; }

    std::vector<double> pooled_event_times() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<ParticipantRecord> records_;
    std::vector<std::size_t> cluster_sizes_;
    std::vector<std::vector<std::size_t>> members_;
    std::size_t dim_x_ = 0;
    std::size_t dim_z_ = 0;
    std::size_t dim_u_ = 0;
};

/// Truncated stick-breaking mixture. Assignments are 0-based atom indices.
struct TruncatedDP {
    std::vector<double> atoms;
    std::vector<double> raw_sticks;  // K - 1 entries; the K-th stick is implicitly 1
    std::vector<double> weights;     // K entries summing to 1
    std::vector<int> assignments;
    double concentration = 1.0;

    std::size_t truncation() const { return atoms.size(); }
    double value_of(std::size_t unit) const { return atoms[static_cast<std::size_t>(assignments[unit])]; }
    std::vector<int> counts() const;
    std::size_t occupied() const;
};

/// Full parameter vector at one iteration.
///
/// The cluster effect mu_j is always read through mu_dp. A parametric
/// normal prior stores one atom per cluster with identity assignments, and a
/// model without cluster effects stores a single atom fixed at zero.
struct ParamState {
    std::vector<double> beta;
    std::vector<double> alpha;
    double alpha0 = 0.0;
    std::vector<double> zeta;  // empty unless the logistic susceptibility model is active
    double xi1 = 0.0;
    double xi2 = 0.0;
    std::vector<double> gamma;  // per participant
    std::vector<double> tau2;   // per cluster
    TruncatedDP mu_dp;
    TruncatedDP kappa_dp;
    std::vector<std::uint8_t> unsusceptible;  // D_ij
    BaselineHazard baseline;
    double sigma2_beta = 1.0;
    double sigma2_alpha = 1.0;

    double mu(std::size_t cluster) const { return mu_dp.value_of(cluster); }
    double kappa(std::size_t participant) const { return kappa_dp.value_of(participant); }

    /// Checks positivity invariants and that D = 0 wherever events were observed.
    void validate(const Dataset& data) const;
};

/// Fixed hyper-parameters of the prior.
struct Hyperparams {
    double a_sigma = 0.5;  // IG prior on sigma2_beta and sigma2_alpha
    double b_sigma = 0.5;
    double sigma2_zeta = 10.0;
    double sigma2_xi1 = 10.0;
    double sigma2_xi2 = 10.0;
    double a_tau = 2.0;  // IG(a0, b0) on tau_j^2
    double b_tau = 1.0;
    double a_kappa = 1.0;  // Gamma base measure of kappa atoms
    double b_kappa = 1.0;
    double sigma2_mu = 1.0;  // normal base measure of mu atoms
    double a_phi = 1.0;      // Gamma prior of both concentrations
    double b_phi = 1.0;
    double a_psi = 1.0;  // Gamma prior on the power-law shape
    double b_psi = 1.0;
    std::size_t kappa_truncation = 0;  // 0 selects min(50, N)
    std::size_t mu_truncation = 0;     // 0 selects min(30, J)
    std::size_t grid_count = 5;
    std::optional<double> fixed_p;  // constant P(D = 1); unset selects the logistic model
    bool u_intercept = false;        // prepend an intercept column to U in the logistic model

    void validate() const;
    std::size_t resolved_kappa_truncation(std::size_t num_participants) const;
    std::size_t resolved_mu_truncation(std::size_t num_clusters) const;
};

}  // namespace zirec

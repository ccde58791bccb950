#include "zirec/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "zirec/errors.hpp"

namespace zirec {

namespace {

std::string who(const ParticipantRecord& r)
{
    return "participant (" + std::to_string(r.cluster) + ", " + std::to_string(r.participant) + ")";
}

bool all_finite(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void ParticipantRecord::validate() const
{
    if (!(followup_time > 0.0) || !std::isfinite(followup_time))
        throw DataError(who(*this) + ": follow-up time must be positive");
    if (event_indicator != 0 && event_indicator != 1)
        throw DataError(who(*this) + ": event indicator must be 0 or 1");
    double prev = 0.0;
    for (double t : recurrent_times) {
        if (!(t > prev)) throw DataError(who(*this) + ": recurrent times must be positive and strictly increasing");
        if (t > followup_time) throw DataError(who(*this) + ": recurrent time exceeds follow-up time");
        prev = t;
    }
    if (!all_finite(x) || !all_finite(z) || !all_finite(u))
        throw DataError(who(*this) + ": non-finite covariate");
}

Dataset Dataset::create(std::vector<ParticipantRecord> records, std::size_t num_clusters, std::size_t dim_x,
                        std::size_t dim_z, std::size_t dim_u)
{
    Dataset d;
    d.dim_x_ = dim_x;
    d.dim_z_ = dim_z;
    d.dim_u_ = dim_u;
    d.cluster_sizes_.assign(num_clusters, 0);
    d.members_.assign(num_clusters, {});
    std::set<std::pair<int, int>> keys;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        r.validate();
        if (r.cluster < 0 || static_cast<std::size_t>(r.cluster) >= num_clusters)
            throw DataError(who(r) + ": cluster index out of range");
        if (r.x.size() != dim_x || r.z.size() != dim_z || r.u.size() != dim_u)
            throw DataError(who(r) + ": covariate dimensions differ from the dataset");
        if (!keys.emplace(r.cluster, r.participant).second) throw DataError(who(r) + ": duplicate key");
        ++d.cluster_sizes_[static_cast<std::size_t>(r.cluster)];
        d.members_[static_cast<std::size_t>(r.cluster)].push_back(i);
    }
    for (std::size_t j = 0; j < num_clusters; ++j)
        if (d.cluster_sizes_[j] == 0) throw DataError("cluster " + std::to_string(j) + " has no participants");
    d.records_ = std::move(records);
    return d;
}

Dataset Dataset::empty(std::size_t dim_x, std::size_t dim_z, std::size_t dim_u)
{
    return create({}, 0, dim_x, dim_z, dim_u);
}

std::vector<double> Dataset::pooled_event_times() const
{
    std::vector<double> out;
    for (const auto& r : records_) out.insert(out.end(), r.recurrent_times.begin(), r.recurrent_times.end());
    return out;
}

std::vector<int> TruncatedDP::counts() const
{
    std::vector<int> c(atoms.size(), 0);
    for (int a : assignments) ++c[static_cast<std::size_t>(a)];
    return c;
}

std::size_t TruncatedDP::occupied() const
{
    const auto c = counts();
    return static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [](int n) { return n > 0; }));
}

void ParamState::validate(const Dataset& data) const
{
    if (gamma.size() != data.size() || unsusceptible.size() != data.size() ||
        kappa_dp.assignments.size() != data.size() || tau2.size() != data.num_clusters() ||
        mu_dp.assignments.size() != data.num_clusters() || beta.size() != data.dim_x() ||
        alpha.size() != data.dim_z())
        throw ConfigError("parameter state does not match dataset dimensions");
    for (double g : gamma)
        if (!(g > 0.0)) throw ContractViolation("frailty must be positive");
    for (double t : tau2)
        if (!(t > 0.0)) throw ContractViolation("frailty variance must be positive");
    for (double th : kappa_dp.atoms)
        if (!(th > 0.0)) throw ContractViolation("shape atoms must be positive");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (unsusceptible[i] && data[i].event_count() > 0)
            throw ContractViolation("participant with events marked unsusceptible");
}

void Hyperparams::validate() const
{
    const double positives[] = {a_sigma, b_sigma, sigma2_zeta, sigma2_xi1, sigma2_xi2, a_tau, b_tau, a_kappa,
                                b_kappa, sigma2_mu, a_phi, b_phi, a_psi, b_psi};
    for (double v : positives)
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("hyper-parameters must be positive and finite");
    if (grid_count < 1) throw ConfigError("grid_count must be >= 1");
    if (fixed_p && !(*fixed_p > 0.0 && *fixed_p < 1.0)) throw ConfigError("fixed_p must lie in (0,1)");
}

std::size_t Hyperparams::resolved_kappa_truncation(std::size_t num_participants) const
{
    if (kappa_truncation > 0) return kappa_truncation;
    return std::max<std::size_t>(1, std::min<std::size_t>(50, num_participants));
}

std::size_t Hyperparams::resolved_mu_truncation(std::size_t num_clusters) const
{
    if (mu_truncation > 0) return mu_truncation;
    return std::max<std::size_t>(1, std::min<std::size_t>(30, num_clusters));
}

}  // namespace zirec

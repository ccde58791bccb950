#include "zirec/study.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "zirec/errors.hpp"

namespace zirec {

using nlohmann::json;

namespace {

// Runs task(k) for k in [0, count) on up to `threads` workers. Results are written by index,
// so output order never depends on scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t k = 0; k < count; ++k) task(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    task(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

json summary_json(const PosteriorSummary& s)
{
    return json{{"mean", s.mean}, {"sd", s.sd}, {"q2.5", s.q025}, {"q50", s.q50}, {"q97.5", s.q975}};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    Rng rng(seed, stream + 0x5eed);
    return rng.engine()();
}

std::vector<ChainTrace> run_chains(const Dataset& data, const FitConfig& config, std::size_t threads)
{
    std::vector<ChainTrace> chains(config.mcmc.chains);
    parallel_for(chains.size(), threads,
                 [&](std::size_t c) { chains[c] = run_chain(data, config.mcmc, config.hyper, c); });
    return chains;
}

FitResult summarize_chains(std::vector<ChainTrace> chains, const FitConfig& config, std::vector<CpoPartial> cpo_parts)
{
    if (chains.empty()) throw ContractViolation("no chains to summarize");
    FitResult fit;
    fit.config = config;
    const auto& columns = chains.front().columns;
    for (const auto& c : chains) {
        if (c.columns != columns) throw ContractViolation("chains have different trace columns");
        if (c.num_draws == 0) throw ContractViolation("chain has no kept draws");
    }
    const bool equal_length = std::all_of(chains.begin(), chains.end(),
                                          [&](const ChainTrace& c) { return c.num_draws == chains.front().num_draws; });
    const bool psrf_ok = chains.size() >= 2 && equal_length && chains.front().num_draws >= 2;
    for (const auto& name : columns) {
        ParameterRow row{name, posterior_summary(chains, name), std::nullopt};
        if (psrf_ok) row.psrf = gelman_rubin_psrf(chains, name);
        fit.parameters.push_back(std::move(row));
    }
    if (psrf_ok && !chains.front().total_loglik.empty()) fit.loglik_psrf = loglik_psrf(chains);

    if (cpo_parts.empty()) {
        const bool stored = std::all_of(chains.begin(), chains.end(), [](const ChainTrace& c) {
            return c.num_draws > 0 && c.participant_loglik.size() == c.num_draws * c.num_participants;
        });
        if (stored)
            for (const auto& c : chains) cpo_parts.push_back(cpo_partial(c));
    }
    if (!cpo_parts.empty()) fit.cpo = combine_cpo(cpo_parts);
    fit.cpo_parts = std::move(cpo_parts);

    for (const auto& c : chains)
        for (std::size_t b = 0; b < kNumBlocks; ++b) {
            fit.acceptance[b].proposed += c.acceptance[b].proposed;
            fit.acceptance[b].accepted += c.acceptance[b].accepted;
        }
    fit.baseline_grid = chains.front().baseline_grid;
    fit.chains = std::move(chains);
    return fit;
}

FitResult fit_model(const Dataset& data, const FitConfig& config, std::size_t threads)
{
    return summarize_chains(run_chains(data, config, threads), config);
}

json summary_to_json(const FitResult& fit)
{
    json params = json::array();
    for (const auto& p : fit.parameters) {
        json row = summary_json(p.summary);
        row["name"] = p.name;
        row["psrf"] = p.psrf ? json(*p.psrf) : json(nullptr);
        params.push_back(std::move(row));
    }
    json acceptance = json::object();
    for (std::size_t b = 0; b < kNumBlocks; ++b)
        if (fit.acceptance[b].proposed > 0)
            acceptance[std::string(block_name(static_cast<Block>(b)))] = fit.acceptance[b].rate();
    json out{{"config", to_json(fit.config)},
             {"seed", fit.config.mcmc.seed},
             {"variant", to_string(fit.config.mcmc.variant)},
             {"chains", fit.chains.size()},
             {"draws_per_chain", fit.chains.empty() ? 0 : fit.chains.front().num_draws},
             {"parameters", params},
             {"lpml", fit.cpo ? json(fit.cpo->lpml) : json(nullptr)},
             {"loglik_psrf", fit.loglik_psrf ? json(*fit.loglik_psrf) : json(nullptr)},
             {"acceptance", acceptance},
             {"baseline_grid", fit.baseline_grid}};
    return out;
}

std::vector<ReplicateEstimate> score_against_truth(const FitResult& fit, const SimTruth& truth)
{
    std::vector<std::pair<std::string, double>> targets;
    for (std::size_t k = 0; k < truth.beta.size(); ++k) targets.emplace_back("beta_" + std::to_string(k + 1), truth.beta[k]);
    for (std::size_t k = 0; k < truth.alpha.size(); ++k)
        targets.emplace_back("alpha_" + std::to_string(k + 1), truth.alpha[k]);
    targets.emplace_back("alpha0", truth.alpha0);
    targets.emplace_back("xi1", truth.xi1);
    targets.emplace_back("xi2", truth.xi2);
    for (std::size_t k = 0; k < truth.zeta.size(); ++k) targets.emplace_back("zeta_" + std::to_string(k + 1), truth.zeta[k]);
    if (!truth.baseline.is_piecewise()) targets.emplace_back("psi", truth.baseline.shape());

    std::vector<ReplicateEstimate> out;
    for (const auto& [name, value] : targets) {
        const auto it = std::find_if(fit.parameters.begin(), fit.parameters.end(),
                                     [&](const ParameterRow& p) { return p.name == name; });
        if (it != fit.parameters.end()) out.push_back({name, it->summary, value});
    }
    return out;
}

json to_json(const StudyConfig& c)
{
    json variants = json::array();
    for (auto v : c.variants) variants.push_back(to_string(v));
    return json{{"simulation", to_json(c.sim)},
                {"replicates", c.replicates},
                {"variants", variants},
                {"seed", c.seed},
                {"fit", to_json(c.fit)}};
}

StudyConfig study_config_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("study config must be an object");
    for (const auto& [k, v] : j.items())
        if (k != "simulation" && k != "replicates" && k != "variants" && k != "seed" && k != "fit")
            throw ConfigError("unknown key '" + k + "' in study config");
    StudyConfig c;
    if (j.contains("simulation")) c.sim = sim_config_from_json(j.at("simulation"));
    if (j.contains("replicates")) {
        if (!j.at("replicates").is_number_unsigned()) throw ConfigError("replicates must be a non-negative integer");
        c.replicates = j.at("replicates").get<std::size_t>();
    }
    if (j.contains("variants")) {
        if (!j.at("variants").is_array()) throw ConfigError("variants must be an array");
        c.variants.clear();
        for (const auto& v : j.at("variants")) {
            if (!v.is_string()) throw ConfigError("variant names must be strings");
            c.variants.push_back(parse_model_variant(v.get<std::string>()));
        }
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("fit")) c.fit = fit_config_from_json(j.at("fit"));
    if (c.replicates == 0) throw ConfigError("replicates must be >= 1");
    if (c.variants.empty()) throw ConfigError("at least one variant is required");
    c.fit.mcmc.baseline = c.sim.baseline;
    return c;
}

StudyReport run_replicate_study(const StudyConfig& config, std::size_t threads,
                                const std::function<void(const std::string&)>& log)
{
    const auto start = std::chrono::steady_clock::now();
    StudyReport report;
    report.config = config;
    const std::size_t R = config.replicates;
    const std::size_t V = config.variants.size();
    report.variants.resize(V);
    for (std::size_t v = 0; v < V; ++v) {
        report.variants[v].variant = config.variants[v];
        report.variants[v].replicates.resize(R);
    }
    std::mutex log_mutex;

    parallel_for(R * V, threads, [&](std::size_t unit) {
        const std::size_t r = unit / V;
        const std::size_t v = unit % V;
        ReplicateFit& out = report.variants[v].replicates[r];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto [data, truth] = simulate_dataset(config.sim, derive_seed(config.seed, 2 * r));
            FitConfig fc = config.fit;
            fc.mcmc.variant = config.variants[v];
            fc.mcmc.baseline = config.sim.baseline;
            fc.mcmc.seed = derive_seed(config.seed, 2 * r + 1);
            fc.mcmc.store_participant_loglik = true;
            const FitResult fit = fit_model(data, fc, 1);
            out.estimates = score_against_truth(fit, truth);
            out.lpml = fit.cpo ? fit.cpo->lpml : std::nan("");
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log) {
            std::lock_guard lock(log_mutex);
            char buf[160];
            std::snprintf(buf, sizeof buf, "replicate %zu %s: %s (%.1f s)", r, std::string(to_string(config.variants[v])).c_str(),
                          out.ok ? "ok" : out.error.c_str(), out.seconds);
            log(buf);
        }
    });

    for (auto& vr : report.variants) {
        std::vector<std::vector<ReplicateEstimate>> ok;
        for (const auto& rf : vr.replicates) {
            if (rf.ok)
                ok.push_back(rf.estimates);
            else
                ++vr.failures;
        }
        if (!ok.empty()) vr.rows = replicate_aggregate(ok);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

json report_to_json(const StudyReport& report)
{
    json variants = json::array();
    for (const auto& vr : report.variants) {
        json rows = json::array();
        for (const auto& row : vr.rows)
            rows.push_back({{"name", row.name},
                            {"truth", row.truth},
                            {"mean", row.mean},
                            {"bias", row.bias},
                            {"bias_absolute", row.bias_absolute},
                            {"coverage", row.coverage},
                            {"replicates", row.replicates}});
        json lpml = json::array();
        json errors = json::array();
        json estimates = json::array();  // per replicate: name -> [mean, sd, q2.5, q97.5]
        for (std::size_t r = 0; r < vr.replicates.size(); ++r) {
            const auto& rf = vr.replicates[r];
            lpml.push_back(rf.ok && std::isfinite(rf.lpml) ? json(rf.lpml) : json(nullptr));
            json est = json::object();
            for (const auto& e : rf.estimates) est[e.name] = {e.summary.mean, e.summary.sd, e.summary.q025, e.summary.q975};
            estimates.push_back(rf.ok ? est : json(nullptr));
            if (!rf.ok) errors.push_back({{"replicate", r}, {"error", rf.error}});
        }
        variants.push_back({{"variant", to_string(vr.variant)},
                            {"rows", rows},
                            {"failures", vr.failures},
                            {"errors", errors},
                            {"lpml", lpml},
                            {"estimates", estimates}});
    }
    return json{{"config", to_json(report.config)}, {"seed", report.config.seed}, {"variants", variants}};
}

std::string report_table(const StudyReport& report)
{
    std::ostringstream os;
    char buf[256];
    for (const auto& vr : report.variants) {
        os << to_string(vr.variant) << " (" << (vr.replicates.size() - vr.failures) << " of " << vr.replicates.size()
           << " replicates)\n";
        std::snprintf(buf, sizeof buf, "  %-10s %10s %10s %10s %12s\n", "parameter", "truth", "mean", "bias(%)",
                      "coverage(%)");
        os << buf;
        for (const auto& row : vr.rows) {
            std::snprintf(buf, sizeof buf, "  %-10s %10.3f %10.3f %10.2f%s %12.1f\n", row.name.c_str(), row.truth,
                          row.mean, row.bias, row.bias_absolute ? "*" : " ", 100.0 * row.coverage);
            os << buf;
        }
    }
    os << "(* absolute bias: truth is zero)\n";
    return os.str();
}

json timing_to_json(const StudyReport& report)
{
    json variants = json::array();
    for (const auto& vr : report.variants) {
        json secs = json::array();
        for (const auto& rf : vr.replicates) secs.push_back(rf.seconds);
        variants.push_back({{"variant", to_string(vr.variant)}, {"replicate_seconds", secs}});
    }
    return json{{"wall_seconds", report.wall_seconds}, {"variants", variants}};
}

}  // namespace zirec

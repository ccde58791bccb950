#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zirec/diagnostics.hpp"
#include "zirec/io.hpp"
#include "zirec/simulate.hpp"

namespace zirec {

struct ParameterRow {
    std::string name;
    PosteriorSummary summary;
    std::optional<double> psrf;  // needs >= 2 chains
};

struct FitResult {
    FitConfig config;
    std::vector<ChainTrace> chains;
    std::vector<CpoPartial> cpo_parts;
    std::vector<ParameterRow> parameters;
    std::optional<CpoResult> cpo;
    std::optional<double> loglik_psrf;
    std::array<BlockCounter, kNumBlocks> acceptance{};  // pooled over chains
    std::vector<double> baseline_grid;
};

/// Independent 64-bit seed for stream `stream` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Chain c runs on stream c of config.mcmc.seed; chains run on up to `threads` threads.
std::vector<ChainTrace> run_chains(const Dataset& data, const FitConfig& config, std::size_t threads = 1);

/// Summaries, PSRF, pooled acceptance and LPML. cpo_parts may stand in for stored participant log-likelihoods.
FitResult summarize_chains(std::vector<ChainTrace> chains, const FitConfig& config,
                           std::vector<CpoPartial> cpo_parts = {});

FitResult fit_model(const Dataset& data, const FitConfig& config, std::size_t threads = 1);

/// Summary document; embeds the resolved config and seed.
nlohmann::json summary_to_json(const FitResult& fit);

/// Scores every parameter that has a generating value (beta, alpha, alpha0, xi, zeta, psi).
std::vector<ReplicateEstimate> score_against_truth(const FitResult& fit, const SimTruth& truth);

struct StudyConfig {
    SimConfig sim;
    std::size_t replicates = 25;
    std::vector<ModelVariant> variants{ModelVariant::bmz_dp, ModelVariant::bm_dp, ModelVariant::bz_dp};
    std::uint64_t seed = 1;
    FitConfig fit;
};

nlohmann::json to_json(const StudyConfig& config);
StudyConfig study_config_from_json(const nlohmann::json& j);

struct ReplicateFit {
    bool ok = false;
    std::string error;
    std::vector<ReplicateEstimate> estimates;
    double lpml = 0.0;
    double seconds = 0.0;
};

struct VariantReport {
    ModelVariant variant = ModelVariant::bmz_dp;
    std::vector<AggregateRow> rows;
    std::vector<ReplicateFit> replicates;  // indexed by replicate
    std::size_t failures = 0;
};

struct StudyReport {
    StudyConfig config;
    std::vector<VariantReport> variants;
    double wall_seconds = 0.0;
};

/// Replicate r simulates with derive_seed(seed, 2r) and fits with derive_seed(seed, 2r + 1), so every
/// variant sees the same datasets. Failed fits are counted and excluded from aggregation.
StudyReport run_replicate_study(const StudyConfig& config, std::size_t threads = 1,
                                const std::function<void(const std::string&)>& log = {});

/// Deterministic report: no timings.
nlohmann::json report_to_json(const StudyReport& report);
/// Mean / Bias(%) / Coverage(%) table per variant.
std::string report_table(const StudyReport& report);
/// Wall-clock accounting, kept apart from the deterministic report.
nlohmann::json timing_to_json(const StudyReport& report);

}  // namespace zirec

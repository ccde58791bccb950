#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "zirec/errors.hpp"
#include "zirec/io.hpp"
#include "zirec/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zirec;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> chains;
    std::string variant;
    std::string baseline;
};

void apply(const Overrides& o, FitConfig& c)
{
    if (o.seed) c.mcmc.seed = *o.seed;
    if (o.chains) c.mcmc.chains = *o.chains;
    if (!o.variant.empty()) c.mcmc.variant = parse_model_variant(o.variant);
    if (!o.baseline.empty()) c.mcmc.baseline = parse_baseline_variant(o.baseline);
    c.mcmc.validate();
}

std::string chain_stem(std::size_t c) { return "chain_" + std::to_string(c + 1); }

json chain_meta(const ChainTrace& t, const CpoPartial* cpo)
{
    json acc = json::array();
    for (const auto& b : t.acceptance) acc.push_back({b.proposed, b.accepted});
    json meta{{"acceptance", acc},
              {"scales", t.scales.rho},
              {"baseline_grid", t.baseline_grid},
              {"num_participants", t.num_participants},
              {"prob_unsusceptible", t.prob_unsusceptible},
              {"mean_gamma", t.mean_gamma},
              {"mean_kappa", t.mean_kappa}};
    if (cpo) meta["cpo"] = {{"draws", cpo->draws}, {"neg_loglik_lse", cpo->neg_loglik_lse}};
    return meta;
}

void write_fit_outputs(const FitResult& fit, const fs::path& out)
{
    fs::create_directories(out);
    write_json_file(out / "config.json", to_json(fit.config));
    for (std::size_t c = 0; c < fit.chains.size(); ++c) {
        std::ostringstream os;
        write_trace_csv(fit.chains[c], os);
        write_text_file(out / (chain_stem(c) + ".csv"), os.str());
        const CpoPartial* part = c < fit.cpo_parts.size() ? &fit.cpo_parts[c] : nullptr;
        write_json_file(out / (chain_stem(c) + "_meta.json"), chain_meta(fit.chains[c], part));
    }
    write_json_file(out / "summary.json", summary_to_json(fit));
}

int cmd_simulate(const std::string& config_path, const fs::path& out, std::optional<std::uint64_t> seed,
                 const std::string& baseline)
{
    json cfg = config_path.empty() ? json::object() : read_json_file(config_path);
    std::uint64_t s = 1;
    if (cfg.contains("seed")) {
        s = cfg.at("seed").get<std::uint64_t>();
        cfg.erase("seed");
    }
    if (seed) s = *seed;
    SimConfig sim = sim_config_from_json(cfg);
    if (!baseline.empty()) sim.baseline = parse_baseline_variant(baseline);
    const auto [data, truth] = simulate_dataset(sim, s);
    save_dataset(data, out / "events.csv");
    write_json_file(out / "truth.json", json{{"config", to_json(sim)}, {"seed", s}, {"truth", to_json(truth)}});
    std::printf("wrote %zu participants in %zu clusters to %s\n", data.size(), data.num_clusters(),
                (out / "events.csv").c_str());
    return 0;
}

int cmd_fit(const fs::path& data_path, const std::string& config_path, const fs::path& out, const Overrides& o,
            std::size_t threads)
{
    FitConfig config = config_path.empty() ? FitConfig{} : load_fit_config(config_path);
    apply(o, config);
    const Dataset data = load_dataset(data_path);
    const FitResult fit = fit_model(data, config, threads);
    write_fit_outputs(fit, out);
    std::printf("%s: %zu chains x %zu draws", std::string(to_string(config.mcmc.variant)).c_str(), fit.chains.size(),
                fit.chains.front().num_draws);
    if (fit.cpo) std::printf(", LPML %.2f", fit.cpo->lpml);
    if (fit.loglik_psrf) std::printf(", log-likelihood PSRF %.3f", *fit.loglik_psrf);
    std::printf("\n");
    return 0;
}

int cmd_summarize(const fs::path& dir, const fs::path& out)
{
    const FitConfig config = load_fit_config(dir / "config.json");
    std::vector<ChainTrace> chains;
    std::vector<CpoPartial> parts;
    for (std::size_t c = 0;; ++c) {
        const fs::path trace_path = dir / (chain_stem(c) + ".csv");
        if (!fs::exists(trace_path)) break;
        std::ifstream in(trace_path);
        ChainTrace t = read_trace_csv(in);
        const json meta = read_json_file(dir / (chain_stem(c) + "_meta.json"));
        const auto& acc = meta.at("acceptance");
        for (std::size_t b = 0; b < kNumBlocks && b < acc.size(); ++b) {
            t.acceptance[b].proposed = acc[b][0].get<std::uint64_t>();
            t.acceptance[b].accepted = acc[b][1].get<std::uint64_t>();
        }
        t.baseline_grid = meta.at("baseline_grid").get<std::vector<double>>();
        t.num_participants = meta.at("num_participants").get<std::size_t>();
        if (meta.contains("cpo"))
            parts.push_back({meta["cpo"]["neg_loglik_lse"].get<std::vector<double>>(), meta["cpo"]["draws"].get<std::size_t>()});
        chains.push_back(std::move(t));
    }
    if (chains.empty()) throw DataError("no chain traces found in " + dir.string());
    if (parts.size() != chains.size()) parts.clear();
    const FitResult fit = summarize_chains(std::move(chains), config, std::move(parts));
    write_json_file(out / "summary.json", summary_to_json(fit));
    std::printf("wrote %s\n", (out / "summary.json").c_str());
    return 0;
}

int cmd_study(const std::string& config_path, const fs::path& out, const Overrides& o, std::size_t threads)
{
    StudyConfig config = config_path.empty() ? StudyConfig{} : study_config_from_json(read_json_file(config_path));
    if (o.seed) config.seed = *o.seed;
    if (o.chains) config.fit.mcmc.chains = *o.chains;
    if (!o.variant.empty()) config.variants = {parse_model_variant(o.variant)};
    if (!o.baseline.empty()) {
        config.sim.baseline = parse_baseline_variant(o.baseline);
        config.fit.mcmc.baseline = config.sim.baseline;
    }
    const StudyReport report =
        run_replicate_study(config, threads, [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); });
    fs::create_directories(out);
    write_json_file(out / "report.json", report_to_json(report));
    write_text_file(out / "report.txt", report_table(report));
    write_json_file(out / "timing.json", timing_to_json(report));
    std::cout << report_table(report);
    std::printf("wall clock %.1f s\n", report.wall_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bayesian zero-inflated recurrent event and terminal event models"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_path;
    std::string out_path;
    Overrides o;
    std::uint64_t seed = 0;
    std::size_t chains = 0;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file (JSON)");
        sub->add_option("--out", out_path, "output location")->required();
        sub->add_option("--seed", seed, "random seed");
    };

    auto* sim = app.add_subcommand("simulate", "simulate a dataset and its generating truth");
    add_common(sim);
    sim->add_option("--baseline", o.baseline, "piecewise or powerlaw");

    auto* fit = app.add_subcommand("fit", "fit a model to an events file");
    add_common(fit);
    fit->add_option("--data", data_path, "events CSV")->required();
    fit->add_option("--chains", chains, "number of chains");
    fit->add_option("--variant", o.variant, "BMZ-DP, BM-DP, BZ-DP or BMZ");
    fit->add_option("--baseline", o.baseline, "piecewise or powerlaw");
    fit->add_option("--threads", threads, "worker threads");

    auto* study = app.add_subcommand("replicate-study", "simulate, fit and score replicates");
    add_common(study);
    study->add_option("--chains", chains, "chains per fit");
    study->add_option("--variant", o.variant, "restrict to one variant");
    study->add_option("--baseline", o.baseline, "piecewise or powerlaw");
    study->add_option("--threads", threads, "worker threads");

    auto* summarize = app.add_subcommand("summarize", "rebuild summary.json from a fit output directory");
    summarize->add_option("--data", data_path, "fit output directory")->required();
    summarize->add_option("--out", out_path, "output directory for summary.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed() || fit->parsed() || study->parsed()) {
            if (sim->count("--seed") || fit->count("--seed") || study->count("--seed")) o.seed = seed;
            if (fit->count("--chains") || study->count("--chains")) o.chains = chains;
        }
        if (sim->parsed()) return cmd_simulate(config_path, out_path, o.seed, o.baseline);
        if (fit->parsed()) return cmd_fit(data_path, config_path, out_path, o, threads);
        if (study->parsed()) return cmd_study(config_path, out_path, o, threads);
        if (summarize->parsed()) return cmd_summarize(data_path, out_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

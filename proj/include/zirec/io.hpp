#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "zirec/model.hpp"
#include "zirec/sampler.hpp"
#include "zirec/simulate.hpp"

namespace zirec {

/// Resolved fit configuration: the `model` section maps onto McmcConfig (variant, baseline,
/// likelihood mode) and Hyperparams (fixed_p, u_intercept).
struct FitConfig {
    McmcConfig mcmc;
    Hyperparams hyper;
};

/// 17 significant digits; parses back to the same double.
std::string format_double(double x);

nlohmann::json to_json(const FitConfig& config);
/// Missing keys keep their defaults; unknown keys and invalid values throw ConfigError.
FitConfig fit_config_from_json(const nlohmann::json& j);
FitConfig load_fit_config(const std::filesystem::path& path);

nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimTruth& truth);

/// Events CSV: cluster_id,participant_id,followup_time,event_indicator,event_times,x_1..,z_1..,u_1..
/// event_times is a semicolon-joined list. Cluster ids must be 0..J-1. Errors name the file line.
void write_dataset_csv(const Dataset& data, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

void write_trace_csv(const ChainTrace& trace, std::ostream& out);
/// Restores columns, values and the log-likelihood series.
ChainTrace read_trace_csv(std::istream& in);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace zirec

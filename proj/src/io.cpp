#include "zirec/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "zirec/errors.hpp"

namespace zirec {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> keys)
{
    if (!j.is_object()) throw ConfigError("section '" + std::string(section) + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError("unknown key '" + k + "' in section '" + std::string(section) + "'");
    }
}

template <class T>
void read_field(const json& j, const char* key, T& out)
{
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(std::string(key) + " must be a boolean");
        out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError(std::string(key) + " must be a non-negative integer");
        out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
        out = v.get<T>();
    } else {
        if (!v.is_string()) throw ConfigError(std::string(key) + " must be a string");
        out = v.get<std::string>();
    }
}

double parse_double(std::string_view s, std::size_t line_no, std::string_view column)
{
    double x = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw DataError("line " + std::to_string(line_no) + ", column " + std::string(column) + ": cannot parse '" +
                        std::string(s) + "'");
    return x;
}

long long parse_int(std::string_view s, std::size_t line_no, std::string_view column)
{
    long long x = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (s.empty() || res.ec != std::errc() || res.ptr != end)
        throw DataError("line " + std::to_string(line_no) + ", column " + std::string(column) + ": expected an integer, got '" +
                        std::string(s) + "'");
    return x;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim_cr(std::string_view s)
{
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

}  // namespace

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// Configuration

json to_json(const FitConfig& c)
{
    const Hyperparams& h = c.hyper;
    const McmcConfig& m = c.mcmc;
    json model{{"variant", to_string(m.variant)},
               {"baseline_variant", to_string(m.baseline)},
               {"likelihood_mode", to_string(m.likelihood_mode)},
               {"fixed_p", h.fixed_p ? json(*h.fixed_p) : json(nullptr)},
               {"u_intercept", h.u_intercept}};
    json hyper{{"a_sigma", h.a_sigma},         {"b_sigma", h.b_sigma},
               {"sigma2_zeta", h.sigma2_zeta}, {"sigma2_xi1", h.sigma2_xi1},
               {"sigma2_xi2", h.sigma2_xi2},   {"a_tau", h.a_tau},
               {"b_tau", h.b_tau},             {"a_kappa", h.a_kappa},
               {"b_kappa", h.b_kappa},         {"sigma2_mu", h.sigma2_mu},
               {"a_phi", h.a_phi},             {"b_phi", h.b_phi},
               {"a_psi", h.a_psi},             {"b_psi", h.b_psi},
               {"kappa_truncation", h.kappa_truncation},
               {"mu_truncation", h.mu_truncation},
               {"grid_count", h.grid_count}};
    json scales = json::object();
    for (std::size_t b = 0; b < kNumBlocks; ++b) scales[std::string(block_name(static_cast<Block>(b)))] = m.initial_scales.rho[b];
    json mcmc{{"iterations", m.iterations},
              {"burn_in", m.burn_in},
              {"thin", m.thin},
              {"chains", m.chains},
              {"seed", m.seed},
              {"adapt_window", m.adapt_window},
              {"freeze_concentration", m.freeze_concentration},
              {"store_participant_loglik", m.store_participant_loglik},
              {"initial_scales", scales}};
    return json{{"model", model}, {"hyper", hyper}, {"mcmc", mcmc}};
}

FitConfig fit_config_from_json(const json& j)
{
    reject_unknown(j, "root", {"model", "hyper", "mcmc"});
    FitConfig c;
    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown(m, "model", {"variant", "baseline_variant", "likelihood_mode", "fixed_p", "u_intercept"});
        std::string s;
        if (m.contains("variant")) {
            read_field(m, "variant", s);
            c.mcmc.variant = parse_model_variant(s);
        }
        if (m.contains("baseline_variant")) {
            read_field(m, "baseline_variant", s);
            c.mcmc.baseline = parse_baseline_variant(s);
        }
        if (m.contains("likelihood_mode")) {
            read_field(m, "likelihood_mode", s);
            c.mcmc.likelihood_mode = parse_likelihood_mode(s);
        }
        if (m.contains("fixed_p") && !m.at("fixed_p").is_null()) {
            double p = 0.0;
            read_field(m, "fixed_p", p);
            c.hyper.fixed_p = p;
        }
        read_field(m, "u_intercept", c.hyper.u_intercept);
    }
    if (j.contains("hyper")) {
        const json& h = j.at("hyper");
        reject_unknown(h, "hyper",
                       {"a_sigma", "b_sigma", "sigma2_zeta", "sigma2_xi1", "sigma2_xi2", "a_tau", "b_tau", "a_kappa",
                        "b_kappa", "sigma2_mu", "a_phi", "b_phi", "a_psi", "b_psi", "kappa_truncation",
                        "mu_truncation", "grid_count"});
        Hyperparams& p = c.hyper;
        read_field(h, "a_sigma", p.a_sigma);
        read_field(h, "b_sigma", p.b_sigma);
        read_field(h, "sigma2_zeta", p.sigma2_zeta);
        read_field(h, "sigma2_xi1", p.sigma2_xi1);
        read_field(h, "sigma2_xi2", p.sigma2_xi2);
        read_field(h, "a_tau", p.a_tau);
        read_field(h, "b_tau", p.b_tau);
        read_field(h, "a_kappa", p.a_kappa);
        read_field(h, "b_kappa", p.b_kappa);
        read_field(h, "sigma2_mu", p.sigma2_mu);
        read_field(h, "a_phi", p.a_phi);
        read_field(h, "b_phi", p.b_phi);
        read_field(h, "a_psi", p.a_psi);
        read_field(h, "b_psi", p.b_psi);
        read_field(h, "kappa_truncation", p.kappa_truncation);
        read_field(h, "mu_truncation", p.mu_truncation);
        read_field(h, "grid_count", p.grid_count);
    }
    if (j.contains("mcmc")) {
        const json& m = j.at("mcmc");
        reject_unknown(m, "mcmc",
                       {"iterations", "burn_in", "thin", "chains", "seed", "adapt_window", "freeze_concentration",
                        "store_participant_loglik", "initial_scales"});
        McmcConfig& p = c.mcmc;
        read_field(m, "iterations", p.iterations);
        read_field(m, "burn_in", p.burn_in);
        read_field(m, "thin", p.thin);
        read_field(m, "chains", p.chains);
        read_field(m, "seed", p.seed);
        read_field(m, "adapt_window", p.adapt_window);
        read_field(m, "freeze_concentration", p.freeze_concentration);
        read_field(m, "store_participant_loglik", p.store_participant_loglik);
        if (m.contains("initial_scales")) {
            const json& s = m.at("initial_scales");
            if (!s.is_object()) throw ConfigError("initial_scales must be an object");
            for (const auto& [k, v] : s.items()) {
                std::size_t b = 0;
                while (b < kNumBlocks && block_name(static_cast<Block>(b)) != k) ++b;
                if (b == kNumBlocks) throw ConfigError("unknown block '" + k + "' in initial_scales");
                if (!v.is_number()) throw ConfigError("initial scale for " + k + " must be a number");
                p.initial_scales.rho[b] = v.get<double>();
            }
        }
    }
    c.mcmc.validate();
    c.hyper.validate();
    return c;
}

FitConfig load_fit_config(const std::filesystem::path& path)
{
    return fit_config_from_json(read_json_file(path));
}

json to_json(const SimConfig& c)
{
    return json{{"num_participants", c.num_participants},
                {"num_clusters", c.num_clusters},
                {"baseline_variant", to_string(c.baseline)},
                {"levels", c.levels},
                {"weibull_shape", c.weibull_shape}};
}

SimConfig sim_config_from_json(const json& j)
{
    reject_unknown(j, "simulation", {"num_participants", "num_clusters", "baseline_variant", "levels", "weibull_shape"});
    SimConfig c;
    read_field(j, "num_participants", c.num_participants);
    read_field(j, "num_clusters", c.num_clusters);
    if (j.contains("baseline_variant")) {
        std::string s;
        read_field(j, "baseline_variant", s);
        c.baseline = parse_baseline_variant(s);
    }
    if (j.contains("levels")) {
        if (!j.at("levels").is_array()) throw ConfigError("levels must be an array");
        c.levels = j.at("levels").get<std::vector<double>>();
    }
    read_field(j, "weibull_shape", c.weibull_shape);
    c.validate();
    return c;
}

json to_json(const SimTruth& t)
{
    json baseline;
    if (t.baseline.is_piecewise()) {
        baseline = {{"variant", "piecewise"},
                    {"grid", t.baseline.piecewise_spec().grid},
                    {"levels", t.baseline.piecewise_spec().levels}};
    } else {
        baseline = {{"variant", "powerlaw"}, {"shape", t.baseline.shape()}};
    }
    std::vector<int> d(t.unsusceptible.begin(), t.unsusceptible.end());
    return json{{"beta", t.beta},
                {"alpha", t.alpha},
                {"alpha0", t.alpha0},
                {"xi1", t.xi1},
                {"xi2", t.xi2},
                {"zeta", t.zeta},
                {"log_gamma_variance", t.log_gamma_variance},
                {"mu_mixture", {{"means", t.mu_means}, {"sd", t.mu_sd}}},
                {"kappa_values", t.kappa_values},
                {"censoring_prob", t.censoring_prob},
                {"covariate_sd", t.covariate_sd},
                {"baseline", baseline},
                {"mu", t.mu},
                {"gamma", t.gamma},
                {"kappa", t.kappa},
                {"unsusceptible", d},
                {"p_unsusceptible", t.p_unsusceptible},
                {"terminal_time", t.terminal_time}};
}

// ---------------------------------------------------------------------------
// Events CSV

void write_dataset_csv(const Dataset& data, std::ostream& out)
{
    out << "cluster_id,participant_id,followup_time,event_indicator,event_times";
    for (std::size_t k = 1; k <= data.dim_x(); ++k) out << ",x_" << k;
    for (std::size_t k = 1; k <= data.dim_z(); ++k) out << ",z_" << k;
    for (std::size_t k = 1; k <= data.dim_u(); ++k) out << ",u_" << k;
    out << '\n';
    for (const auto& r : data.records()) {
        out << r.cluster << ',' << r.participant << ',' << format_double(r.followup_time) << ',' << r.event_indicator
            << ',';
        for (std::size_t k = 0; k < r.recurrent_times.size(); ++k)
            out << (k ? ";" : "") << format_double(r.recurrent_times[k]);
        for (double v : r.x) out << ',' << format_double(v);
        for (double v : r.z) out << ',' << format_double(v);
        for (double v : r.u) out << ',' << format_double(v);
        out << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw DataError("events file is empty");
    const auto header = split(trim_cr(line), ',');
    static constexpr std::array<std::string_view, 5> fixed{"cluster_id", "participant_id", "followup_time",
                                                           "event_indicator", "event_times"};
    if (header.size() < fixed.size()) throw DataError("header is missing required columns");
    for (std::size_t c = 0; c < fixed.size(); ++c)
        if (header[c] != fixed[c])
            throw DataError("header column " + std::to_string(c + 1) + " must be '" + std::string(fixed[c]) + "'");
    std::size_t dims[3] = {0, 0, 0};
    static constexpr char prefixes[3] = {'x', 'z', 'u'};
    std::size_t block = 0;
    for (std::size_t c = fixed.size(); c < header.size(); ++c) {
        const auto h = header[c];
        while (block < 3 && !(h.size() > 2 && h[0] == prefixes[block] && h[1] == '_')) ++block;
        if (block == 3 || h != std::string(1, prefixes[block]) + "_" + std::to_string(dims[block] + 1))
            throw DataError("unexpected header column '" + std::string(h) + "'");
        ++dims[block];
    }

    std::vector<ParticipantRecord> records;
    int max_cluster = -1;
    std::size_t line_no = 1;  // file line, header included
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim_cr(line);
        if (text.empty()) continue;
        const auto cells = split(text, ',');
        if (cells.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(cells.size()));
        ParticipantRecord r;
        const long long cluster = parse_int(cells[0], line_no, "cluster_id");
        if (cluster < 0 || cluster > 1'000'000'000)
            throw DataError("line " + std::to_string(line_no) + ", column cluster_id: must be in 0..J-1");
        r.cluster = static_cast<int>(cluster);
        r.participant = static_cast<int>(parse_int(cells[1], line_no, "participant_id"));
        r.followup_time = parse_double(cells[2], line_no, "followup_time");
        const long long delta = parse_int(cells[3], line_no, "event_indicator");
        if (delta != 0 && delta != 1)
            throw DataError("line " + std::to_string(line_no) + ", column event_indicator: must be 0 or 1");
        r.event_indicator = static_cast<int>(delta);
        if (!cells[4].empty())
            for (auto t : split(cells[4], ';')) r.recurrent_times.push_back(parse_double(t, line_no, "event_times"));
        std::size_t c = fixed.size();
        for (std::size_t k = 0; k < dims[0]; ++k, ++c) r.x.push_back(parse_double(cells[c], line_no, header[c]));
        for (std::size_t k = 0; k < dims[1]; ++k, ++c) r.z.push_back(parse_double(cells[c], line_no, header[c]));
        for (std::size_t k = 0; k < dims[2]; ++k, ++c) r.u.push_back(parse_double(cells[c], line_no, header[c]));
        try {
            r.validate();
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        max_cluster = std::max(max_cluster, r.cluster);
        records.push_back(std::move(r));
    }
    if (records.empty()) return Dataset::empty(dims[0], dims[1], dims[2]);
    return Dataset::create(std::move(records), static_cast<std::size_t>(max_cluster + 1), dims[0], dims[1], dims[2]);
}

void save_dataset(const Dataset& data, const std::filesystem::path& path)
{
    std::ostringstream os;
    write_dataset_csv(data, os);
    write_text_file(path, os.str());
}

Dataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open events file " + path.string());
    return read_dataset_csv(in);
}

// ---------------------------------------------------------------------------
// Traces

void write_trace_csv(const ChainTrace& trace, std::ostream& out)
{
    for (std::size_t c = 0; c < trace.columns.size(); ++c) out << (c ? "," : "") << trace.columns[c];
    out << '\n';
    for (std::size_t d = 0; d < trace.num_draws; ++d) {
        for (std::size_t c = 0; c < trace.columns.size(); ++c) out << (c ? "," : "") << format_double(trace.at(d, c));
        out << '\n';
    }
}

ChainTrace read_trace_csv(std::istream& in)
{
    ChainTrace t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("trace file is empty");
    for (auto h : split(trim_cr(line), ',')) t.columns.emplace_back(h);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto text = trim_cr(line);
        if (text.empty()) continue;
        const auto cells = split(text, ',');
        if (cells.size() != t.columns.size()) throw DataError("trace row " + std::to_string(row) + " has wrong width");
        for (std::size_t c = 0; c < cells.size(); ++c) t.values.push_back(parse_double(cells[c], row, t.columns[c]));
        ++t.num_draws;
    }
    if (t.has_column("loglik")) t.total_loglik = t.column("loglik");
    return t;
}

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace zirec

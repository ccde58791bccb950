// Runs acceptance criteria 1-10 and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--out DIR] [criterion numbers...]
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support/fixtures.hpp"
#include "../support/generator_checks.hpp"
#include "../support/ks.hpp"
#include "../support/mcse.hpp"
#include "../support/oracle.hpp"
#include "zirec/dp_mixture.hpp"
#include "zirec/io.hpp"
#include "zirec/sampler.hpp"
#include "zirec/simulate.hpp"
#include "zirec/study.hpp"

using namespace zirec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

void progress(const std::string& line) { std::fprintf(stderr, "  %s\n", line.c_str()); }

const AggregateRow* find_row(const VariantReport& v, const std::string& name)
{
    for (const auto& r : v.rows)
        if (r.name == name) return &r;
    return nullptr;
}

const VariantReport* find_variant(const StudyReport& s, ModelVariant m)
{
    for (const auto& v : s.variants)
        if (v.variant == m) return &v;
    return nullptr;
}

class Harness {
public:
    explicit Harness(std::optional<fs::path> out) : out_(std::move(out)) {}

    // The N = 600 study shared by criteria 1, 2 and 9.
    const StudyReport& main_study()
    {
        if (!main_) {
            StudyConfig c;
            c.sim.num_participants = 600;
            c.sim.num_clusters = 20;
            c.replicates = 25;
            c.seed = 1;
            c.fit.mcmc.iterations = 10000;
            c.fit.mcmc.burn_in = 5000;
            progress("running 25-replicate study (3 variants)");
            main_ = run_replicate_study(c, worker_count(), progress);
            save("main_study", *main_);
        }
        return *main_;
    }

    const StudyReport& weibull_study()
    {
        if (!weibull_) {
            StudyConfig c;
            c.sim.baseline = BaselineVariant::power_law;
            c.replicates = 10;
            c.variants = {ModelVariant::bmz_dp};
            c.seed = 2;
            c.fit.mcmc.baseline = BaselineVariant::power_law;
            c.fit.mcmc.iterations = 10000;
            c.fit.mcmc.burn_in = 5000;
            progress("running 10-replicate power-law study");
            weibull_ = run_replicate_study(c, worker_count(), progress);
            save("weibull_study", *weibull_);
        }
        return *weibull_;
    }

private:
    void save(const std::string& name, const StudyReport& r) const
    {
        if (!out_) return;
        write_json_file(*out_ / name / "report.json", report_to_json(r));
        write_text_file(*out_ / name / "report.txt", report_table(r));
        write_json_file(*out_ / name / "timing.json", timing_to_json(r));
    }

    std::optional<fs::path> out_;
    std::optional<StudyReport> main_;
    std::optional<StudyReport> weibull_;
};

Outcome criterion1(Harness& h)
{
    const auto* v = find_variant(h.main_study(), ModelVariant::bmz_dp);
    bool ok = v->failures == 0;
    std::ostringstream os;
    const SimTruth truth;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto* a = find_row(*v, "alpha_" + std::to_string(k + 1));
        const auto* b = find_row(*v, "beta_" + std::to_string(k + 1));
        const bool a_ok = std::abs(a->mean - truth.alpha[k]) <= 0.15 * truth.alpha[k] && a->coverage >= 0.8;
        const bool b_ok = std::abs(b->mean - truth.beta[k]) <= 0.12;
        ok = ok && a_ok && b_ok;
        os << "alpha_" << k + 1 << " " << fmt("%.3f", a->mean) << " cov " << fmt("%.0f%%", 100 * a->coverage)
           << "; beta_" << k + 1 << " " << fmt("%.3f", b->mean) << (k < 2 ? "; " : "");
    }
    if (v->failures) os << "; " << v->failures << " failed fits";
    return {ok, os.str()};
}

Outcome criterion2(Harness& h)
{
    const auto& s = h.main_study();
    const auto* full = find_variant(s, ModelVariant::bmz_dp);
    const auto* bm = find_variant(s, ModelVariant::bm_dp);
    const auto* bz = find_variant(s, ModelVariant::bz_dp);
    bool ok = true;
    std::ostringstream os;
    for (std::size_t k = 1; k <= 3; ++k) {
        const std::string name = "beta_" + std::to_string(k);
        const double f = find_row(*full, name)->bias;
        const double m = find_row(*bm, name)->bias;
        const double z = find_row(*bz, name)->bias;
        ok = ok && m < -80.0 && std::abs(f) < std::abs(m) && std::abs(f) < std::abs(z);
        os << name << " bias% BMZ-DP " << fmt("%.1f", f) << " BM-DP " << fmt("%.1f", m) << " BZ-DP " << fmt("%.1f", z)
           << (k < 3 ? "; " : "");
    }
    return {ok, os.str()};
}

Outcome criterion3(Harness& h)
{
    const auto* v = find_variant(h.weibull_study(), ModelVariant::bmz_dp);
    const SimTruth truth;
    bool ok = v->failures == 0;
    std::ostringstream os;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto* a = find_row(*v, "alpha_" + std::to_string(k + 1));
        ok = ok && std::abs(a->mean - truth.alpha[k]) <= 0.15 * truth.alpha[k];
        os << "alpha_" << k + 1 << " " << fmt("%.3f", a->mean) << "; ";
    }
    const auto* psi = find_row(*v, "psi");
    ok = ok && psi != nullptr && psi->mean >= 1.3 && psi->mean <= 1.7;
    if (psi) os << "psi " << fmt("%.3f", psi->mean);
    return {ok, os.str()};
}

Outcome criterion4(Harness&)
{
    Rng rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto inst = fixtures::random_instance(rng);
        for (auto mode : {LikelihoodMode::corrected, LikelihoodMode::literal})
            worst = std::max(worst, std::abs(total_log_likelihood(inst.data, inst.state, mode) -
                                             oracle::total(inst.data, inst.state, mode)));
    }
    return {worst <= 1e-10, "max |difference| " + fmt("%.2e", worst) + " over 50 instances, both modes"};
}

Outcome criterion5(Harness&)
{
    Rng rng(5);
    const std::size_t n = 10000;
    std::vector<double> pvalues;

    const std::vector<double> gammas{0.6, 1.4, 0.9, 2.2, 1.1, 0.75, 1.3};
    double ss = 0.0;
    for (double g : gammas) ss += std::log(g) * std::log(g);
    const Hyperparams hp;
    boost::math::inverse_gamma_distribution<> ig(hp.a_tau + gammas.size() / 2.0, hp.b_tau + ss / 2.0);
    std::vector<double> tau(n);
    for (auto& t : tau) t = gibbs_tau2(gammas, hp.a_tau, hp.b_tau, rng);
    pvalues.push_back(ks::one_sample(tau, [&](double x) { return boost::math::cdf(ig, x); }));

    const std::vector<int> counts{5, 0, 3, 2};
    const double phi = 1.3;
    std::vector<std::vector<double>> sticks(counts.size() - 1, std::vector<double>(n));
    for (std::size_t s = 0; s < n; ++s) {
        const auto v = posterior_stick_update(counts, phi, rng);
        for (std::size_t l = 0; l < v.size(); ++l) sticks[l][s] = v[l];
    }
    int tail = 10;
    for (std::size_t l = 0; l + 1 < counts.size(); ++l) {
        tail -= counts[l];
        boost::math::beta_distribution<> b(1.0 + counts[l], phi + tail);
        pvalues.push_back(ks::one_sample(sticks[l], [&](double x) { return boost::math::cdf(b, x); }));
    }
    std::ostringstream os;
    os << "KS p tau2 " << fmt("%.3f", pvalues[0]) << "; sticks";
    bool ok = true;
    for (std::size_t k = 0; k < pvalues.size(); ++k) {
        ok = ok && pvalues[k] > 0.01;
        if (k > 0) os << " " << fmt("%.3f", pvalues[k]);
    }
    return {ok, os.str()};
}

Outcome criterion6(Harness&)
{
    // Under sigma2 ~ IG(1/2, 1/2) the marginals of beta and alpha are Cauchy; beta / sigma is N(0, I).
    // sigma2 wanders over orders of magnitude, so a frozen-scale walk has excursions far longer than
    // any batch: the MC standard error comes from independent chains instead. Vector blocks are
    // checked through their component average and mean squared component.
    const Dataset d = Dataset::empty(3, 3, 4);
    McmcConfig c;
    c.burn_in = 2000;
    c.iterations = c.burn_in + 500000;
    c.baseline = BaselineVariant::power_law;  // a piecewise grid needs observed events
    c.seed = 6;
    const Hyperparams hp;
    constexpr std::size_t kChains = 20;

    struct Block {
        std::string name;
        double m1, m2;  // prior E[x], E[x^2]
        std::function<std::vector<double>(const ParamState&)> values;
    };
    auto scaled = [](const std::vector<double>& v, double scale2) {
        std::vector<double> out(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] / std::sqrt(scale2);
        return out;
    };
    const double ka = hp.a_kappa, kb = hp.b_kappa;
    const std::vector<Block> blocks{
        {"beta/sigma", 0.0, 1.0, [&](const ParamState& s) { return scaled(s.beta, s.sigma2_beta); }},
        {"alpha/sigma", 0.0, 1.0, [&](const ParamState& s) { return scaled(s.alpha, s.sigma2_alpha); }},
        {"xi1", 0.0, hp.sigma2_xi1, [](const ParamState& s) { return std::vector<double>{s.xi1}; }},
        {"xi2", 0.0, hp.sigma2_xi2, [](const ParamState& s) { return std::vector<double>{s.xi2}; }},
        {"zeta", 0.0, hp.sigma2_zeta, [](const ParamState& s) { return s.zeta; }},
        {"mu atom", 0.0, hp.sigma2_mu, [](const ParamState& s) { return std::vector<double>{s.mu_dp.atoms[0]}; }},
        {"kappa atom", ka / kb, ka * (ka + 1.0) / (kb * kb),
         [](const ParamState& s) { return std::vector<double>{s.kappa_dp.atoms[0]}; }},
    };

    // per block, per chain: mean of x and of x^2
    std::vector<std::vector<double>> first(blocks.size()), second(blocks.size());
    for (std::size_t chain = 0; chain < kChains; ++chain) {
        GibbsSampler s(d, c, hp, chain);
        std::vector<double> s1(blocks.size(), 0.0), s2(blocks.size(), 0.0);
        for (std::size_t it = 0; it < c.iterations; ++it) {
            s.sweep();
            if (it < c.burn_in) {
                if ((it + 1) % c.adapt_window == 0) s.adapt();
                continue;
            }
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                const auto v = blocks[b].values(s.state());
                for (double x : v) {
                    s1[b] += x / v.size();
                    s2[b] += x * x / v.size();
                }
            }
        }
        const double kept = static_cast<double>(c.iterations - c.burn_in);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            first[b].push_back(s1[b] / kept);
            second[b].push_back(s2[b] / kept);
        }
    }

    bool ok = true;
    double worst = 0.0;
    std::string worst_name;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const double z1 = (mcse::mean(first[b]) - blocks[b].m1) / std::sqrt(mcse::variance(first[b]) / kChains);
        const double z2 = (mcse::mean(second[b]) - blocks[b].m2) / std::sqrt(mcse::variance(second[b]) / kChains);
        if (std::getenv("ACCEPTANCE_VERBOSE"))
            std::fprintf(stderr, "  %-12s z(mean) %6.2f  z(second moment) %6.2f\n", blocks[b].name.c_str(), z1, z2);
        for (double z : {z1, z2}) {
            if (!(std::abs(z) <= 3.0)) ok = false;
            if (!(std::abs(z) <= worst)) {
                worst = std::abs(z);
                worst_name = blocks[b].name;
            }
        }
    }
    return {ok, std::to_string(2 * blocks.size()) + " moment checks over " + std::to_string(kChains) +
                    " chains; largest |error| " + fmt("%.2f", worst) + " MC SE (" + worst_name + ")"};
}

Outcome criterion7(Harness&)
{
    const auto pw = BaselineHazard::piecewise({0.0, 0.2, 0.5, 1.0, 1.6, 2.5}, {2.0, 2.3, 2.1, 2.4, 1.7});
    const double p_pw = generator_checks::nhpp_rescaling_pvalue(pw, 2.5, 71);
    const double p_pl = generator_checks::nhpp_rescaling_pvalue(BaselineHazard::power_law(1.5), 3.0, 72);
    const auto surv = generator_checks::terminal_survival(2.2, 73);
    std::ostringstream os;
    os << "KS p piecewise " << fmt("%.3f", p_pw) << ", power-law " << fmt("%.3f", p_pl)
       << "; survival z at t=0.5,1,2:";
    for (double z : surv.z_score) os << " " << fmt("%.2f", z);
    return {p_pw > 0.01 && p_pl > 0.01 && surv.within(3.0), os.str()};
}

Outcome criterion8(Harness&)
{
    SimConfig sc;
    const Dataset d = simulate_dataset(sc, derive_seed(8, 0)).first;
    FitConfig fc;
    fc.mcmc.iterations = 10000;
    fc.mcmc.burn_in = 5000;
    fc.mcmc.chains = 3;
    fc.mcmc.seed = derive_seed(8, 1);
    progress("running 3-chain fit");
    const FitResult fit = fit_model(d, fc, worker_count());
    const double psrf = fit.loglik_psrf.value_or(std::numeric_limits<double>::infinity());
    return {psrf < 1.2, "log-likelihood PSRF " + fmt("%.4f", psrf)};
}

Outcome criterion9(Harness& h)
{
    const auto& s = h.main_study();
    const auto* full = find_variant(s, ModelVariant::bmz_dp);
    const auto* bm = find_variant(s, ModelVariant::bm_dp);
    double sum_full = 0.0, sum_bm = 0.0;
    std::size_t n = 0, wins = 0;
    for (std::size_t r = 0; r < full->replicates.size(); ++r) {
        const auto& a = full->replicates[r];
        const auto& b = bm->replicates[r];
        if (!a.ok || !b.ok) continue;
        sum_full += a.lpml;
        sum_bm += b.lpml;
        wins += a.lpml > b.lpml;
        ++n;
    }
    const double mf = sum_full / n, mb = sum_bm / n;
    return {n > 0 && mf > mb, "mean LPML BMZ-DP " + fmt("%.2f", mf) + " vs BM-DP " + fmt("%.2f", mb) + " (" +
                                  std::to_string(wins) + "/" + std::to_string(n) + " replicates favour BMZ-DP)"};
}

Outcome criterion10(Harness&)
{
    SimConfig sc;
    sc.num_participants = 120;
    sc.num_clusters = 6;
    const Dataset d = simulate_dataset(sc, 10).first;
    FitConfig fc;
    fc.mcmc.iterations = 1500;
    fc.mcmc.burn_in = 500;
    fc.mcmc.chains = 2;
    fc.mcmc.seed = 10;
    const FitResult a = fit_model(d, fc, worker_count());
    const FitResult b = fit_model(d, fc, 1);
    bool traces = a.chains == b.chains;
    for (std::size_t c = 0; c < a.chains.size(); ++c) {
        std::ostringstream ta, tb;
        write_trace_csv(a.chains[c], ta);
        write_trace_csv(b.chains[c], tb);
        traces = traces && ta.str() == tb.str();
    }
    const bool summaries = summary_to_json(a).dump() == summary_to_json(b).dump();

    StudyConfig st;
    st.sim.num_participants = 60;
    st.sim.num_clusters = 6;
    st.replicates = 2;
    st.fit.mcmc.iterations = 300;
    st.fit.mcmc.burn_in = 100;
    const bool reports = report_to_json(run_replicate_study(st, worker_count())).dump() ==
                         report_to_json(run_replicate_study(st, 1)).dump();
    return {traces && summaries && reports, std::string("traces ") + (traces ? "identical" : "differ") +
                                                ", summaries " + (summaries ? "identical" : "differ") + ", reports " +
                                                (reports ? "identical" : "differ")};
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome(Harness&)> run;
};

}  // namespace

int main(int argc, char** argv)
{
    std::optional<fs::path> out;
    std::set<int> only;
    for (int k = 1; k < argc; ++k) {
        const std::string arg = argv[k];
        if (arg == "--out" && k + 1 < argc)
            out = argv[++k];
        else
            only.insert(std::stoi(arg));
    }

    const std::vector<Criterion> criteria{
        {1, "scaled replication, BMZ-DP means and coverage", criterion1},
        {2, "ablation ordering of recurrent biases", criterion2},
        {3, "power-law baseline spot check", criterion3},
        {4, "likelihood against brute-force oracle", criterion4},
        {5, "conjugate-step KS tests", criterion5},
        {6, "prior recovery on empty data", criterion6},
        {7, "NHPP and terminal-time generators", criterion7},
        {8, "3-chain log-likelihood PSRF", criterion8},
        {9, "LPML favours BMZ-DP over BM-DP", criterion9},
        {10, "determinism of traces and reports", criterion10},
    };

    Harness h(out);
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run(h);
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %2d %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

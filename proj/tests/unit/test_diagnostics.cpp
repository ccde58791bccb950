#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numeric>

#include "zirec/diagnostics.hpp"
#include "zirec/errors.hpp"
#include "zirec/rng.hpp"

using namespace zirec;

namespace {

ChainTrace chain_with(std::vector<double> values, std::vector<double> loglik, std::size_t participants)
{
    ChainTrace c;
    c.columns = {"x"};
    c.num_draws = values.size();
    c.values = std::move(values);
    c.total_loglik = std::vector<double>(c.num_draws, 0.0);
    c.participant_loglik = std::move(loglik);
    c.num_participants = participants;
    return c;
}

}  // namespace

TEST_CASE("posterior_summary examples")
{
    const std::vector<double> constant(50, 2.5);
    const auto c = posterior_summary(constant);
    CHECK(c.mean == 2.5);
    CHECK(c.sd == 0.0);
    CHECK(c.q025 == 2.5);
    CHECK(c.q975 == 2.5);

    std::vector<double> seq(100);
    std::iota(seq.begin(), seq.end(), 1.0);
    std::reverse(seq.begin(), seq.end());
    const auto s = posterior_summary(seq);
    CHECK(s.q50 == doctest::Approx(50.5).epsilon(1e-15));
    CHECK(s.q025 == doctest::Approx(3.475).epsilon(1e-14));
    CHECK(s.q975 == doctest::Approx(97.525).epsilon(1e-14));
    CHECK(s.mean == 50.5);

    Rng rng(1);
    std::vector<double> normals(100000);
    for (auto& x : normals) x = rng.normal();
    const auto n = posterior_summary(normals);
    CHECK(std::abs(n.mean) < 0.01);
    CHECK(std::abs(n.q975 - 1.96) < 0.03);
    CHECK(std::abs(n.sd - 1.0) < 0.01);

    CHECK_THROWS_AS(posterior_summary(std::vector<double>{}), ContractViolation);
    const std::vector<double> one{4.0};
    CHECK(posterior_summary(one).q975 == 4.0);
}

TEST_CASE("gelman_rubin_psrf examples")
{
    Rng rng(2);
    std::vector<double> a(10000), b(10000);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    const std::vector<std::vector<double>> same{a, a};
    CHECK(gelman_rubin_psrf(same) == doctest::Approx(std::sqrt(9999.0 / 10000.0)).epsilon(1e-12));
    const std::vector<std::vector<double>> independent{a, b};
    CHECK(gelman_rubin_psrf(independent) < 1.01);
    std::vector<double> shifted = b;
    for (auto& x : shifted) x += 50.0;
    const std::vector<std::vector<double>> offset{a, shifted};
    CHECK(gelman_rubin_psrf(offset) > 1.2);
    const std::vector<std::vector<double>> flat{std::vector<double>(5, 1.0), std::vector<double>(5, 1.0)};
    CHECK(gelman_rubin_psrf(flat) == 1.0);

    const std::vector<std::vector<double>> single{a};
    CHECK_THROWS_AS(gelman_rubin_psrf(single), ContractViolation);
    const std::vector<std::vector<double>> ragged{{1.0, 2.0}, {1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(gelman_rubin_psrf(ragged), ContractViolation);
    const std::vector<std::vector<double>> short_chains{{1.0}, {2.0}};
    CHECK_THROWS_AS(gelman_rubin_psrf(short_chains), ContractViolation);

    // direct formula
    const std::vector<std::vector<double>> tiny{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}};
    const double w = (1.0 + 4.0) / 2.0;
    const double bb = 3.0 * ((2.0 - 3.0) * (2.0 - 3.0) + (4.0 - 3.0) * (4.0 - 3.0)) / 1.0;
    CHECK(gelman_rubin_psrf(tiny) == doctest::Approx(std::sqrt((2.0 / 3.0 * w + bb / 3.0) / w)).epsilon(1e-14));
}

TEST_CASE("cpo_lpml examples")
{
    const std::vector<double> constant(10 * 3, -1.25);
    const auto c = cpo_lpml(constant, 10, 3);
    for (double l : c.log_cpo) CHECK(l == doctest::Approx(-1.25).epsilon(1e-14));
    CHECK(c.lpml == doctest::Approx(-3.75).epsilon(1e-14));

    const std::vector<double> two{std::log(1.0), std::log(3.0)};
    CHECK(std::exp(cpo_lpml(two, 2, 1).log_cpo[0]) == doctest::Approx(1.5).epsilon(1e-14));

    std::vector<double> bad(6, -1.0);
    bad[4] = std::numeric_limits<double>::quiet_NaN();  // draw 2, participant 0
    try {
        cpo_lpml(bad, 3, 2);
        FAIL("expected DegenerateDistribution");
    } catch (const DegenerateDistribution& e) {
        const std::string msg = e.what();
        CHECK(msg.find("draw 2") != std::string::npos);
        CHECK(msg.find("participant 0") != std::string::npos);
    }
}

TEST_CASE("cpo_lpml matches a 50-digit harmonic-mean oracle")
{
    using big = boost::multiprecision::cpp_bin_float_50;
    Rng rng(3);
    const std::size_t S = 400, n = 25;
    std::vector<double> ll(S * n);
    for (auto& x : ll) x = rng.normal(-3.0, 4.0);
    const auto got = cpo_lpml(ll, S, n);
    big lpml = 0;
    for (std::size_t i = 0; i < n; ++i) {
        big acc = 0;
        for (std::size_t s = 0; s < S; ++s) acc += boost::multiprecision::exp(-big(ll[s * n + i]));
        const big log_cpo = -boost::multiprecision::log(acc / S);
        CHECK(got.log_cpo[i] == doctest::Approx(log_cpo.convert_to<double>()).epsilon(1e-12));
        lpml += log_cpo;
    }
    CHECK(std::abs(got.lpml - lpml.convert_to<double>()) < 1e-10);
}

TEST_CASE("LPML pooled over chains equals the single-matrix value")
{
    Rng rng(4);
    const std::size_t n = 7;
    std::vector<ChainTrace> chains;
    std::vector<double> all;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> ll(50 * n);
        for (auto& x : ll) x = rng.normal(-2.0, 1.0);
        all.insert(all.end(), ll.begin(), ll.end());
        chains.push_back(chain_with(std::vector<double>(50, 0.0), ll, n));
    }
    const auto pooled = cpo_lpml(chains);
    const auto direct = cpo_lpml(all, 150, n);
    CHECK(pooled.lpml == doctest::Approx(direct.lpml).epsilon(1e-13));

    // draw order does not matter
    std::vector<double> reversed;
    for (std::size_t s = 150; s-- > 0;) reversed.insert(reversed.end(), all.begin() + s * n, all.begin() + (s + 1) * n);
    CHECK(cpo_lpml(reversed, 150, n).lpml == doctest::Approx(direct.lpml).epsilon(1e-13));

    std::vector<CpoPartial> parts;
    for (const auto& c : chains) parts.push_back(cpo_partial(c));
    CHECK(combine_cpo(parts).lpml == pooled.lpml);
}

TEST_CASE("PSRF and summaries over traces")
{
    auto a = chain_with({1.0, 2.0, 3.0}, {}, 0);
    auto b = chain_with({2.0, 4.0, 6.0}, {}, 0);
    a.total_loglik = {1.0, 2.0, 3.0};
    b.total_loglik = {2.0, 4.0, 6.0};
    const std::vector<ChainTrace> chains{a, b};
    const std::vector<std::vector<double>> raw{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}};
    CHECK(gelman_rubin_psrf(chains, "x") == gelman_rubin_psrf(raw));
    CHECK(loglik_psrf(chains) == gelman_rubin_psrf(raw));
    CHECK(posterior_summary(chains, "x").mean == 3.0);
}

TEST_CASE("replicate_aggregate examples")
{
    auto estimate = [](double mean, double lo, double hi, double truth, std::string name = "beta_1") {
        PosteriorSummary s;
        s.mean = mean;
        s.q025 = lo;
        s.q975 = hi;
        return ReplicateEstimate{std::move(name), s, truth};
    };
    SUBCASE("exact")
    {
        std::vector<std::vector<ReplicateEstimate>> reps(4, {estimate(0.4, 0.1, 0.7, 0.4)});
        const auto rows = replicate_aggregate(reps);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].bias == 0.0);
        CHECK(rows[0].coverage == 1.0);
        CHECK(rows[0].replicates == 4);
    }
    SUBCASE("ten percent")
    {
        std::vector<std::vector<ReplicateEstimate>> reps(5, {estimate(0.33, 0.0, 1.0, 0.3)});
        CHECK(replicate_aggregate(reps)[0].bias == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("coverage counting")
    {
        std::vector<std::vector<ReplicateEstimate>> reps;
        for (int r = 0; r < 20; ++r)
            reps.push_back({r == 7 ? estimate(0.9, 0.8, 1.0, 0.2) : estimate(0.2, 0.1, 0.3, 0.2)});
        CHECK(replicate_aggregate(reps)[0].coverage == doctest::Approx(0.95));
    }
    SUBCASE("zero truth uses absolute bias")
    {
        std::vector<std::vector<ReplicateEstimate>> reps{{estimate(0.1, -1, 1, 0.0, "m")}, {estimate(0.3, -1, 1, 0.0, "m")}};
        const auto row = replicate_aggregate(reps)[0];
        CHECK(row.bias_absolute);
        CHECK(row.bias == doctest::Approx(0.2));
    }
    SUBCASE("rows keep first-seen order and mismatched truth throws")
    {
        std::vector<std::vector<ReplicateEstimate>> reps{
            {estimate(1, 0, 2, 1, "b"), estimate(1, 0, 2, 1, "a")},
            {estimate(1, 0, 2, 1, "b"), estimate(1, 0, 2, 1, "a")}};
        const auto rows = replicate_aggregate(reps);
        CHECK(rows[0].name == "b");
        CHECK(rows[1].name == "a");
        reps[1][0].truth = 2.0;
        CHECK_THROWS_AS(replicate_aggregate(reps), ContractViolation);
    }
}

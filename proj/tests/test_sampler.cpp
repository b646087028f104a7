#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "fracfact/design.hpp"
#include "fracfact/error.hpp"
#include "fracfact/fiber.hpp"
#include "fracfact/glm.hpp"
#include "fracfact/model.hpp"
#include "fracfact/sampler.hpp"

using namespace fracfact;

namespace {

std::vector<MoveVec> kernel_moves(const IntMatrix& m) {
    std::vector<MoveVec> basis;
    for (const auto& z : kernel_basis(m)) {
        MoveVec v(z.size());
        for (size_t i = 0; i < z.size(); ++i)
            v[i] = to_long_checked(z[i]);
        basis.push_back(std::move(v));
    }
    return basis;
}

struct Toy {
    IntMatrix x0t;
    std::vector<long long> y0;
    MoveSet moves;
    FitResult fit;
    Statistic statistic;
    Fiber fiber;
    std::vector<double> probs;
    double exact_p = 0.0;
};

// A 2^{5-2} instance small enough to enumerate exactly.
Toy make_toy() {
    DesignSpec spec(5, {Generator{4, Word::parse("AB", 5)}, Generator{5, Word::parse("AC", 5)}});
    auto d = build_design_matrix(spec);
    auto x0 = build_covariate_matrix(d, ModelSpec::parse("A/B/C/D/E", 5));
    auto x0t = x0.x0_transposed();
    std::vector<long long> y0 = {4, 1, 2, 3, 0, 2, 5, 1};
    auto fit = fit_glm(x0, y0, Family::poisson);
    long long total = 0;
    for (long long v : y0)
        total += v;
    auto statistic = make_deviance_statistic(fit.mu, total);

    std::vector<long long> t(x0t.rows());
    for (int r = 0; r < x0t.rows(); ++r) {
        long long s = 0;
        for (int c = 0; c < x0t.cols(); ++c)
            s += to_long_checked(x0t.at(r, c)) * y0[c];
        t[r] = s;
    }
    auto fiber = enumerate_fiber(x0t, t);
    auto probs = exact_null_distribution(fiber, Family::poisson);
    double t_obs = statistic(y0);
    double exact_p = exact_pvalue(
        fiber, probs, [&](std::span<const long long> y) { return statistic(y); }, t_obs);

    Toy toy{x0t,
            y0,
            graver_completion(kernel_moves(x0t), x0t),
            fit,
            std::move(statistic),
            std::move(fiber),
            std::move(probs),
            exact_p};
    return toy;
}

} // namespace

TEST_CASE("feasible_range arithmetic") {
    std::vector<long long> y = {1, 1, 1, 1, 0, 0, 0, 0};
    std::vector<long long> z = {1, -1, -1, 1, 0, 0, 0, 0};
    auto r = feasible_range(y, z);
    CHECK(r.lo == -1);
    CHECK(r.hi == 1);
    CHECK(r.size() == 3);

    // a zero cell against a negative component blocks that side
    std::vector<long long> y2 = {0, 3, 3, 0, 0, 0, 0, 0};
    auto r2 = feasible_range(y2, z);
    CHECK(r2.lo == 0);
    CHECK(r2.hi == 3);

    // bounds cap the other side (binomial-style)
    std::vector<long long> y3 = {0, 2, 2, 0, 0, 0, 0, 0};
    std::vector<long long> n(8, 2);
    auto r3 = feasible_range(y3, z, std::span<const long long>(n));
    CHECK(r3.lo == 0);
    CHECK(r3.hi == 2);

    // the range always contains 0
    CHECK(r.lo <= 0);
    CHECK(r.hi >= 0);
}

TEST_CASE("gibbs line weights reproduce the hypergeometric-type kernel") {
    // intercept-only, k = 2, total 2: states (0,2),(1,1),(2,0) with
    // probabilities (1/4, 1/2, 1/4).
    std::vector<long long> y = {1, 1};
    std::vector<long long> z = {1, -1};
    auto logfact = log_factorial_table(2);
    auto range = feasible_range(y, z);
    REQUIRE(range.lo == -1);
    REQUIRE(range.hi == 1);

    std::vector<double> w;
    line_distribution(y, z, range, logfact, w);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(w[2] == doctest::Approx(0.25).epsilon(1e-12));

    // sampling matches within 3-sigma multinomial bands over 10^6 draws
    Xoshiro256pp rng(31337);
    const int draws = 1'000'000;
    std::map<long long, long long> counts;
    for (int i = 0; i < draws; ++i)
        counts[gibbs_select(y, z, range, logfact, rng)]++;
    for (long long n = -1; n <= 1; ++n) {
        double p = n == 0 ? 0.5 : 0.25;
        double sigma = std::sqrt(p * (1 - p) * draws);
        CHECK(std::fabs(counts[n] - p * draws) < 3 * sigma);
    }
}

TEST_CASE("line distribution depends on the line, not the point on it") {
    auto toy = make_toy();
    const auto& z = toy.moves.moves[0];
    auto logfact = log_factorial_table(18);

    auto r0 = feasible_range(toy.y0, z);
    std::vector<double> from_y0;
    line_distribution(toy.y0, z, r0, logfact, from_y0);

    // move to another point on the same line and recompute
    long long shift = r0.hi != 0 ? r0.hi : r0.lo;
    REQUIRE(shift != 0);
    std::vector<long long> y2 = toy.y0;
    for (size_t c = 0; c < y2.size(); ++c)
        y2[c] += shift * z[c];
    auto r2 = feasible_range(y2, z);
    CHECK(r2.lo == r0.lo - shift);
    CHECK(r2.hi == r0.hi - shift);
    std::vector<double> from_y2;
    line_distribution(y2, z, r2, logfact, from_y2);

    REQUIRE(from_y0.size() == from_y2.size());
    for (size_t i = 0; i < from_y0.size(); ++i)
        CHECK(from_y0[i] == doctest::Approx(from_y2[i]).epsilon(1e-12));
}

TEST_CASE("single-point lines are forced") {
    std::vector<long long> y = {0, 1};
    std::vector<long long> z = {1, -1};
    auto logfact = log_factorial_table(1);
    FeasibleRange single{0, 0};
    Xoshiro256pp rng(1);
    CHECK(gibbs_select(y, z, single, logfact, rng) == 0);
}

TEST_CASE("chain p-value matches the exact oracle on a small fiber") {
    auto toy = make_toy();
    ChainConfig cfg;
    cfg.seed = 20240817;
    cfg.burn_in = 10'000;
    cfg.samples = 200'000;
    cfg.invariant_check_every = 10'000;
    auto res = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, cfg, toy.fit.df);
    CHECK(std::fabs(res.p_mcmc - toy.exact_p) < 3 * res.se_batch);
    CHECK(res.p_mcmc >= 0.0);
    CHECK(res.p_mcmc <= 1.0);
    CHECK(res.se_batch > 0.0);
    CHECK(res.samples == cfg.samples);
    CHECK(static_cast<int>(res.batch_means.size()) == cfg.batches);

    // histogram covers every recorded value
    long long total = 0;
    for (long long c : res.histogram.counts)
        total += c;
    CHECK(total == cfg.samples);
}

TEST_CASE("constant statistic gives p = 1 exactly") {
    auto toy = make_toy();
    ChainConfig cfg;
    cfg.seed = 5;
    cfg.burn_in = 100;
    cfg.samples = 5'000;
    auto constant = Statistic([](std::span<const long long>) { return 3.25; });
    auto res = run_chain(toy.y0, toy.moves, toy.x0t, constant, cfg, toy.fit.df);
    CHECK(res.p_mcmc == 1.0);
}

TEST_CASE("chain visits every fiber point with matching frequencies") {
    auto toy = make_toy();
    ChainConfig cfg;
    cfg.seed = 99;
    cfg.burn_in = 10'000;
    cfg.samples = 400'000;

    std::map<std::vector<long long>, size_t> index;
    for (size_t i = 0; i < toy.fiber.size(); ++i)
        index.emplace(toy.fiber.points[i], i);
    std::vector<long long> visits(toy.fiber.size(), 0);
    auto spy = Statistic([&](std::span<const long long> y) {
        auto it = index.find(std::vector<long long>(y.begin(), y.end()));
        REQUIRE(it != index.end()); // every visited state lies in the fiber
        ++visits[it->second];
        return 0.0;
    });
    run_chain(toy.y0, toy.moves, toy.x0t, spy, cfg, toy.fit.df);
    // occupancy follows the exact conditional distribution (5-sigma bands;
    // visits include one extra call for t_obs and the burn-in is excluded)
    for (size_t i = 0; i < toy.fiber.size(); ++i) {
        CHECK(visits[i] > 0);
        double expect = toy.probs[i] * cfg.samples;
        double sigma = std::sqrt(toy.probs[i] * (1 - toy.probs[i]) * cfg.samples);
        CHECK(std::fabs(visits[i] - expect) < 5 * sigma + 2);
    }
}

TEST_CASE("seeded runs are bit-identical") {
    auto toy = make_toy();
    ChainConfig cfg;
    cfg.seed = 424242;
    cfg.burn_in = 1'000;
    cfg.samples = 50'000;
    auto a = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, cfg, toy.fit.df);
    auto b = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, cfg, toy.fit.df);
    CHECK(a.p_mcmc == b.p_mcmc);
    CHECK(a.se_batch == b.se_batch);
    CHECK(a.t_obs == b.t_obs);
    CHECK(a.recorded == b.recorded);
    CHECK(a.histogram.counts == b.histogram.counts);

    ChainConfig other = cfg;
    other.seed = 424243;
    auto c = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, other, toy.fit.df);
    CHECK(a.recorded != c.recorded);

    // stream splitting: same seed, different long-jump stream
    ChainConfig streamed = cfg;
    streamed.stream = 1;
    auto d = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, streamed, toy.fit.df);
    CHECK(a.recorded != d.recorded);
    auto d2 = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, streamed, toy.fit.df);
    CHECK(d.recorded == d2.recorded);
}

TEST_CASE("binomial chains run on the lifted vector and respect the caps") {
    DesignSpec spec(4, {Generator{4, Word::parse("AC", 4)}});
    auto d = build_design_matrix(spec);
    auto x0 = build_covariate_matrix(d, ModelSpec::parse("A/B/C/D", 4));
    auto x0t = x0.x0_transposed();
    auto lifted = lawrence_lift(x0t);

    std::vector<long long> y = {3, 8, 3, 6, 9, 9, 9, 9};
    std::vector<long long> n(8, 10);
    auto fit = fit_glm(x0, y, Family::binomial, std::span<const long long>(n));

    std::vector<long long> ytil(16);
    std::vector<double> mu_counts(16);
    for (int i = 0; i < 8; ++i) {
        ytil[i] = y[i];
        ytil[8 + i] = n[i] - y[i];
        mu_counts[i] = n[i] * fit.mu[i];
        mu_counts[8 + i] = n[i] * (1.0 - fit.mu[i]);
    }
    auto statistic = make_deviance_statistic(mu_counts, 80);

    auto moves = graver_completion(kernel_moves(lifted), lifted);
    auto spy = Statistic([&](std::span<const long long> yy) {
        for (int i = 0; i < 8; ++i) {
            REQUIRE(yy[i] >= 0);
            REQUIRE(yy[i] <= n[i]);
            REQUIRE(yy[i] + yy[8 + i] == n[i]);
        }
        return statistic(yy);
    });
    ChainConfig cfg;
    cfg.seed = 7;
    cfg.burn_in = 2'000;
    cfg.samples = 50'000;
    cfg.invariant_check_every = 5'000;
    auto res = run_chain(ytil, moves, lifted, spy, cfg, fit.df);
    CHECK(res.p_mcmc > 0.0);
    CHECK(res.p_mcmc <= 1.0);

    // cross-check against exact enumeration of the bounded fiber
    std::vector<long long> t(x0t.rows());
    for (int r = 0; r < x0t.rows(); ++r) {
        long long s = 0;
        for (int c = 0; c < 8; ++c)
            s += to_long_checked(x0t.at(r, c)) * y[c];
        t[r] = s;
    }
    auto fiber = enumerate_fiber(x0t, t, std::span<const long long>(n));
    auto probs = exact_null_distribution(fiber, Family::binomial);
    auto lifted_stat = [&](std::span<const long long> first8) {
        std::vector<long long> full(16);
        for (int i = 0; i < 8; ++i) {
            full[i] = first8[i];
            full[8 + i] = n[i] - first8[i];
        }
        return statistic(full);
    };
    double exact_p = exact_pvalue(fiber, probs, lifted_stat, statistic(ytil));
    CHECK(std::fabs(res.p_mcmc - exact_p) < 4 * res.se_batch);
}

TEST_CASE("pooling chains") {
    auto toy = make_toy();
    ChainConfig cfg;
    cfg.seed = 11;
    cfg.burn_in = 2'000;
    cfg.samples = 60'000;
    auto a = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, cfg, toy.fit.df);
    cfg.seed = 12;
    auto b = run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, cfg, toy.fit.df);
    auto pooled = pool_chains({a, b}, 50);
    CHECK(pooled.samples == a.samples + b.samples);
    CHECK(pooled.p_mcmc == doctest::Approx(0.5 * (a.p_mcmc + b.p_mcmc)).epsilon(1e-12));
    CHECK(pooled.batch_means.size() == a.batch_means.size() + b.batch_means.size());
    CHECK(std::fabs(pooled.p_mcmc - toy.exact_p) < 4 * pooled.se_batch);
}

TEST_CASE("chain rejects bad inputs") {
    auto toy = make_toy();
    ChainConfig cfg;
    cfg.seed = 1;
    cfg.burn_in = 10;
    cfg.samples = 100;

    MoveSet empty;
    CHECK_THROWS_AS(run_chain(toy.y0, empty, toy.x0t, toy.statistic, cfg, 3), Error);

    std::vector<long long> negative = toy.y0;
    negative[0] = -1;
    CHECK_THROWS_AS(run_chain(negative, toy.moves, toy.x0t, toy.statistic, cfg, 3), Error);

    ChainConfig bad = cfg;
    bad.batches = 1;
    CHECK_THROWS_AS(run_chain(toy.y0, toy.moves, toy.x0t, toy.statistic, bad, 3), Error);
}

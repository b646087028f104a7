#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracfact/design.hpp"
#include "fracfact/error.hpp"
#include "fracfact/glm.hpp"
#include "fracfact/model.hpp"
#include "fracfact/rng.hpp"

using namespace fracfact;

namespace {

DesignSpec wave_solder_design() {
    return DesignSpec(7, {Generator{5, Word::parse("ABD", 7)},
                          Generator{6, Word::parse("ACD", 7)},
                          Generator{7, Word::parse("BCD", 7)}});
}

const std::vector<long long> kWaveSolderTotals = {69, 31, 55, 149, 46, 43, 118, 30,
                                                  43, 45, 71, 380, 37, 36, 212, 52};

const std::vector<long long> kWindshieldGood = {338, 826, 350, 647, 917, 977, 953, 972};

CovariateMatrix wave_solder_x0() {
    auto d = build_design_matrix(wave_solder_design());
    return build_covariate_matrix(d, ModelSpec::parse("AC/BD/E/F/G", 7));
}

CovariateMatrix windshield_x0() {
    auto d = build_design_matrix(DesignSpec(4, {Generator{4, Word::parse("AC", 4)}}));
    return build_covariate_matrix(d, ModelSpec::parse("A/B/C/D", 4));
}

} // namespace

TEST_CASE("wave-solder fit reproduces the reported fitted means and deviance") {
    auto x0 = wave_solder_x0();
    auto fit = fit_glm(x0, kWaveSolderTotals, Family::poisson);
    CHECK(fit.converged);
    CHECK(fit.df == 6);
    CHECK(fit.mu[0] == doctest::Approx(64.53).epsilon(0).scale(1).epsilon(0.0002));
    CHECK(std::fabs(fit.mu[0] - 64.53) < 0.01);
    CHECK(std::fabs(fit.mu[1] - 47.25) < 0.01);
    CHECK(std::fabs(fit.mu[15] - 51.42) < 0.01);

    double g2 = poisson_deviance_stat(kWaveSolderTotals, fit.mu);
    CHECK(std::fabs(g2 - 19.096) < 0.005);

    // score equations hold tightly at convergence
    auto score = glm_score(x0, kWaveSolderTotals, Family::poisson, std::nullopt, fit.beta);
    for (double s : score)
        CHECK(std::fabs(s) < 1e-8);
}

TEST_CASE("intercept-only poisson fit is the sample mean") {
    auto d = build_design_matrix(DesignSpec(4, {Generator{4, Word::parse("AC", 4)}}));
    CovariateMatrix x0(8, {Word::identity()}, {std::vector<int>(8, 1)});
    std::vector<long long> y = {3, 1, 4, 1, 5, 9, 2, 6};
    auto fit = fit_glm(x0, y, Family::poisson);
    for (double m : fit.mu)
        CHECK(m == doctest::Approx(31.0 / 8.0).epsilon(1e-10));
}

TEST_CASE("saturated poisson fit reproduces the data") {
    auto d = build_design_matrix(wave_solder_design());
    auto x0 = build_covariate_matrix(d, ModelSpec::parse("ABC/AD/BD/CD/AG/E/F", 7));
    REQUIRE(x0.nu() == 16);
    auto fit = fit_glm(x0, kWaveSolderTotals, Family::poisson);
    for (int i = 0; i < 16; ++i)
        CHECK(fit.mu[i] == doctest::Approx(double(kWaveSolderTotals[i])).epsilon(1e-9));
    CHECK(poisson_deviance_stat(kWaveSolderTotals, fit.mu) == doctest::Approx(0.0).scale(1));
    CHECK(fit.df == 0);
}

TEST_CASE("windshield binomial fit converges and matches direct likelihood differencing") {
    auto x0 = windshield_x0();
    std::vector<long long> n(8, 1000);
    auto fit = fit_glm(x0, kWindshieldGood, Family::binomial, std::span<const long long>(n));
    CHECK(fit.converged);
    CHECK(fit.df == 3);
    for (double p : fit.mu) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }

    double g2 = binomial_deviance_stat(kWindshieldGood, n, fit.mu);
    CHECK(g2 > 0.0);
    CHECK(std::isfinite(g2));

    // independent oracle: G2 = 2 (loglik_saturated - loglik_null)
    double ll_sat = 0.0, ll_null = 0.0;
    for (int i = 0; i < 8; ++i) {
        double phat = double(kWindshieldGood[i]) / n[i];
        ll_sat += kWindshieldGood[i] * std::log(phat) +
                  (n[i] - kWindshieldGood[i]) * std::log1p(-phat);
        ll_null += kWindshieldGood[i] * std::log(fit.mu[i]) +
                   (n[i] - kWindshieldGood[i]) * std::log1p(-fit.mu[i]);
    }
    CHECK(g2 == doctest::Approx(2.0 * (ll_sat - ll_null)).epsilon(1e-9));

    auto score = glm_score(x0, kWindshieldGood, Family::binomial,
                           std::span<const long long>(n), fit.beta);
    for (double s : score)
        CHECK(std::fabs(s) < 1e-8);
}

TEST_CASE("pearson statistics") {
    std::vector<long long> y1 = {4};
    std::vector<double> mu1 = {1.0};
    CHECK(poisson_pearson_stat(y1, mu1) == doctest::Approx(9.0));

    std::vector<long long> y2 = {2, 3};
    std::vector<double> mu2 = {2.0, 3.0};
    CHECK(poisson_pearson_stat(y2, mu2) == doctest::Approx(0.0));

    auto x0 = wave_solder_x0();
    auto fit = fit_glm(x0, kWaveSolderTotals, Family::poisson);
    double direct = 0.0;
    for (int i = 0; i < 16; ++i) {
        double d = kWaveSolderTotals[i] - fit.mu[i];
        direct += d * d / fit.mu[i];
    }
    CHECK(poisson_pearson_stat(kWaveSolderTotals, fit.mu) == doctest::Approx(direct));

    std::vector<double> mu_zero = {0.0};
    CHECK_THROWS_AS(poisson_pearson_stat(y1, mu_zero), NumericError);
}

TEST_CASE("deviance conventions") {
    // 0 log 0 = 0
    std::vector<long long> y = {0, 5};
    std::vector<double> mu = {2.0, 3.0};
    double g2 = poisson_deviance_stat(y, mu);
    CHECK(g2 == doctest::Approx(2.0 * 5.0 * std::log(5.0 / 3.0)));
    CHECK(std::isfinite(g2)); // the zero cell contributes 0, not NaN
}

TEST_CASE("chi-square upper tail") {
    CHECK(std::fabs(chisq_upper_tail(19.096, 6) - 0.0040) < 0.0001);
    CHECK(chisq_upper_tail(0.0, 3) == doctest::Approx(1.0));
    // closed form for df = 2: exp(-x/2)
    double x = 2.0 * std::log(2.0);
    CHECK(chisq_upper_tail(x, 2) == doctest::Approx(0.5).epsilon(1e-12));
    for (double v : {0.5, 1.0, 2.5, 7.0, 20.0})
        CHECK(chisq_upper_tail(v, 2) == doctest::Approx(std::exp(-v / 2)).epsilon(1e-12));
    // df = 4: exp(-x/2) (1 + x/2)
    for (double v : {0.5, 3.0, 11.0})
        CHECK(chisq_upper_tail(v, 4) ==
              doctest::Approx(std::exp(-v / 2) * (1 + v / 2)).epsilon(1e-12));
    // df = 1: erfc(sqrt(x/2))
    for (double v : {0.3, 1.0, 5.0, 15.0})
        CHECK(chisq_upper_tail(v, 1) ==
              doctest::Approx(std::erfc(std::sqrt(v / 2))).epsilon(1e-11));
    CHECK_THROWS_AS(chisq_upper_tail(-1.0, 3), Error);
    CHECK_THROWS_AS(chisq_upper_tail(1.0, 0), Error);
}

TEST_CASE("chi-square density integrates against the tail") {
    // numeric derivative of the upper tail equals -pdf
    for (int df : {2, 6}) {
        for (double x : {1.0, 5.0, 12.0}) {
            double h = 1e-5;
            double dq = (chisq_upper_tail(x + h, df) - chisq_upper_tail(x - h, df)) / (2 * h);
            CHECK(dq == doctest::Approx(-chisq_pdf(x, df)).epsilon(1e-6));
        }
    }
}

TEST_CASE("analytic score matches central finite differences") {
    auto x0 = wave_solder_x0();
    Xoshiro256pp rng(99);
    std::vector<double> beta(x0.nu());
    for (double& b : beta)
        b = 0.2 * (rng.next_double() - 0.5);
    beta[0] = 3.0; // keep means in a sane range

    auto score = glm_score(x0, kWaveSolderTotals, Family::poisson, std::nullopt, beta);
    const double h = 1e-6;
    for (int j = 0; j < x0.nu(); ++j) {
        auto bp = beta, bm = beta;
        bp[j] += h;
        bm[j] -= h;
        double fd = (glm_loglik(x0, kWaveSolderTotals, Family::poisson, std::nullopt, bp) -
                     glm_loglik(x0, kWaveSolderTotals, Family::poisson, std::nullopt, bm)) /
                    (2 * h);
        CHECK(std::fabs(fd - score[j]) <= 1e-6 * std::max(1.0, std::fabs(score[j])));
    }

    // binomial side
    auto xb = windshield_x0();
    std::vector<long long> n(8, 1000);
    std::vector<double> betab(xb.nu(), 0.1);
    auto scoreb = glm_score(xb, kWindshieldGood, Family::binomial,
                            std::span<const long long>(n), betab);
    for (int j = 0; j < xb.nu(); ++j) {
        auto bp = betab, bm = betab;
        bp[j] += h;
        bm[j] -= h;
        double fd = (glm_loglik(xb, kWindshieldGood, Family::binomial,
                                std::span<const long long>(n), bp) -
                     glm_loglik(xb, kWindshieldGood, Family::binomial,
                                std::span<const long long>(n), bm)) /
                    (2 * h);
        CHECK(std::fabs(fd - scoreb[j]) <= 1e-6 * std::max(1.0, std::fabs(scoreb[j])));
    }
}

TEST_CASE("deviance is invariant under column reordering of X0") {
    auto x0 = wave_solder_x0();
    // reverse the non-intercept columns; only the column space matters
    std::vector<Word> labels = {x0.labels()[0]};
    std::vector<std::vector<int>> cols = {x0.column(0)};
    for (int j = x0.nu() - 1; j >= 1; --j) {
        labels.push_back(x0.labels()[j]);
        cols.push_back(x0.column(j));
    }
    CovariateMatrix reordered(x0.runs(), std::move(labels), std::move(cols));

    auto fit1 = fit_glm(x0, kWaveSolderTotals, Family::poisson);
    auto fit2 = fit_glm(reordered, kWaveSolderTotals, Family::poisson);
    double g1 = poisson_deviance_stat(kWaveSolderTotals, fit1.mu);
    double g2 = poisson_deviance_stat(kWaveSolderTotals, fit2.mu);
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-10));
    for (int i = 0; i < 16; ++i)
        CHECK(fit1.mu[i] == doctest::Approx(fit2.mu[i]).epsilon(1e-8));
}

TEST_CASE("boundary fits carry a separation warning") {
    CovariateMatrix intercept_only(4, {Word::identity()}, {std::vector<int>(4, 1)});

    std::vector<long long> zeros = {0, 0, 0, 0};
    auto fitp = fit_glm(intercept_only, zeros, Family::poisson);
    CHECK(fitp.boundary_warning);

    std::vector<long long> all = {5, 5, 5, 5};
    std::vector<long long> n = {5, 5, 5, 5};
    auto fitb = fit_glm(intercept_only, all, Family::binomial, std::span<const long long>(n));
    CHECK(fitb.boundary_warning);
}

TEST_CASE("input validation") {
    auto x0 = wave_solder_x0();
    std::vector<long long> neg(16, -1);
    CHECK_THROWS_AS(fit_glm(x0, neg, Family::poisson), Error);

    auto xb = windshield_x0();
    std::vector<long long> n(8, 100);
    std::vector<long long> toomany(8, 200);
    CHECK_THROWS_AS(fit_glm(xb, toomany, Family::binomial, std::span<const long long>(n)),
                    Error);
    CHECK_THROWS_AS(fit_glm(xb, kWindshieldGood, Family::binomial), Error);

    // duplicate column: rank-deficient
    std::vector<int> ones(4, 1);
    CovariateMatrix dup(4, {Word::identity(), Word::parse("A", 2)}, {ones, ones});
    std::vector<long long> y = {1, 2, 3, 4};
    CHECK_THROWS_AS(fit_glm(dup, y, Family::poisson), NumericError);
}

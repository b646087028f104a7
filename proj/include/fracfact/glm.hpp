#ifndef FRACFACT_GLM_HPP
#define FRACFACT_GLM_HPP

#include <optional>
#include <span>
#include <vector>

#include "fracfact/fiber.hpp" // Family
#include "fracfact/model.hpp"

namespace fracfact {

struct FitResult {
    std::vector<double> beta; // nu coefficients, intercept first
    std::vector<double> mu;   // fitted means: counts (poisson) or probabilities (binomial)
    int iterations = 0;
    bool converged = false;
    int df = 0; // k - nu
    bool boundary_warning = false; // quasi-complete separation
    double deviance = 0.0;
};

/// Newton-Raphson on the canonical-link log-likelihood from beta = 0 with
/// step-halving on likelihood decrease. Converged when max |score| < 1e-10
/// and the relative deviance change is < 1e-12; throws NumericError after
/// 100 iterations otherwise.
FitResult fit_glm(const CovariateMatrix& x0, std::span<const long long> y, Family family,
                  std::optional<std::span<const long long>> denominators = std::nullopt);

/// Log-likelihood (constants dropped) and score X0'(y - mu_counts) at beta;
/// exposed for the finite-difference gradient checks.
double glm_loglik(const CovariateMatrix& x0, std::span<const long long> y, Family family,
                  std::optional<std::span<const long long>> denominators,
                  std::span<const double> beta);
std::vector<double> glm_score(const CovariateMatrix& x0, std::span<const long long> y,
                              Family family,
                              std::optional<std::span<const long long>> denominators,
                              std::span<const double> beta);

/// G2 = 2 sum y log(y/mu), with 0 log 0 = 0.
double poisson_deviance_stat(std::span<const long long> y, std::span<const double> mu);
/// Binomial G2 over successes and failures; mu are fitted probabilities.
double binomial_deviance_stat(std::span<const long long> y, std::span<const long long> n,
                              std::span<const double> mu);

double poisson_pearson_stat(std::span<const long long> y, std::span<const double> mu);
double binomial_pearson_stat(std::span<const long long> y, std::span<const long long> n,
                             std::span<const double> mu);

/// Upper-tail probability of the chi-square distribution: the regularized
/// incomplete gamma Q(df/2, x/2), series/continued-fraction split, absolute
/// accuracy ~1e-12.
double chisq_upper_tail(double x, int df);

double chisq_pdf(double x, int df);

} // namespace fracfact

#endif

#ifndef FRACFACT_SAMPLER_HPP
#define FRACFACT_SAMPLER_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fracfact/moves.hpp"
#include "fracfact/rng.hpp"

namespace fracfact {

struct ChainConfig {
    std::uint64_t seed = 1;
    unsigned stream = 0; // long-jump stream index for parallel chains
    long long burn_in = 100'000;
    long long samples = 1'000'000;
    int batches = 100;
    int histogram_bins = 100;
    // Re-verify X0'y == X0'y0 every this many steps (0 = off); on by
    // default in debug builds.
#ifdef NDEBUG
    long long invariant_check_every = 0;
#else
    long long invariant_check_every = 10'000;
#endif
};

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<long long> counts;
};

struct TestResult {
    double t_obs = 0.0;
    double p_mcmc = 0.0;
    double se_batch = 0.0;
    double p_asymptotic = 0.0; // NaN when df == 0
    int df = 0;
    long long samples = 0;
    long long burn_in = 0;
    double frac_multistate = 0.0; // recorded steps whose line had |I| > 1
    std::vector<double> batch_means;
    Histogram histogram;
    std::vector<double> recorded; // statistic value at every recorded step
};

using Statistic = std::function<double(std::span<const long long>)>;

/// Inclusive interval of n with y + n z >= 0 (and <= bounds); contains 0.
struct FeasibleRange {
    long long lo = 0, hi = 0;
    long long size() const { return hi - lo + 1; }
};

FeasibleRange feasible_range(std::span<const long long> y, std::span<const long long> z,
                             std::optional<std::span<const long long>> bounds = std::nullopt);

/// Cumulative log-factorial table; index v holds log(v!).
std::vector<double> log_factorial_table(long long max_value);

/// Normalized probabilities over n = range.lo .. range.hi, proportional to
/// prod 1/(y_i + n z_i)!. This is the conditional null distribution
/// restricted to the line, so it depends only on the line itself, not on
/// which of its points y is.
void line_distribution(std::span<const long long> y, std::span<const long long> z,
                       FeasibleRange range, std::span<const double> logfact,
                       std::vector<double>& out);

/// One Gibbs update along the line {y + n z | n in I}: n is drawn from
/// line_distribution (normalizing constants cancel).
long long gibbs_select(std::span<const long long> y, std::span<const long long> z,
                       FeasibleRange range, std::span<const double> logfact, Xoshiro256pp& rng);

/// The full chain: burn_in unrecorded steps, then `samples` recorded steps.
/// Each step draws a move uniformly, computes the feasible range and takes a
/// Gibbs step along it. p_mcmc = #(T(y_next) >= T(y0)) / samples, with a
/// batch-means standard error over cfg.batches contiguous batches.
/// Binomial data enter in Lawrence-lifted form, so the same product weight
/// applies; `bounds` covers the non-lifted bounded case.
TestResult run_chain(const std::vector<long long>& y0, const MoveSet& ms, const IntMatrix& x0t,
                     const Statistic& statistic, const ChainConfig& cfg, int df,
                     std::optional<std::span<const long long>> bounds = std::nullopt);

/// Merge independent chains (distinct seed streams) by pooling batch means;
/// histograms are rebuilt over the pooled recorded values.
TestResult pool_chains(const std::vector<TestResult>& chains, int histogram_bins);

Histogram make_histogram(std::span<const double> values, int bins);

/// Deviance statistic with the fiber-constant fitted means frozen in:
/// T(y) = 2 sum y_i log(y_i / mu_i). mu is on the count scale and must
/// match the (lifted) working vector.
Statistic make_deviance_statistic(std::vector<double> mu_counts, long long max_cell);

/// Pearson statistic with frozen fitted means: sum (y-mu)^2 / mu.
Statistic make_pearson_statistic(std::vector<double> mu_counts);

} // namespace fracfact

#endif

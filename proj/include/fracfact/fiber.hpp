#ifndef FRACFACT_FIBER_HPP
#define FRACFACT_FIBER_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fracfact/intmat.hpp"

namespace fracfact {

enum class Family { poisson, binomial };

struct FiberBudget {
    std::size_t max_points = 2'000'000;
    std::size_t max_nodes = 50'000'000;
};

/// The conditional sample space: all nonnegative integer y with
/// x0t * y == target (and y <= bounds when given, e.g. binomial counts).
struct Fiber {
    IntMatrix x0t;
    std::vector<long long> target;
    std::optional<std::vector<long long>> bounds;
    std::vector<std::vector<long long>> points;

    std::size_t size() const { return points.size(); }
};

/// Depth-first enumeration with exact interval propagation: every partial
/// assignment prunes each remaining cell by the residual range of every row.
/// Throws BudgetError("fiber too large") when the budget is exceeded.
/// Cells must all be bounded (an all-positive row such as the intercept, or
/// explicit bounds); otherwise an Error is raised rather than diverging.
Fiber enumerate_fiber(const IntMatrix& x0t, std::span<const long long> target,
                      std::optional<std::span<const long long>> bounds = std::nullopt,
                      const FiberBudget& budget = {});

/// Exact conditional null probabilities, in fiber point order.
/// Poisson: weights proportional to prod 1/y_i!; binomial additionally
/// divides by (n_i - y_i)! using the fiber bounds as denominators.
/// Computed through log-factorials with max-subtraction.
std::vector<double> exact_null_distribution(const Fiber& fiber, Family family);

/// Exact conditional p-value: sum of probabilities of points with
/// T(y) >= t_obs (ties count).
double exact_pvalue(const Fiber& fiber, const std::vector<double>& probs,
                    const std::function<double(std::span<const long long>)>& statistic,
                    double t_obs);

} // namespace fracfact

#endif

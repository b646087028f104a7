#include "fracfact/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fracfact/error.hpp"

namespace fracfact {

namespace {

struct Enumerator {
    int m, n;
    std::vector<std::vector<long long>> a; // row-major, m x n
    std::vector<long long> ub;             // per-cell upper bound
    std::vector<int> order;                // DFS cell order
    // suffix ranges of sum_{q >= pos} a[r][order[q]] * y over 0 <= y <= ub
    std::vector<std::vector<long long>> suffix_min, suffix_max;
    FiberBudget budget;
    std::size_t nodes = 0;

    std::vector<long long> resid;
    std::vector<long long> point;
    std::vector<std::vector<long long>>* out = nullptr;

    void dfs(int pos) {
        if (++nodes > budget.max_nodes)
            throw BudgetError("fiber too large: search node budget exceeded");
        if (pos == n) {
            for (int r = 0; r < m; ++r)
                if (resid[r] != 0)
                    return;
            if (out->size() >= budget.max_points)
                throw BudgetError("fiber too large: point budget exceeded");
            out->push_back(point);
            return;
        }
        const int c = order[pos];
        long long lo = 0, hi = ub[c];
        for (int r = 0; r < m && lo <= hi; ++r) {
            const long long coef = a[r][c];
            const long long other_min = suffix_min[r][pos + 1];
            const long long other_max = suffix_max[r][pos + 1];
            const long long need_lo = resid[r] - other_max; // coef*y >= need_lo
            const long long need_hi = resid[r] - other_min; // coef*y <= need_hi
            if (coef == 0) {
                if (need_lo > 0 || need_hi < 0)
                    return;
                continue;
            }
            // integer interval for y from need_lo <= coef*y <= need_hi
            auto div_floor = [](long long x, long long d) {
                long long q = x / d, rr = x % d;
                return (rr != 0 && ((rr < 0) != (d < 0))) ? q - 1 : q;
            };
            auto div_ceil = [&](long long x, long long d) { return -div_floor(-x, d); };
            if (coef > 0) {
                lo = std::max(lo, div_ceil(need_lo, coef));
                hi = std::min(hi, div_floor(need_hi, coef));
            } else {
                lo = std::max(lo, div_ceil(need_hi, coef));
                hi = std::min(hi, div_floor(need_lo, coef));
            }
        }
        for (long long v = lo; v <= hi; ++v) {
            point[c] = v;
            for (int r = 0; r < m; ++r)
                resid[r] -= a[r][c] * v;
            dfs(pos + 1);
            for (int r = 0; r < m; ++r)
                resid[r] += a[r][c] * v;
        }
        point[c] = 0;
    }
};

} // namespace

Fiber enumerate_fiber(const IntMatrix& x0t, std::span<const long long> target,
                      std::optional<std::span<const long long>> bounds,
                      const FiberBudget& budget) {
    const int m = x0t.rows(), n = x0t.cols();
    if (static_cast<int>(target.size()) != m)
        throw Error("target length does not match matrix rows");
    if (bounds && static_cast<int>(bounds->size()) != n)
        throw Error("bounds length does not match matrix columns");

    Enumerator e;
    e.m = m;
    e.n = n;
    e.budget = budget;
    e.a.assign(m, std::vector<long long>(n));
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            e.a[r][c] = to_long_checked(x0t.at(r, c));

    // Upper bounds: explicit bounds plus anything a single-signed row implies.
    const long long inf = std::numeric_limits<long long>::max() / 4;
    e.ub.assign(n, inf);
    if (bounds)
        for (int c = 0; c < n; ++c) {
            if ((*bounds)[c] < 0)
                throw Error("negative cell bound");
            e.ub[c] = (*bounds)[c];
        }
    for (int r = 0; r < m; ++r) {
        bool nonneg = true, nonpos = true;
        for (int c = 0; c < n; ++c) {
            nonneg = nonneg && e.a[r][c] >= 0;
            nonpos = nonpos && e.a[r][c] <= 0;
        }
        long long t = target[r];
        if (nonneg || nonpos) {
            long long sgn = nonneg ? 1 : -1;
            if (sgn * t < 0)
                return Fiber{x0t,
                             std::vector<long long>(target.begin(), target.end()),
                             bounds ? std::optional(std::vector<long long>(bounds->begin(),
                                                                           bounds->end()))
                                    : std::nullopt,
                             {}};
            for (int c = 0; c < n; ++c)
                if (e.a[r][c] != 0)
                    e.ub[c] = std::min(e.ub[c], sgn * t / (sgn * e.a[r][c]));
        }
    }
    for (int c = 0; c < n; ++c)
        if (e.ub[c] >= inf)
            throw Error("fiber is unbounded in cell " + std::to_string(c + 1) +
                        "; provide bounds or include an intercept row");

    // Most-constrained-first: descending column infinity norm, stable.
    e.order.resize(n);
    std::iota(e.order.begin(), e.order.end(), 0);
    std::vector<long long> colnorm(n, 0);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < m; ++r)
            colnorm[c] = std::max(colnorm[c], std::abs(e.a[r][c]));
    std::stable_sort(e.order.begin(), e.order.end(),
                     [&](int x, int y) { return colnorm[x] > colnorm[y]; });

    e.suffix_min.assign(m, std::vector<long long>(n + 1, 0));
    e.suffix_max.assign(m, std::vector<long long>(n + 1, 0));
    for (int r = 0; r < m; ++r)
        for (int pos = n - 1; pos >= 0; --pos) {
            const long long reach = e.a[r][e.order[pos]] * e.ub[e.order[pos]];
            e.suffix_min[r][pos] = e.suffix_min[r][pos + 1] + std::min(0LL, reach);
            e.suffix_max[r][pos] = e.suffix_max[r][pos + 1] + std::max(0LL, reach);
        }

    Fiber fiber;
    fiber.x0t = x0t;
    fiber.target.assign(target.begin(), target.end());
    if (bounds)
        fiber.bounds = std::vector<long long>(bounds->begin(), bounds->end());
    e.resid = fiber.target;
    e.point.assign(n, 0);
    e.out = &fiber.points;
    e.dfs(0);
    return fiber;
}

std::vector<double> exact_null_distribution(const Fiber& fiber, Family family) {
    if (fiber.points.empty())
        throw Error("empty fiber has no null distribution");
    if (family == Family::binomial && !fiber.bounds)
        throw Error("binomial null distribution requires denominators (fiber bounds)");

    std::vector<double> logw(fiber.points.size());
    for (size_t i = 0; i < fiber.points.size(); ++i) {
        double lw = 0.0;
        const auto& y = fiber.points[i];
        for (size_t c = 0; c < y.size(); ++c) {
            lw -= std::lgamma(static_cast<double>(y[c]) + 1.0);
            if (family == Family::binomial)
                lw -= std::lgamma(static_cast<double>((*fiber.bounds)[c] - y[c]) + 1.0);
        }
        logw[i] = lw;
    }
    const double mx = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    std::vector<double> probs(logw.size());
    for (size_t i = 0; i < logw.size(); ++i) {
        probs[i] = std::exp(logw[i] - mx);
        total += probs[i];
    }
    for (double& p : probs)
        p /= total;
    return probs;
}

double exact_pvalue(const Fiber& fiber, const std::vector<double>& probs,
                    const std::function<double(std::span<const long long>)>& statistic,
                    double t_obs) {
    if (probs.size() != fiber.points.size())
        throw Error("probability vector does not match fiber");
    double p = 0.0;
    for (size_t i = 0; i < fiber.points.size(); ++i)
        if (statistic(fiber.points[i]) >= t_obs)
            p += probs[i];
    return p;
}

} // namespace fracfact

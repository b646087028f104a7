#include "fracfact/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracfact/error.hpp"
#include "fracfact/glm.hpp"

namespace fracfact {

FeasibleRange feasible_range(std::span<const long long> y, std::span<const long long> z,
                             std::optional<std::span<const long long>> bounds) {
    long long lo = std::numeric_limits<long long>::min() / 4;
    long long hi = std::numeric_limits<long long>::max() / 4;
    for (size_t i = 0; i < y.size(); ++i) {
        if (z[i] == 0)
            continue;
        // 0 <= y + n z  (and y + n z <= ub)
        if (z[i] > 0) {
            lo = std::max(lo, -(y[i] / z[i]));
            if (bounds)
                hi = std::min(hi, ((*bounds)[i] - y[i]) / z[i]);
        } else {
            hi = std::min(hi, y[i] / -z[i]);
            if (bounds)
                lo = std::max(lo, -(((*bounds)[i] - y[i]) / -z[i]));
        }
    }
    return FeasibleRange{lo, hi};
}

std::vector<double> log_factorial_table(long long max_value) {
    std::vector<double> t(max_value + 1, 0.0);
    for (long long v = 2; v <= max_value; ++v)
        t[v] = t[v - 1] + std::log(static_cast<double>(v));
    return t;
}

void line_distribution(std::span<const long long> y, std::span<const long long> z,
                       FeasibleRange range, std::span<const double> logfact,
                       std::vector<double>& out) {
    const long long m = range.size();
    if (m > 10'000'000)
        throw Error("feasible line is unbounded; the configuration lacks an intercept row");
    out.resize(m);
    double best = -std::numeric_limits<double>::infinity();
    for (long long n = range.lo; n <= range.hi; ++n) {
        double lw = 0.0;
        for (size_t i = 0; i < y.size(); ++i)
            if (z[i] != 0)
                lw -= logfact[y[i] + n * z[i]];
        out[n - range.lo] = lw;
        best = std::max(best, lw);
    }
    double total = 0.0;
    for (long long i = 0; i < m; ++i) {
        out[i] = std::exp(out[i] - best);
        total += out[i];
    }
    for (long long i = 0; i < m; ++i)
        out[i] /= total;
}

long long gibbs_select(std::span<const long long> y, std::span<const long long> z,
                       FeasibleRange range, std::span<const double> logfact,
                       Xoshiro256pp& rng) {
    const long long m = range.size();
    if (m <= 1)
        return range.lo;
    static thread_local std::vector<double> w;
    line_distribution(y, z, range, logfact, w);
    double u = rng.next_double();
    for (long long i = 0; i < m; ++i) {
        u -= w[i];
        if (u < 0.0)
            return range.lo + i;
    }
    return range.hi;
}

Histogram make_histogram(std::span<const double> values, int bins) {
    Histogram h;
    h.counts.assign(bins, 0);
    if (values.empty())
        return h;
    h.lo = *std::min_element(values.begin(), values.end());
    h.hi = *std::max_element(values.begin(), values.end());
    double width = h.hi - h.lo;
    if (width <= 0.0) {
        h.counts[0] = static_cast<long long>(values.size());
        return h;
    }
    for (double v : values) {
        int b = static_cast<int>((v - h.lo) / width * bins);
        h.counts[std::min(b, bins - 1)] += 1;
    }
    return h;
}

namespace {

void fill_batch_stats(TestResult& res, int batches) {
    const long long n = static_cast<long long>(res.recorded.size());
    if (batches < 2 || n < batches)
        throw Error("batch count must satisfy 2 <= batches <= samples");
    res.batch_means.clear();
    const long long base = n / batches, extra = n % batches;
    long long pos = 0;
    long long sig_total = 0;
    for (int b = 0; b < batches; ++b) {
        const long long len = base + (b < extra ? 1 : 0);
        long long sig = 0;
        for (long long i = 0; i < len; ++i)
            if (res.recorded[pos + i] >= res.t_obs)
                ++sig;
        sig_total += sig;
        res.batch_means.push_back(static_cast<double>(sig) / len);
        pos += len;
    }
    res.p_mcmc = static_cast<double>(sig_total) / n;
    double mean = 0.0;
    for (double m : res.batch_means)
        mean += m;
    mean /= batches;
    double ss = 0.0;
    for (double m : res.batch_means)
        ss += (m - mean) * (m - mean);
    res.se_batch = std::sqrt(ss / (batches - 1)) / std::sqrt(static_cast<double>(batches));
}

} // namespace

TestResult run_chain(const std::vector<long long>& y0, const MoveSet& ms, const IntMatrix& x0t,
                     const Statistic& statistic, const ChainConfig& cfg, int df,
                     std::optional<std::span<const long long>> bounds) {
    if (ms.moves.empty())
        throw Error("empty move set");
    if (cfg.samples < 1 || cfg.burn_in < 0)
        throw Error("chain needs samples >= 1 and burn_in >= 0");
    const int k = x0t.cols();
    if (static_cast<int>(y0.size()) != k)
        throw Error("initial state length does not match the matrix");
    long long total = 0;
    for (size_t i = 0; i < y0.size(); ++i) {
        if (y0[i] < 0 || (bounds && y0[i] > (*bounds)[i]))
            throw Error("initial state is not in the fiber");
        total += y0[i];
    }
    for (const auto& z : ms.moves)
        if (static_cast<int>(z.size()) != k)
            throw Error("move length does not match the matrix");

    std::vector<long long> target(x0t.rows());
    for (int r = 0; r < x0t.rows(); ++r) {
        Int s = 0;
        for (int c = 0; c < k; ++c)
            s += x0t.at(r, c) * static_cast<long>(y0[c]);
        target[r] = to_long_checked(s);
    }

    const auto logfact = log_factorial_table(total);

    TestResult res;
    res.df = df;
    res.samples = cfg.samples;
    res.burn_in = cfg.burn_in;
    res.t_obs = statistic(y0);
    // the frozen-mean deviance can round to a hair below zero at y0
    res.p_asymptotic = df > 0 ? chisq_upper_tail(std::max(0.0, res.t_obs), df)
                              : std::numeric_limits<double>::quiet_NaN();
    res.recorded.reserve(cfg.samples);

    Xoshiro256pp rng = Xoshiro256pp::for_stream(cfg.seed, cfg.stream);
    std::vector<long long> y = y0;
    long long multistate = 0;

    const long long steps = cfg.burn_in + cfg.samples;
    for (long long step = 0; step < steps; ++step) {
        const auto& z = ms.moves[rng.next_below(ms.moves.size())];
        FeasibleRange range = feasible_range(y, z, bounds);
        long long n = gibbs_select(y, z, range, logfact, rng);
        if (n != 0)
            for (int c = 0; c < k; ++c)
                y[c] += n * z[c];
        const bool recorded = step >= cfg.burn_in;
        if (recorded) {
            if (range.size() > 1)
                ++multistate;
            res.recorded.push_back(statistic(y));
        }
        if (cfg.invariant_check_every > 0 && (step + 1) % cfg.invariant_check_every == 0) {
            for (int r = 0; r < x0t.rows(); ++r) {
                Int s = 0;
                for (int c = 0; c < k; ++c)
                    s += x0t.at(r, c) * static_cast<long>(y[c]);
                if (s != static_cast<long>(target[r]))
                    throw NumericError("chain invariant violated: sufficient statistic drifted");
            }
        }
    }
    res.frac_multistate = static_cast<double>(multistate) / cfg.samples;
    fill_batch_stats(res, cfg.batches);
    res.histogram = make_histogram(res.recorded, cfg.histogram_bins);
    return res;
}

TestResult pool_chains(const std::vector<TestResult>& chains, int histogram_bins) {
    if (chains.empty())
        throw Error("no chains to pool");
    if (chains.size() == 1)
        return chains.front();
    TestResult res = chains.front();
    res.recorded.clear();
    res.batch_means.clear();
    long long samples = 0;
    for (const auto& c : chains) {
        samples += c.samples;
        res.recorded.insert(res.recorded.end(), c.recorded.begin(), c.recorded.end());
        res.batch_means.insert(res.batch_means.end(), c.batch_means.begin(),
                               c.batch_means.end());
    }
    res.samples = samples;
    double frac = 0.0, p = 0.0;
    for (const auto& c : chains) {
        frac += c.frac_multistate * c.samples;
        p += c.p_mcmc * c.samples;
    }
    res.frac_multistate = frac / samples;
    res.p_mcmc = p / samples;
    const int b = static_cast<int>(res.batch_means.size());
    double mean = 0.0;
    for (double m : res.batch_means)
        mean += m;
    mean /= b;
    double ss = 0.0;
    for (double m : res.batch_means)
        ss += (m - mean) * (m - mean);
    res.se_batch = std::sqrt(ss / (b - 1)) / std::sqrt(static_cast<double>(b));
    res.histogram = make_histogram(res.recorded, histogram_bins);
    return res;
}

Statistic make_deviance_statistic(std::vector<double> mu_counts, long long max_cell) {
    std::vector<double> nlogn(max_cell + 1, 0.0);
    for (long long v = 1; v <= max_cell; ++v)
        nlogn[v] = v * std::log(static_cast<double>(v));
    std::vector<double> logmu(mu_counts.size());
    for (size_t i = 0; i < mu_counts.size(); ++i)
        logmu[i] = std::log(mu_counts[i]);
    return [nlogn = std::move(nlogn), logmu = std::move(logmu)](
               std::span<const long long> y) {
        double g2 = 0.0;
        for (size_t i = 0; i < y.size(); ++i)
            if (y[i] > 0) // 0 log 0 = 0, also when the fitted mean underflows
                g2 += nlogn[y[i]] - y[i] * logmu[i];
        return 2.0 * g2;
    };
}

Statistic make_pearson_statistic(std::vector<double> mu_counts) {
    return [mu = std::move(mu_counts)](std::span<const long long> y) {
        double x2 = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
            const double d = y[i] - mu[i];
            x2 += d * d / mu[i];
        }
        return x2;
    };
}

} // namespace fracfact

#include "fracfact/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracfact/error.hpp"
#include "fracfact/intmat.hpp"

namespace fracfact {

namespace {

// Solve the SPD system a*x = b in place (a is nu x nu row-major).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, int n) {
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k)
            d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0)
            throw NumericError("Newton system is not positive definite");
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / d;
        }
    }
    for (int i = 0; i < n; ++i) { // L z = b
        double s = b[i];
        for (int k = 0; k < i; ++k)
            s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) { // L' x = z
        double s = b[i];
        for (int k = i + 1; k < n; ++k)
            s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return b;
}

struct Context {
    const CovariateMatrix& x0;
    std::span<const long long> y;
    Family family;
    std::span<const long long> n; // binomial denominators (empty for poisson)

    int k() const { return x0.runs(); }
    int nu() const { return x0.nu(); }

    std::vector<double> linear_predictor(std::span<const double> beta) const {
        std::vector<double> eta(k(), 0.0);
        for (int i = 0; i < k(); ++i)
            for (int j = 0; j < nu(); ++j)
                eta[i] += x0.entry(i, j) * beta[j];
        return eta;
    }

    double loglik(std::span<const double> beta) const {
        auto eta = linear_predictor(beta);
        double ll = 0.0;
        for (int i = 0; i < k(); ++i) {
            if (family == Family::poisson)
                ll += y[i] * eta[i] - std::exp(eta[i]);
            else
                ll += y[i] * eta[i] - n[i] * std::log1p(std::exp(eta[i]));
        }
        return ll;
    }

    // fitted count scale: mu (poisson) or n*p (binomial)
    std::vector<double> fitted_counts(std::span<const double> beta) const {
        auto eta = linear_predictor(beta);
        std::vector<double> mu(k());
        for (int i = 0; i < k(); ++i) {
            if (family == Family::poisson)
                mu[i] = std::exp(eta[i]);
            else
                mu[i] = n[i] / (1.0 + std::exp(-eta[i]));
        }
        return mu;
    }

    std::vector<double> score(std::span<const double> beta) const {
        auto mu = fitted_counts(beta);
        std::vector<double> s(nu(), 0.0);
        for (int j = 0; j < nu(); ++j)
            for (int i = 0; i < k(); ++i)
                s[j] += x0.entry(i, j) * (y[i] - mu[i]);
        return s;
    }
};

} // namespace

double glm_loglik(const CovariateMatrix& x0, std::span<const long long> y, Family family,
                  std::optional<std::span<const long long>> denominators,
                  std::span<const double> beta) {
    Context ctx{x0, y, family, denominators ? *denominators : std::span<const long long>{}};
    return ctx.loglik(beta);
}

std::vector<double> glm_score(const CovariateMatrix& x0, std::span<const long long> y,
                              Family family,
                              std::optional<std::span<const long long>> denominators,
                              std::span<const double> beta) {
    Context ctx{x0, y, family, denominators ? *denominators : std::span<const long long>{}};
    return ctx.score(beta);
}

FitResult fit_glm(const CovariateMatrix& x0, std::span<const long long> y, Family family,
                  std::optional<std::span<const long long>> denominators) {
    const int k = x0.runs(), nu = x0.nu();
    if (static_cast<int>(y.size()) != k)
        throw Error("observation vector length does not match the design");
    if (family == Family::binomial) {
        if (!denominators || static_cast<int>(denominators->size()) != k)
            throw Error("binomial fit requires one denominator per run");
        for (int i = 0; i < k; ++i)
            if (y[i] < 0 || y[i] > (*denominators)[i])
                throw Error("binomial observations must satisfy 0 <= y <= n");
    } else {
        for (int i = 0; i < k; ++i)
            if (y[i] < 0)
                throw Error("poisson observations must be nonnegative");
    }
    if (integer_rank(x0.x0_transposed()) != nu)
        throw NumericError("covariate matrix is rank-deficient");

    Context ctx{x0, y, family, denominators ? *denominators : std::span<const long long>{}};

    std::vector<double> beta(nu, 0.0);
    double ll = ctx.loglik(beta);
    double dev_prev = std::numeric_limits<double>::infinity();

    FitResult res;
    res.df = k - nu;
    for (int iter = 1; iter <= 100; ++iter) {
        auto mu = ctx.fitted_counts(beta);
        std::vector<double> s(nu, 0.0), h(nu * nu, 0.0);
        for (int i = 0; i < k; ++i) {
            double w = family == Family::poisson
                           ? mu[i]
                           : mu[i] * (1.0 - mu[i] / ctx.n[i]); // n p (1-p)
            for (int a = 0; a < nu; ++a) {
                s[a] += x0.entry(i, a) * (y[i] - mu[i]);
                for (int b = a; b < nu; ++b)
                    h[a * nu + b] += w * x0.entry(i, a) * x0.entry(i, b);
            }
        }
        for (int a = 0; a < nu; ++a)
            for (int b = 0; b < a; ++b)
                h[a * nu + b] = h[b * nu + a];

        // deviance on the count scale (saturated minus current, canonical form)
        double dev = 0.0;
        for (int i = 0; i < k; ++i) {
            if (y[i] > 0)
                dev += y[i] * std::log(y[i] / mu[i]);
            if (family == Family::binomial) {
                long long f = ctx.n[i] - y[i];
                if (f > 0)
                    dev += f * std::log(f / (ctx.n[i] - mu[i]));
            } else {
                dev -= y[i] - mu[i];
            }
        }
        dev *= 2.0;

        double max_score = 0.0;
        for (double v : s)
            max_score = std::max(max_score, std::fabs(v));
        if (max_score < 1e-10 &&
            std::fabs(dev - dev_prev) <= 1e-12 * std::max(1.0, std::fabs(dev))) {
            res.beta = beta;
            res.iterations = iter - 1;
            res.converged = true;
            res.deviance = dev;
            res.mu.resize(k);
            for (int i = 0; i < k; ++i)
                res.mu[i] = family == Family::poisson ? mu[i] : mu[i] / ctx.n[i];
            for (int i = 0; i < k; ++i) {
                if (family == Family::poisson && mu[i] < 1e-8)
                    res.boundary_warning = true;
                if (family == Family::binomial &&
                    (res.mu[i] < 1e-8 || res.mu[i] > 1.0 - 1e-8))
                    res.boundary_warning = true;
            }
            return res;
        }
        dev_prev = dev;

        // boundary fits (fitted means underflowing to zero) make the
        // Hessian numerically singular; escalate a diagonal boost
        std::vector<double> delta;
        double max_diag = 0.0;
        for (int a = 0; a < nu; ++a)
            max_diag = std::max(max_diag, h[a * nu + a]);
        for (double jitter : {0.0, 1e-12, 1e-8, 1e-4}) {
            std::vector<double> hj = h;
            for (int a = 0; a < nu; ++a)
                hj[a * nu + a] += jitter * std::max(max_diag, 1.0);
            try {
                delta = cholesky_solve(std::move(hj), s, nu);
                break;
            } catch (const NumericError&) {
                if (jitter == 1e-4)
                    throw;
            }
        }
        double lambda = 1.0;
        for (int half = 0; half < 40; ++half) {
            std::vector<double> trial(nu);
            for (int j = 0; j < nu; ++j)
                trial[j] = beta[j] + lambda * delta[j];
            double ll_trial = ctx.loglik(trial);
            if (ll_trial >= ll - 1e-12 * std::fabs(ll)) {
                beta = std::move(trial);
                ll = ll_trial;
                break;
            }
            lambda *= 0.5;
            if (half == 39)
                throw NumericError("GLM step-halving failed to improve the likelihood");
        }
        res.iterations = iter;
    }
    throw NumericError("GLM did not converge in 100 iterations");
}

double poisson_deviance_stat(std::span<const long long> y, std::span<const double> mu) {
    double g2 = 0.0;
    for (size_t i = 0; i < y.size(); ++i)
        if (y[i] > 0)
            g2 += y[i] * std::log(y[i] / mu[i]);
    return 2.0 * g2;
}

double binomial_deviance_stat(std::span<const long long> y, std::span<const long long> n,
                              std::span<const double> mu) {
    double g2 = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double fit_s = n[i] * mu[i];
        const double fit_f = n[i] * (1.0 - mu[i]);
        if (y[i] > 0)
            g2 += y[i] * std::log(y[i] / fit_s);
        if (n[i] - y[i] > 0)
            g2 += (n[i] - y[i]) * std::log((n[i] - y[i]) / fit_f);
    }
    return 2.0 * g2;
}

double poisson_pearson_stat(std::span<const long long> y, std::span<const double> mu) {
    double x2 = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (mu[i] <= 0.0)
            throw NumericError("Pearson statistic undefined: fitted mean is zero");
        const double d = y[i] - mu[i];
        x2 += d * d / mu[i];
    }
    return x2;
}

double binomial_pearson_stat(std::span<const long long> y, std::span<const long long> n,
                             std::span<const double> mu) {
    double x2 = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double v = n[i] * mu[i] * (1.0 - mu[i]);
        if (v <= 0.0)
            throw NumericError("Pearson statistic undefined: fitted variance is zero");
        const double d = y[i] - n[i] * mu[i];
        x2 += d * d / v;
    }
    return x2;
}

namespace {

// Regularized incomplete gamma: P by series, Q by continued fraction.
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double chisq_upper_tail(double x, int df) {
    if (df <= 0)
        throw Error("chi-square degrees of freedom must be positive");
    if (x < 0.0)
        throw Error("chi-square statistic must be nonnegative");
    if (x == 0.0)
        return 1.0;
    const double a = 0.5 * df, xx = 0.5 * x;
    if (xx < a + 1.0)
        return 1.0 - gamma_p_series(a, xx);
    return gamma_q_contfrac(a, xx);
}

double chisq_pdf(double x, int df) {
    if (x <= 0.0)
        return df == 2 && x == 0.0 ? 0.5 : 0.0;
    const double a = 0.5 * df;
    return std::exp((a - 1.0) * std::log(x) - 0.5 * x - std::lgamma(a) - a * std::numbers::ln2);
}

} // namespace fracfact

// quantiles.cpp — order statistics, bootstrap intervals, slope fits.
#include "gffnet/quantiles.hpp"

#include <algorithm>
#include <cmath>

#include "gffnet/errors.hpp"
#include "gffnet/rng.hpp"

namespace gffnet {

namespace {

// 0-based order-statistic index of the lower-interpolation p-quantile.
std::size_t quantile_index(std::size_t n, double p) {
    const double kp = std::ceil(p * static_cast<double>(n) - 1e-9);
    long long k = static_cast<long long>(kp);
    if (k < 1) k = 1;
    if (k > static_cast<long long>(n)) k = static_cast<long long>(n);
    return static_cast<std::size_t>(k - 1);
}

double quantile_of_sorted_copy(std::vector<double>& scratch, double p) {
    const std::size_t k = quantile_index(scratch.size(), p);
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                     scratch.end());
    return scratch[k];
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool ok = false;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    OlsFit fit;
    if (sxx <= 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.ok = true;
    return fit;
}

}  // namespace

double quantile_lower(const std::vector<double>& samples, double p) {
    if (samples.empty()) throw ConfigError("quantile_lower: empty sample set");
    if (!(p > 0.0) || !(p < 1.0)) throw ConfigError("quantile_lower: p must be in (0,1)");
    std::vector<double> scratch = samples;
    return quantile_of_sorted_copy(scratch, p);
}

Interval bootstrap_quantile_ci(const std::vector<double>& samples, double p,
                               int resamples, std::uint64_t seed, double confidence) {
    if (samples.empty()) throw ConfigError("bootstrap_quantile_ci: empty sample set");
    if (resamples < 1) throw ConfigError("bootstrap_quantile_ci: resamples must be >= 1");
    if (!(confidence > 0.0) || !(confidence < 1.0)) {
        throw ConfigError("bootstrap_quantile_ci: confidence must be in (0,1)");
    }
    const std::size_t n = samples.size();
    Rng rng(seed);
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    std::vector<double> scratch(n);
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            scratch[i] = samples[rng.below(n)];
        }
        stats[static_cast<std::size_t>(r)] = quantile_of_sorted_copy(scratch, p);
    }
    const double alpha = 1.0 - confidence;
    Interval ci;
    ci.lo = quantile_lower(stats, alpha / 2.0);
    ci.hi = quantile_lower(stats, 1.0 - alpha / 2.0);
    return ci;
}

SlopeFit slope_with_ci(const std::vector<double>& x, const std::vector<double>& y,
                       int resamples, std::uint64_t seed, double confidence) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ConfigError("slope_with_ci: need >= 2 matching (x, y) pairs");
    }
    if (resamples < 1) throw ConfigError("slope_with_ci: resamples must be >= 1");
    const OlsFit fit = ols(x, y);
    if (!fit.ok) throw ConfigError("slope_with_ci: x values are degenerate");

    const std::size_t n = x.size();
    Rng rng(seed);
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(resamples));
    std::vector<double> rx(n), ry(n);
    const int max_attempts = 10 * resamples;
    for (int attempt = 0; attempt < max_attempts &&
                          static_cast<int>(slopes.size()) < resamples;
         ++attempt) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(n));
            rx[i] = x[j];
            ry[i] = y[j];
        }
        const OlsFit f = ols(rx, ry);
        if (f.ok) slopes.push_back(f.slope);
    }
    if (slopes.empty()) throw ConfigError("slope_with_ci: bootstrap produced no valid fits");

    const double alpha = 1.0 - confidence;
    SlopeFit out;
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.slope_ci.lo = quantile_lower(slopes, alpha / 2.0);
    out.slope_ci.hi = quantile_lower(slopes, 1.0 - alpha / 2.0);
    return out;
}

MomentSummary summarize(const std::vector<double>& samples) {
    MomentSummary s;
    s.count = static_cast<long long>(samples.size());
    if (samples.empty()) return s;
    double mean = 0.0, m2 = 0.0;
    long long k = 0;
    for (double x : samples) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    s.mean = mean;
    s.sd = s.count > 1 ? std::sqrt(m2 / static_cast<double>(s.count - 1)) : 0.0;
    s.se = s.count > 0 ? s.sd / std::sqrt(static_cast<double>(s.count)) : 0.0;
    return s;
}

}  // namespace gffnet

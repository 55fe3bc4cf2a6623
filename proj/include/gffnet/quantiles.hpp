// quantiles.hpp — order-statistic quantiles, bootstrap confidence intervals,
// and the tightness functionals built from them.
#pragma once

#include <cstdint>
#include <vector>

namespace gffnet {

// Lower-interpolation order statistic: inf{x in samples : F_hat(x) >= p},
// i.e. the ceil(p*N)-th smallest value. p in (0,1).
double quantile_lower(const std::vector<double>& samples, double p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Percentile bootstrap CI for quantile_lower(samples, p); `resamples` draws
// from a dedicated stream.
Interval bootstrap_quantile_ci(const std::vector<double>& samples, double p,
                               int resamples, std::uint64_t seed,
                               double confidence = 0.95);

// Ordinary least squares y = a + b x; slope CI from a nonparametric bootstrap
// over (x, y) pairs.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    Interval slope_ci;
};
SlopeFit slope_with_ci(const std::vector<double>& x, const std::vector<double>& y,
                       int resamples, std::uint64_t seed,
                       double confidence = 0.95);

// Mean, sample SD and standard error of the mean.
struct MomentSummary {
    long long count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
};
MomentSummary summarize(const std::vector<double>& samples);

}  // namespace gffnet

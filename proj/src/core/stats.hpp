#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rsos {

struct Interval {
  double level = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double median = 0.0;
  Interval mean_ci;       // bootstrap percentile interval for the mean
};

inline constexpr int kBootstrapResamples = 2000;

double mean(std::span<const double> xs);
/// Unbiased sample variance (0 for fewer than two samples).
double variance(std::span<const double> xs);
double median(std::span<const double> xs);
/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::span<const double> xs, double q);

using Statistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap interval for `stat`, seeded and deterministic.
Interval bootstrap_ci(std::span<const double> xs, const Statistic& stat, double level, std::uint64_t seed,
                      int resamples = kBootstrapResamples);

SampleSummary summarize(std::span<const double> xs, double level, std::uint64_t seed);

/// Dvoretzky-Kiefer-Wolfowitz half-width: sqrt(ln(2/alpha) / (2n)).
double dkw_epsilon(double alpha, std::size_t n);

/// Asymptotic Kolmogorov p-value for statistic D at effective size n_eff
/// (with the Stephens small-sample correction).
double kolmogorov_pvalue(double d, double n_eff);

struct KsResult {
  double d = 0.0;
  double p_asymptotic = 1.0;
  /// Half-width of the combined band: each empirical CDF within
  /// dkw_epsilon(alpha / 2, n) of the common truth.
  double dkw_band = 0.0;
  bool within_band() const noexcept { return d <= dkw_band; }
};

inline constexpr std::size_t kMinKsSamples = 50;

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha = 0.01);
/// One-sample test against a continuous CDF.
KsResult ks_one_sample(std::span<const double> xs, const std::function<double(double)>& cdf, double alpha = 0.01);
KsResult ks_one_sample_exponential(std::span<const double> xs, double rate = 1.0, double alpha = 0.01);

/// sup_x (F_a(x) - F_b(x)): how far the empirical CDF of a rises above b.
double max_cdf_excess(std::span<const double> a, std::span<const double> b);

struct PoissonTail {
  double lower_tail_bound = 0.0;  // exp(-t G(x / t)) with G(y) = 1 - y + y log y
  double path_event_bound_c = 0.0;
};

/// Requires 0 < x <= t.
PoissonTail poisson_tail_bounds(double t, double x, int d);
/// c(d) = 1 - log(2d+1)/(10d) - log(10d)/(10d) - 1/(10d).
double path_event_constant(int d);
double poisson_pmf(double t, std::int64_t k);
/// P(Poi(t) <= x) by direct summation.
double poisson_lower_tail(double t, double x);
/// sum_{k <= t/(10d)} (2d+1)^k P(Poi(t) = k).
double path_union_bound(double t, int d);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

struct GrowthRate {
  double rho_hat = 0.0;
  double rho_inv_hat = 0.0;
  double stderr_rho = 0.0;
  double stderr_rho_inv = 0.0;
  std::size_t replications = 0;
};

inline constexpr std::size_t kMinGrowthReplications = 100;

/// `tables[r][u]` is T(u) of replication r. Fits mean T(u) against u over
/// [u_lo, u_hi]; the standard error comes from per-replication slopes.
GrowthRate growth_rate_estimate(const std::vector<std::vector<double>>& tables, int u_lo, int u_hi);

struct VarianceRow {
  double t = 0.0;
  std::size_t n = 0;
  double var = 0.0;
  Interval ci;
  double var_over_t = 0.0;
  double var_over_log_t = 0.0;
};

/// One row per entry of `samples` (heights at time times[i]).
std::vector<VarianceRow> variance_summary(std::span<const double> times,
                                          const std::vector<std::vector<double>>& samples, double level,
                                          std::uint64_t seed);

}  // namespace rsos

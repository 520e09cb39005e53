#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rsos {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = s / static_cast<double>(xs.size());
  double c = 0.0;
  for (double x : xs) c += x - m;
  return m + c / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  double c = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
    c += x - m;
  }
  const double n = static_cast<double>(xs.size());
  return std::max(0.0, (ss - c * c / n) / (n - 1.0));
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) fail(ErrorCode::invalid_argument, "quantile of an empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::span<const double> xs) { return quantile(xs, 0.5); }

Interval bootstrap_ci(std::span<const double> xs, const Statistic& stat, double level, std::uint64_t seed,
                      int resamples) {
  if (xs.empty()) fail(ErrorCode::invalid_argument, "bootstrap of an empty sample");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
  Stream stream = Stream(seed).child(kBootstrapStream);
  std::vector<double> draw(xs.size());
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (auto& s : stats) {
    for (auto& d : draw) d = xs[stream.below(xs.size())];
    s = stat(draw);
  }
  const double tail = (1.0 - level) / 2.0;
  return {level, quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

SampleSummary summarize(std::span<const double> xs, double level, std::uint64_t seed) {
  SampleSummary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = mean(xs);
  s.variance = variance(xs);
  s.median = median(xs);
  s.mean_ci = bootstrap_ci(xs, [](std::span<const double> v) { return mean(v); }, level, seed);
  return s;
}

double dkw_epsilon(double alpha, std::size_t n) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::invalid_argument, "dkw_epsilon needs n > 0, 0 < alpha < 1");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double kolmogorov_pvalue(double d, double n_eff) {
  const double root = std::sqrt(n_eff);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

std::vector<double> sorted(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

/// Walks both sorted samples jointly; calls f(F_a, F_b) after each distinct value.
template <typename F>
void walk_cdfs(const std::vector<double>& a, const std::vector<double>& b, F f) {
  std::size_t i = 0;
  std::size_t j = 0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    f(static_cast<double>(i) / na, static_cast<double>(j) / nb);
  }
}

void check_sizes(std::size_t n, const char* what) {
  if (n < kMinKsSamples) {
    fail(ErrorCode::invalid_argument, std::string(what) + ": need at least " + std::to_string(kMinKsSamples) +
                                          " samples, got " + std::to_string(n));
  }
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha) {
  check_sizes(a.size(), "ks_two_sample");
  check_sizes(b.size(), "ks_two_sample");
  const auto sa = sorted(a);
  const auto sb = sorted(b);
  KsResult r;
  walk_cdfs(sa, sb, [&](double fa, double fb) { r.d = std::max(r.d, std::abs(fa - fb)); });
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  r.p_asymptotic = kolmogorov_pvalue(r.d, na * nb / (na + nb));
  r.dkw_band = dkw_epsilon(alpha / 2.0, a.size()) + dkw_epsilon(alpha / 2.0, b.size());
  return r;
}

double max_cdf_excess(std::span<const double> a, std::span<const double> b) {
  const auto sa = sorted(a);
  const auto sb = sorted(b);
  double m = 0.0;
  walk_cdfs(sa, sb, [&](double fa, double fb) { m = std::max(m, fa - fb); });
  return m;
}

KsResult ks_one_sample(std::span<const double> xs, const std::function<double(double)>& cdf, double alpha) {
  check_sizes(xs.size(), "ks_one_sample");
  const auto v = sorted(xs);
  const double n = static_cast<double>(v.size());
  KsResult r;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    r.d = std::max({r.d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  r.p_asymptotic = kolmogorov_pvalue(r.d, n);
  r.dkw_band = dkw_epsilon(alpha, v.size());
  return r;
}

KsResult ks_one_sample_exponential(std::span<const double> xs, double rate, double alpha) {
  return ks_one_sample(xs, [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }, alpha);
}

// ---------------------------------------------------------------------------

double path_event_constant(int d) {
  if (d < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
  const double ten_d = 10.0 * d;
  return 1.0 - std::log(2.0 * d + 1.0) / ten_d - std::log(ten_d) / ten_d - 1.0 / ten_d;
}

PoissonTail poisson_tail_bounds(double t, double x, int d) {
  if (!(t > 0.0) || !(x > 0.0) || x > t) {
    fail(ErrorCode::invalid_argument, "poisson_tail_bounds needs 0 < x <= t");
  }
  const double y = x / t;
  const double g = 1.0 - y + y * std::log(y);
  return {std::exp(-t * g), path_event_constant(d)};
}

double poisson_pmf(double t, std::int64_t k) {
  if (k < 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(t) - t - std::lgamma(kd + 1.0));
}

double poisson_lower_tail(double t, double x) {
  if (x < 0.0) return 0.0;
  const auto kmax = static_cast<std::int64_t>(std::floor(x));
  double s = 0.0;
  for (std::int64_t k = kmax; k >= 0; --k) s += poisson_pmf(t, k);
  return std::min(s, 1.0);
}

double path_union_bound(double t, int d) {
  const auto kmax = static_cast<std::int64_t>(std::floor(t / (10.0 * d)));
  const double branching = std::log(2.0 * d + 1.0);
  double s = 0.0;
  for (std::int64_t k = 0; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    s += std::exp(kd * branching + kd * std::log(t) - t - std::lgamma(kd + 1.0));
  }
  return s;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::invalid_argument, "least squares needs >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) fail(ErrorCode::invalid_argument, "least squares with constant abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

GrowthRate growth_rate_estimate(const std::vector<std::vector<double>>& tables, int u_lo, int u_hi) {
  if (u_lo < 0 || u_hi <= u_lo) fail(ErrorCode::invalid_argument, "growth rate needs 0 <= u_lo < u_hi");
  std::vector<const std::vector<double>*> usable;
  for (const auto& t : tables) {
    if (t.size() > static_cast<std::size_t>(u_hi)) usable.push_back(&t);
  }
  if (usable.size() < kMinGrowthReplications) {
    fail(ErrorCode::invalid_argument, "growth rate needs at least " + std::to_string(kMinGrowthReplications) +
                                          " replications reaching u = " + std::to_string(u_hi) + ", got " +
                                          std::to_string(usable.size()));
  }
  std::vector<double> us;
  for (int u = u_lo; u <= u_hi; ++u) us.push_back(u);
  std::vector<double> means(us.size(), 0.0);
  std::vector<double> slopes;
  std::vector<double> ys(us.size());
  for (const auto* t : usable) {
    for (std::size_t i = 0; i < us.size(); ++i) {
      ys[i] = (*t)[static_cast<std::size_t>(u_lo) + i];
      means[i] += ys[i];
    }
    slopes.push_back(least_squares(us, ys).slope);
  }
  for (auto& m : means) m /= static_cast<double>(usable.size());
  GrowthRate g;
  g.replications = usable.size();
  g.rho_hat = least_squares(us, means).slope;
  g.rho_inv_hat = 1.0 / g.rho_hat;
  g.stderr_rho = std::sqrt(variance(slopes) / static_cast<double>(slopes.size()));
  g.stderr_rho_inv = g.stderr_rho / (g.rho_hat * g.rho_hat);
  return g;
}

std::vector<VarianceRow> variance_summary(std::span<const double> times,
                                          const std::vector<std::vector<double>>& samples, double level,
                                          std::uint64_t seed) {
  if (times.size() != samples.size()) fail(ErrorCode::invalid_argument, "variance table size mismatch");
  std::vector<VarianceRow> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    VarianceRow r;
    r.t = times[i];
    r.n = samples[i].size();
    r.var = variance(samples[i]);
    r.ci = bootstrap_ci(samples[i], [](std::span<const double> v) { return variance(v); }, level,
                        derive_seed(seed, i));
    r.var_over_t = r.var / r.t;
    r.var_over_log_t = r.t > 1.0 ? r.var / std::log(r.t) : 0.0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rsos

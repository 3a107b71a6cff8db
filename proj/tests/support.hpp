// Test-side oracles. Nothing here calls into the estimation code.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "apcr/censoring.hpp"
#include "apcr/rng.hpp"

namespace apcr::testing {

inline double weibull_cdf(double x, double alpha, double lambda) {
  return x <= 0.0 ? 0.0 : -std::expm1(-lambda * std::pow(x, alpha));
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic D_n.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Asymptotic KS critical value sqrt(-ln(a/2)/2)/sqrt(n).
inline double ks_critical(std::size_t n, double significance) {
  return std::sqrt(-0.5 * std::log(significance / 2.0)) / std::sqrt(static_cast<double>(n));
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

/// Hand-built sample that bypasses the generator.
inline CompetingRisksSample make_sample(std::vector<double> times, std::vector<int> causes,
                                        std::vector<int> removals, double T = kInfinity) {
  CompetingRisksSample s;
  s.times = std::move(times);
  for (int c : causes) s.causes.push_back(c == 1 ? Cause::First : Cause::Second);
  s.removals = std::move(removals);
  s.plan.m = static_cast<int>(s.times.size());
  s.plan.n = s.plan.m + std::accumulate(s.removals.begin(), s.removals.end(), 0);
  s.plan.removals = s.removals;
  s.plan.ideal_time = T;
  s.change_index = 0;
  for (double t : s.times) s.change_index += t <= T;
  return s;
}

inline CompetingRisksSample simulate(int n, int m, const std::vector<int>& R, double T, double alpha,
                                     double l1, double l2, std::uint64_t seed, std::uint64_t id) {
  CensoringPlan plan{n, m, R, T};
  auto rng = seed_stream(seed, id);
  return generate_sample(plan, alpha, l1, l2, rng);
}

/// Right-censoring scheme (0, ..., 0, n - m).
inline std::vector<int> right_scheme(int n, int m) {
  std::vector<int> r(static_cast<std::size_t>(m), 0);
  r.back() = n - m;
  return r;
}

inline CompetingRisksSample scaled(CompetingRisksSample s, double c) {
  for (double& t : s.times) t *= c;
  s.plan.ideal_time *= c;
  return s;
}

/// g(alpha) = sum (R*_i + 1) x_i^alpha, straight from the definition.
inline double direct_g(const CompetingRisksSample& s, double alpha) {
  double g = 0.0;
  for (std::size_t i = 0; i < s.times.size(); ++i) g += (s.removals[i] + 1) * std::pow(s.times[i], alpha);
  return g;
}

inline double sum_log(const CompetingRisksSample& s) {
  double t = 0.0;
  for (double x : s.times) t += std::log(x);
  return t;
}

}  // namespace apcr::testing

#include "apcr/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "apcr/error.hpp"
#include "apcr/prestimate.hpp"

namespace apcr {

namespace {

// n * ln(x) with the 0 * ln(0) = 0 convention for unobserved causes.
double xlogy(int n, double x) { return n == 0 ? 0.0 : n * std::log(x); }

void require_positive_shape(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ParameterError("shape parameter must be positive and finite");
}

}  // namespace

ParameterView view(const RestrictedParams& p) noexcept {
  return {p.alpha, p.lambda1, p.lambda2(), p.beta};
}
ParameterView view(const UnrestrictedParams& p) noexcept {
  return {p.alpha, p.lambda1, p.lambda2, p.lambda2 / p.lambda1};
}
ParameterView view(const EqualScalesParams& p) noexcept {
  return {p.alpha, p.lambda, p.lambda, 1.0};
}

SufficientStats::SufficientStats(const CompetingRisksSample& sample)
    : m_(sample.m()), m1_(sample.m1()), m2_(sample.m2()) {
  if (sample.removals.size() != sample.times.size())
    throw ValidationError("sufficient statistics", {"length: removals and times differ"});
  log_x_.reserve(sample.times.size());
  log_weight_.reserve(sample.times.size());
  for (std::size_t i = 0; i < sample.times.size(); ++i) {
    if (!(sample.times[i] > 0.0))
      throw ValidationError("sufficient statistics", {"positive times: failure times must be > 0"});
    log_x_.push_back(std::log(sample.times[i]));
    log_weight_.push_back(std::log(static_cast<double>(sample.removals[i]) + 1.0));
    sum_log_x_ += log_x_.back();
  }
  if (!log_x_.empty()) {
    const auto [lo, hi] = std::minmax_element(log_x_.begin(), log_x_.end());
    has_spread_ = *lo != *hi;
  }
}

PowerSums SufficientStats::power_sums(double alpha) const {
  PowerSums s;
  for (std::size_t i = 0; i < log_x_.size(); ++i) {
    const double term = std::exp(log_weight_[i] + alpha * log_x_[i]);
    s.g += term;
    s.g1 += term * log_x_[i];
    s.g2 += term * log_x_[i] * log_x_[i];
  }
  return s;
}

LogPowerMoments SufficientStats::moments(double alpha) const {
  LogPowerMoments out;
  if (log_x_.empty()) {
    out.log_g = -std::numeric_limits<double>::infinity();
    return out;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_x_.size(); ++i)
    top = std::max(top, log_weight_[i] + alpha * log_x_[i]);
  double total = 0.0, first = 0.0;
  for (std::size_t i = 0; i < log_x_.size(); ++i) {
    const double w = std::exp(log_weight_[i] + alpha * log_x_[i] - top);
    total += w;
    first += w * log_x_[i];
  }
  out.log_g = top + std::log(total);
  out.mean_log = first / total;
  double second = 0.0;
  for (std::size_t i = 0; i < log_x_.size(); ++i) {
    const double w = std::exp(log_weight_[i] + alpha * log_x_[i] - top);
    const double d = log_x_[i] - out.mean_log;
    second += w * d * d;
  }
  out.var_log = second / total;
  return out;
}

double SufficientStats::log_g(double alpha) const { return moments(alpha).log_g; }

PowerSums weighted_power_sums(const CompetingRisksSample& sample, double alpha) {
  require_positive_shape(alpha);
  return SufficientStats(sample).power_sums(alpha);
}

double loglik_restricted(const RestrictedParams& p, const CompetingRisksSample& sample) {
  const SufficientStats st(sample);
  const double decay = std::exp(std::log(p.lambda1) + std::log1p(p.beta) + st.log_g(p.alpha));
  return st.m() * (std::log(p.alpha) + std::log(p.lambda1)) + xlogy(st.m2(), p.beta) +
         (p.alpha - 1.0) * st.sum_log_x() - decay;
}

double loglik_unrestricted(const UnrestrictedParams& p, const CompetingRisksSample& sample) {
  const SufficientStats st(sample);
  const double decay = (p.lambda1 + p.lambda2) * std::exp(st.log_g(p.alpha));
  return st.m() * std::log(p.alpha) + xlogy(st.m1(), p.lambda1) + xlogy(st.m2(), p.lambda2) +
         (p.alpha - 1.0) * st.sum_log_x() - decay;
}

double loglik_equal_scales(const EqualScalesParams& p, const CompetingRisksSample& sample) {
  const SufficientStats st(sample);
  const double decay = 2.0 * p.lambda * std::exp(st.log_g(p.alpha));
  return st.m() * (std::log(p.alpha) + std::log(p.lambda)) + (p.alpha - 1.0) * st.sum_log_x() -
         decay;
}

double profile_p1(double alpha, const SufficientStats& st) {
  return st.m() * (std::log(alpha) - st.log_g(alpha)) + (alpha - 1.0) * st.sum_log_x();
}

double profile_p1(double alpha, const CompetingRisksSample& sample) {
  return profile_p1(alpha, SufficientStats(sample));
}

double profile_p1_derivative(double alpha, const SufficientStats& st) {
  return st.m() * (1.0 / alpha - st.moments(alpha).mean_log) + st.sum_log_x();
}

std::vector<ProfilePoint> profile_series(const SufficientStats& st, double lower, double upper,
                                         int points) {
  if (!(lower > 0.0 && upper > lower && std::isfinite(upper)) || points < 2)
    throw UsageError("profile grid needs 0 < lower < upper and at least two points");
  std::vector<ProfilePoint> out;
  out.reserve(static_cast<std::size_t>(points));
  const double step = std::log(upper / lower) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double a = i + 1 == points ? upper : lower * std::exp(step * i);
    out.push_back({a, profile_p1(a, st)});
  }
  return out;
}

std::optional<double> fixed_point_map_h(double alpha, const SufficientStats& st) {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || st.m() == 0) return std::nullopt;
  const double denom = st.moments(alpha).mean_log - st.sum_log_x() / st.m();
  if (!(denom > 0.0) || !std::isfinite(denom)) return std::nullopt;
  return 1.0 / denom;
}

std::optional<double> fixed_point_map_h(double alpha, const CompetingRisksSample& sample) {
  return fixed_point_map_h(alpha, SufficientStats(sample));
}

ShapeSolution solve_shape_fixed_point(const SufficientStats& st, double alpha0, double eps,
                                      int max_iter, bool keep_trace) {
  ShapeSolution sol;
  sol.path = SolverPath::FixedPoint;
  double current = alpha0;
  if (keep_trace) sol.trace.push_back(current);
  for (int k = 0; k < max_iter; ++k) {
    const auto next = fixed_point_map_h(current, st);
    sol.iterations = k + 1;
    if (!next || !std::isfinite(*next)) break;
    if (keep_trace) sol.trace.push_back(*next);
    if (std::abs(*next - current) < eps) {
      sol.alpha = *next;
      sol.converged = true;
      return sol;
    }
    current = *next;
  }
  sol.alpha = current;
  return sol;
}

ShapeSolution solve_shape_golden(const SufficientStats& st, double lower, double upper,
                                 double tol) {
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  ShapeSolution sol;
  sol.path = SolverPath::GoldenSection;
  double a = lower, b = upper;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = profile_p1(c, st);
  double fd = profile_p1(d, st);
  while (b - a > tol) {
    ++sol.iterations;
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = profile_p1(c, st);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = profile_p1(d, st);
    }
  }
  sol.alpha = 0.5 * (a + b);
  // A maximizer pinned to an end of the bracket is not an interior optimum.
  sol.converged = sol.alpha - lower > 10.0 * tol && upper - sol.alpha > 10.0 * tol;
  return sol;
}

namespace {

// A slowly contracting h leaves |da| < eps well short of stationarity, so the
// accepted root gets a few Newton steps on the (strictly concave) profile.
double polish_shape(const SufficientStats& st, double alpha) {
  const double m = st.m();
  auto score = [&](double a, double& curvature) {
    const auto mo = st.moments(a);
    curvature = -m / (a * a) - m * mo.var_log;
    return m / a - m * mo.mean_log + st.sum_log_x();
  };
  double curvature = 0.0;
  double s = score(alpha, curvature);
  for (int k = 0; k < 5 && s != 0.0; ++k) {
    const double next = alpha - s / curvature;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    double next_curvature = 0.0;
    const double next_s = score(next, next_curvature);
    if (!(std::abs(next_s) < std::abs(s))) break;
    alpha = next;
    s = next_s;
    curvature = next_curvature;
  }
  return alpha;
}

}  // namespace

ShapeSolution maximize_profile(const SufficientStats& st, const SolverOptions& opts) {
  if (st.m() < 2 || !st.has_spread())
    throw DegenerateSampleError(
        "degenerate profile likelihood: need m >= 2 and at least two distinct failure times "
        "(p1 has no finite maximizer)");
  const double alpha0 = opts.alpha0.value_or(1.0);
  require_positive_shape(alpha0);
  auto fixed = solve_shape_fixed_point(st, alpha0, opts.eps, opts.max_iter, opts.keep_trace);
  if (fixed.converged) {
    fixed.alpha = polish_shape(st, fixed.alpha);
    return fixed;
  }

  auto golden = solve_shape_golden(st);
  golden.trace = std::move(fixed.trace);
  golden.iterations += fixed.iterations;
  if (!golden.converged)
    throw ConvergenceError("shape MLE: fixed-point iteration failed and golden-section search "
                           "hit the bracket end",
                           golden.trace);
  golden.alpha = polish_shape(st, golden.alpha);
  return golden;
}

namespace {

struct ShapeFit {
  SufficientStats stats;
  ShapeSolution solution;
  double g = 0.0;
};

ShapeFit fit_shape(const CompetingRisksSample& sample, const SolverOptions& opts) {
  SufficientStats st(sample);
  SolverOptions o = opts;
  if (!o.alpha0 && st.m() >= 2 && st.has_spread()) o.alpha0 = prestimate_alpha(sample);
  auto sol = maximize_profile(st, o);
  const double g = std::exp(st.log_g(sol.alpha));
  return {std::move(st), std::move(sol), g};
}

template <class P>
FitResult<P> package(P params, const ShapeFit& f, double loglik) {
  FitResult<P> r;
  r.params = params;
  r.max_loglik = loglik;
  r.iterations = f.solution.iterations;
  r.converged = f.solution.converged;
  r.path = f.solution.path;
  r.solver_trace = f.solution.trace;
  return r;
}

}  // namespace

RestrictedFit fit_restricted(const CompetingRisksSample& sample, const SolverOptions& opts) {
  const auto f = fit_shape(sample, opts);
  const int m = f.stats.m(), m1 = f.stats.m1(), m2 = f.stats.m2();
  const double beta = m1 > m2 ? static_cast<double>(m2) / m1 : 1.0;
  RestrictedParams p{f.solution.alpha, m / ((1.0 + beta) * f.g), beta};
  auto r = package(p, f, loglik_restricted(p, sample));
  r.boundary = m2 == 0;
  return r;
}

UnrestrictedFit fit_unrestricted(const CompetingRisksSample& sample, const SolverOptions& opts) {
  const auto f = fit_shape(sample, opts);
  UnrestrictedParams p{f.solution.alpha, f.stats.m1() / f.g, f.stats.m2() / f.g};
  auto r = package(p, f, loglik_unrestricted(p, sample));
  r.boundary = f.stats.m1() == 0 || f.stats.m2() == 0;
  return r;
}

EqualScalesFit fit_null_equal_scales(const CompetingRisksSample& sample,
                                     const SolverOptions& opts) {
  const auto f = fit_shape(sample, opts);
  EqualScalesParams p{f.solution.alpha, f.stats.m() / (2.0 * f.g)};
  return package(p, f, loglik_equal_scales(p, sample));
}

double chi_square1_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("significance level must lie in (0, 1)");
  const boost::math::normal_distribution<double> z;
  const double q = boost::math::quantile(boost::math::complement(z, level / 2.0));
  return q * q;
}

double chi_square1_survival(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

LrtResult lrt_decision(double statistic, double level) {
  LrtResult r;
  r.level = level;
  r.statistic = statistic;
  r.critical = chi_square1_critical(level);
  r.p_value = chi_square1_survival(statistic);
  r.reject = statistic > r.critical;
  return r;
}

LrtResult lrt_equal_scales(const CompetingRisksSample& sample, double level,
                           const SolverOptions& opts) {
  const auto full = fit_unrestricted(sample, opts);
  const auto null = fit_null_equal_scales(sample, opts);
  double stat = -2.0 * (null.max_loglik - full.max_loglik);
  if (stat < -1e-8)
    throw NumericError("likelihood-ratio statistic is negative (" + std::to_string(stat) +
                       "): null and full fits are inconsistent");
  stat = std::max(stat, 0.0);
  return lrt_decision(stat, level);
}

}  // namespace apcr

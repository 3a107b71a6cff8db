#pragma once

#include <optional>
#include <vector>

#include "apcr/censoring.hpp"

namespace apcr {

/// Order-restricted parameterization: lambda2 = beta * lambda1 with 0 < beta <= 1.
struct RestrictedParams {
  double alpha = 1.0;
  double lambda1 = 1.0;
  double beta = 1.0;
  double lambda2() const noexcept { return beta * lambda1; }
};

struct UnrestrictedParams {
  double alpha = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

/// Null model of the equal-scales test, lambda1 = lambda2 = lambda.
struct EqualScalesParams {
  double alpha = 1.0;
  double lambda = 1.0;
};

/// Flat (alpha, lambda1, lambda2, beta) view used by functionals and reports.
struct ParameterView {
  double alpha = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double beta = 0.0;
};

ParameterView view(const RestrictedParams& p) noexcept;
ParameterView view(const UnrestrictedParams& p) noexcept;
ParameterView view(const EqualScalesParams& p) noexcept;

struct PowerSums {
  double g = 0.0;   ///< sum (R*_i+1) x_i^a
  double g1 = 0.0;  ///< sum (R*_i+1) x_i^a ln x_i
  double g2 = 0.0;  ///< sum (R*_i+1) x_i^a (ln x_i)^2
};

/// Log-domain form of the power sums: ln g and the g-weighted mean and
/// variance of ln x. Stays finite where g itself would overflow.
struct LogPowerMoments {
  double log_g = 0.0;
  double mean_log = 0.0;  ///< g1 / g
  double var_log = 0.0;   ///< g2 / g - (g1 / g)^2 >= 0
};

/// Per-sample quantities reused by every likelihood evaluation.
class SufficientStats {
 public:
  explicit SufficientStats(const CompetingRisksSample& sample);

  int m() const noexcept { return m_; }
  int m1() const noexcept { return m1_; }
  int m2() const noexcept { return m2_; }
  double sum_log_x() const noexcept { return sum_log_x_; }
  /// True when at least two failure times differ.
  bool has_spread() const noexcept { return has_spread_; }

  PowerSums power_sums(double alpha) const;
  LogPowerMoments moments(double alpha) const;
  double log_g(double alpha) const;

 private:
  std::vector<double> log_x_;
  std::vector<double> log_weight_;  // ln(R*_i + 1)
  int m_ = 0;
  int m1_ = 0;
  int m2_ = 0;
  double sum_log_x_ = 0.0;
  bool has_spread_ = false;
};

PowerSums weighted_power_sums(const CompetingRisksSample& sample, double alpha);

double loglik_restricted(const RestrictedParams& params, const CompetingRisksSample& sample);
double loglik_unrestricted(const UnrestrictedParams& params, const CompetingRisksSample& sample);
double loglik_equal_scales(const EqualScalesParams& params, const CompetingRisksSample& sample);

/// Profile log-likelihood of the shape, shared by all three models:
/// m ln a - m ln g(a) + (a - 1) sum ln x.
double profile_p1(double alpha, const CompetingRisksSample& sample);
double profile_p1(double alpha, const SufficientStats& stats);
/// Analytic derivative of profile_p1.
double profile_p1_derivative(double alpha, const SufficientStats& stats);

struct ProfilePoint {
  double alpha;
  double p1;
};

/// p1 on `points` log-spaced shapes from lower to upper inclusive.
std::vector<ProfilePoint> profile_series(const SufficientStats& stats, double lower, double upper,
                                         int points);

/// Fixed-point map h(a) = [g1/g - mean ln x]^-1; empty when the bracket is
/// not positive (the iterate has left the basin).
std::optional<double> fixed_point_map_h(double alpha, const CompetingRisksSample& sample);
std::optional<double> fixed_point_map_h(double alpha, const SufficientStats& stats);

struct SolverOptions {
  std::optional<double> alpha0;  ///< default: regression prestimate
  double eps = 1e-8;
  int max_iter = 500;
  bool keep_trace = false;
};

enum class SolverPath { FixedPoint, GoldenSection };

struct ShapeSolution {
  double alpha = 0.0;
  int iterations = 0;
  bool converged = false;
  SolverPath path = SolverPath::FixedPoint;
  std::vector<double> trace;
};

inline constexpr double kGoldenLower = 1e-4;
inline constexpr double kGoldenUpper = 1e4;
inline constexpr double kGoldenTolerance = 1e-10;

/// Plain fixed-point iteration a <- h(a). Never throws on divergence; reports
/// converged = false instead.
ShapeSolution solve_shape_fixed_point(const SufficientStats& stats, double alpha0, double eps,
                                      int max_iter, bool keep_trace = false);

/// Golden-section maximization of profile_p1 on [lower, upper].
ShapeSolution solve_shape_golden(const SufficientStats& stats, double lower = kGoldenLower,
                                 double upper = kGoldenUpper, double tol = kGoldenTolerance);

/// Fixed point first, golden section on failure. Throws DegenerateSampleError
/// for samples without a finite maximizer, ConvergenceError if both fail.
ShapeSolution maximize_profile(const SufficientStats& stats, const SolverOptions& opts);

template <class Params>
struct FitResult {
  Params params;
  double max_loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Some lambda_k estimate sits on the zero boundary (a cause never observed).
  bool boundary = false;
  SolverPath path = SolverPath::FixedPoint;
  std::vector<double> solver_trace;
};

using RestrictedFit = FitResult<RestrictedParams>;
using UnrestrictedFit = FitResult<UnrestrictedParams>;
using EqualScalesFit = FitResult<EqualScalesParams>;

/// MLE under lambda1 >= lambda2: beta = m2/m1 if m1 > m2 else 1,
/// lambda1 = m / ((1 + beta) g(a)).
RestrictedFit fit_restricted(const CompetingRisksSample& sample, const SolverOptions& opts = {});

/// MLE without ordering: lambda_k = m_k / g(a). A cause with no failures gives
/// the lambda_k = 0 boundary, flagged rather than rejected.
UnrestrictedFit fit_unrestricted(const CompetingRisksSample& sample, const SolverOptions& opts = {});

/// MLE with lambda1 = lambda2 = lambda: lambda = m / (2 g(a)).
EqualScalesFit fit_null_equal_scales(const CompetingRisksSample& sample,
                                     const SolverOptions& opts = {});

struct LrtResult {
  double statistic = 0.0;
  int df = 1;
  double level = 0.05;
  double critical = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

/// Upper `level` quantile of chi-square with one degree of freedom.
double chi_square1_critical(double level);
/// P(chi-square_1 > x) = erfc(sqrt(x / 2)).
double chi_square1_survival(double x);

/// Decision for an already computed statistic.
LrtResult lrt_decision(double statistic, double level);

/// Likelihood-ratio test of lambda1 = lambda2 against the unrestricted model.
LrtResult lrt_equal_scales(const CompetingRisksSample& sample, double level,
                           const SolverOptions& opts = {});

}  // namespace apcr

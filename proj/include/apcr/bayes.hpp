#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "apcr/bootstrap.hpp"
#include "apcr/censoring.hpp"
#include "apcr/interval.hpp"
#include "apcr/likelihood.hpp"
#include "apcr/prestimate.hpp"
#include "apcr/rng.hpp"

namespace apcr {

/// Gamma(shape a, rate b) priors except (a3, b3), the beta prior on beta.
/// (a1,b1) lambda1, (a2,b2) alpha, (a3,b3) beta for the restricted model;
/// (a4,b4) lambda1, (a5,b5) lambda2, (a6,b6) alpha for the unrestricted one.
struct Priors {
  double a1 = 0.1, b1 = 0.1;
  double a2 = 0.1, b2 = 0.1;
  double a3 = 1.0, b3 = 1.0;
  double a4 = 0.1, b4 = 0.1;
  double a5 = 0.1, b5 = 0.1;
  double a6 = 0.1, b6 = 0.1;

  void validate() const;
};

/// How shape proposals are drawn. The regression-centred gamma(2, 2/alpha~)
/// is the supported path; `Conjugate` uses gamma(m + a - 1, A) and requires
/// A > 0, which depends on the time units.
enum class ShapeProposal { RegressionCentred, Conjugate };

/// Posterior pieces of the order-restricted model after integrating nothing:
/// pi(l1, a, b | x) ~ l1^(m+a1-1) a^(m+a2-1) b^(m2+a3-1) (1-b)^(b3-1)
///                    exp(-A1(a,b) l1 - A2 a).
class RestrictedPosterior {
 public:
  RestrictedPosterior(const CompetingRisksSample& sample, const Priors& priors);

  double log_A1(double alpha, double beta) const;
  double A1(double alpha, double beta) const;
  double A2() const noexcept { return A2_; }
  /// ln w(a, b) for proposal gamma(2, rate) on alpha and U(0,1) on beta.
  double log_weight(double alpha, double beta, double proposal_rate) const;
  /// lambda1 ~ gamma(m + a1, A1(a, b)).
  double draw_lambda1(double alpha, double beta, RngStream& rng) const;

  const SufficientStats& stats() const noexcept { return stats_; }
  const Priors& priors() const noexcept { return priors_; }

 private:
  SufficientStats stats_;
  Priors priors_;
  double A2_;
};

/// Unrestricted posterior, factorized as v(a) pi6(l1|a) pi7(l2|a) pi2(a).
class UnrestrictedPosterior {
 public:
  UnrestrictedPosterior(const CompetingRisksSample& sample, const Priors& priors);

  double log_A3(double alpha) const;
  double log_A4(double alpha) const;
  double A3(double alpha) const;
  double A4(double alpha) const;
  double A5() const noexcept { return A5_; }
  /// ln v(a) for proposal gamma(2, rate) on alpha.
  double log_weight(double alpha, double proposal_rate) const;
  double draw_lambda1(double alpha, RngStream& rng) const;  ///< gamma(m1 + a4, A3(a))
  double draw_lambda2(double alpha, RngStream& rng) const;  ///< gamma(m2 + a5, A4(a))

  const SufficientStats& stats() const noexcept { return stats_; }
  const Priors& priors() const noexcept { return priors_; }

 private:
  SufficientStats stats_;
  Priors priors_;
  double A5_;
};

/// Self-normalized importance sample from the posterior.
struct ImportanceDraws {
  Model model = Model::Restricted;
  std::vector<ParameterView> draws;  ///< beta = lambda2/lambda1 for the unrestricted model
  std::vector<double> log_weights;   ///< unnormalized
  std::vector<double> weights;       ///< normalized, sums to one
  double alpha_tilde = 1.0;
  double proposal_rate = 2.0;        ///< b = 2 / alpha_tilde
  double ess = 0.0;                  ///< (sum w)^2 / sum w^2
  bool low_ess = false;              ///< ess < 10

  std::size_t size() const noexcept { return draws.size(); }
};

inline constexpr double kLowEssThreshold = 10.0;

ImportanceDraws draw_importance_restricted(const CompetingRisksSample& sample, const Priors& priors,
                                           int M, RngStream& rng,
                                           ShapeProposal proposal = ShapeProposal::RegressionCentred);
ImportanceDraws draw_importance_unrestricted(const CompetingRisksSample& sample,
                                             const Priors& priors, int M, RngStream& rng,
                                             ShapeProposal proposal = ShapeProposal::RegressionCentred);

/// Log-sum-exp normalization; throws WeightDegeneracyError if no weight is finite.
std::vector<double> normalize_log_weights(std::span<const double> log_weights);

using ParameterFunction = std::function<double(const ParameterView&)>;

/// Posterior mean of h under squared error loss, sum w*_i h_i.
double bayes_estimate(const ImportanceDraws& draws, const ParameterFunction& h);

/// Delete-one jackknife standard error of bayes_estimate.
double bayes_estimate_jackknife_se(const ImportanceDraws& draws, const ParameterFunction& h);

/// h values sorted ascending with their weights carried along.
struct WeightedSample {
  std::vector<double> values;
  std::vector<double> weights;
};

WeightedSample sort_weighted(std::span<const double> values, std::span<const double> weights);

/// Zero-based (j1, j2) of a credible interval [h_(j1), h_(j2)].
struct CriIndices {
  std::size_t lower = 0;
  std::size_t upper = 0;
};

/// Tolerance applied to the cumulative-weight comparisons.
inline constexpr double kCumulativeWeightTolerance = 1e-11;

/// Equal-tail choice: lower is the last index whose preceding mass is at most
/// gamma/2; upper is the last index whose span mass from lower is at most
/// 1 - gamma (so adding the next draw exceeds it).
CriIndices symmetric_cri_indices(const WeightedSample& sorted, double gamma);

/// Narrowest (j1, j2) among all pairs with span mass <= 1 - gamma < span mass
/// including j2 + 1; ties go to the smaller j1. Two-pointer sweep.
CriIndices hpd_cri_indices(const WeightedSample& sorted, double gamma);

IntervalEstimate symmetric_cri(const ImportanceDraws& draws, const ParameterFunction& h,
                               double gamma);
IntervalEstimate hpd_cri(const ImportanceDraws& draws, const ParameterFunction& h, double gamma);

}  // namespace apcr

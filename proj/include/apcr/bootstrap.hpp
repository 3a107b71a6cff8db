#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apcr/censoring.hpp"
#include "apcr/interval.hpp"
#include "apcr/likelihood.hpp"

namespace apcr {

enum class Model { Restricted, Unrestricted };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

/// A named scalar function of the model parameters.
struct Functional {
  std::string name;
  std::function<double(const ParameterView&)> eval;
};

/// alpha, lambda1, lambda2 and, for the restricted model, beta.
std::vector<Functional> standard_functionals(Model model);

struct BootstrapDraws {
  std::string functional;
  std::vector<double> estimates;  ///< successful refits only, in resample order
  double point_estimate = 0.0;
  int B = 0;
  int failures = 0;
};

struct BootstrapOptions {
  int B = 1000;
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;  ///< selects the stream-id block
  unsigned workers = 1;
  SolverOptions solver;
};

struct BootstrapResult {
  std::vector<BootstrapDraws> draws;  ///< one per functional, in request order
  int B = 0;
  int failures = 0;
  bool warning = false;  ///< more than 10% of refits failed

  const BootstrapDraws& at(const std::string& functional) const;
};

/// Parametric bootstrap: regenerate under the plan at the fitted parameters,
/// refit the same model, evaluate each functional. Failed refits are counted
/// and dropped; more than half failing is an error.
BootstrapResult bootstrap_mles(const ParameterView& fitted, Model model, const CensoringPlan& plan,
                               const std::vector<Functional>& functionals,
                               const BootstrapOptions& opts);

BootstrapResult bootstrap_mles(const RestrictedFit& fit, const CensoringPlan& plan,
                               const std::vector<Functional>& functionals,
                               const BootstrapOptions& opts);
BootstrapResult bootstrap_mles(const UnrestrictedFit& fit, const CensoringPlan& plan,
                               const std::vector<Functional>& functionals,
                               const BootstrapOptions& opts);

/// Order statistics at ceil(B' gamma/2) and ceil(B' (1 - gamma/2)), 1-based.
IntervalEstimate percentile_interval(const BootstrapDraws& draws, double gamma);

/// tau - b -/+ z_{gamma/2} sqrt(v) with bias b = mean(tau*) - tau and v the
/// unbiased variance of tau*.
IntervalEstimate normal_bootstrap_interval(const BootstrapDraws& draws, double gamma);

}  // namespace apcr

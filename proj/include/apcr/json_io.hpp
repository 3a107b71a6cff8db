#pragma once

#include <json.hpp>

#include "apcr/bayes.hpp"
#include "apcr/bootstrap.hpp"
#include "apcr/censoring.hpp"
#include "apcr/interval.hpp"
#include "apcr/likelihood.hpp"

namespace apcr {

using Json = nlohmann::json;

/// {"n", "m", "R": [...], "T": number | "inf"}
Json plan_to_json(const CensoringPlan& plan);
/// SchemaError on missing or mistyped fields, ValidationError on a bad plan.
CensoringPlan plan_from_json(const Json& j);

/// A duration that may be the string "inf".
Json time_to_json(double t);
double time_from_json(const Json& j, const char* field);

// {alpha, lambda1, lambda2, beta, loglik, converged, iterations, ...}
Json fit_to_json(const RestrictedFit& fit);
Json fit_to_json(const UnrestrictedFit& fit);
Json fit_to_json(const EqualScalesFit& fit);

Json lrt_to_json(const LrtResult& lrt);

/// {method, level, lower, upper}
Json interval_to_json(const IntervalEstimate& interval);
/// {functional, method, level, lower, upper, B, failures}
Json interval_to_json(const IntervalEstimate& interval, const BootstrapDraws& draws);

/// {model, M, alpha_tilde, ess, low_ess, estimates: {...}, cri: {param: {symmetric, hpd}}}
Json posterior_summary_to_json(const ImportanceDraws& draws, double level);

/// {"a1": ..., "b6": ...}; omitted keys keep their defaults.
Priors priors_from_json(const Json& j);

}  // namespace apcr

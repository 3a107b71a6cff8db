#pragma once

#include <span>

#include "apcr/censoring.hpp"

namespace apcr {

/// Probability-plot regression estimate of a Weibull shape: OLS slope of
/// ln(-ln(1 - (i - 0.5)/l)) on ln t_(i). Needs two distinct positive times.
double regression_shape_estimate(std::span<const double> times);

/// Crude shape estimate: average of the per-cause regression estimates, each
/// cause subsample treated as complete. A cause with fewer than two distinct
/// times is skipped; if both are unusable the estimate is 1.
double prestimate_alpha(const CompetingRisksSample& sample);

}  // namespace apcr

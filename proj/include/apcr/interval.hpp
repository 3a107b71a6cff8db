#pragma once

#include <string>

namespace apcr {

struct IntervalEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;  ///< nominal coverage 1 - gamma
  std::string method;   ///< "percentile", "normal-bootstrap", "symmetric", "hpd"

  double length() const noexcept { return upper - lower; }
  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

/// Upper gamma/2 point of the standard normal, z_{gamma/2}.
double normal_upper_quantile(double tail_probability);

}  // namespace apcr

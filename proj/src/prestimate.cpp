#include "apcr/prestimate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "apcr/error.hpp"

namespace apcr {

double regression_shape_estimate(std::span<const double> times) {
  const std::size_t l = times.size();
  if (l < 2) throw DegenerateSampleError("regression shape estimate needs at least two times");
  std::vector<double> t(times.begin(), times.end());
  std::sort(t.begin(), t.end());
  if (!(t.front() > 0.0)) throw ParameterError("regression shape estimate needs positive times");
  if (t.front() == t.back())
    throw DegenerateSampleError("regression shape estimate: all times equal, slope undefined");

  double zbar = 0.0, ybar = 0.0;
  std::vector<double> z(l), y(l);
  for (std::size_t i = 0; i < l; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(l);
    y[i] = std::log(-std::log1p(-p));
    z[i] = std::log(t[i]);
    zbar += z[i];
    ybar += y[i];
  }
  zbar /= static_cast<double>(l);
  ybar /= static_cast<double>(l);
  double szz = 0.0, szy = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    szz += (z[i] - zbar) * (z[i] - zbar);
    szy += (z[i] - zbar) * (y[i] - ybar);
  }
  return szy / szz;
}

double prestimate_alpha(const CompetingRisksSample& sample) {
  auto estimate_for = [&](Cause c) -> std::optional<double> {
    std::vector<double> t;
    for (int i : sample.indices_of(c)) t.push_back(sample.times[i]);
    if (t.size() < 2 || *std::min_element(t.begin(), t.end()) == *std::max_element(t.begin(), t.end()))
      return std::nullopt;
    const double est = regression_shape_estimate(t);
    if (!(est > 0.0) || !std::isfinite(est)) return std::nullopt;
    return est;
  };
  const auto a1 = estimate_for(Cause::First);
  const auto a2 = estimate_for(Cause::Second);
  if (a1 && a2) return 0.5 * (*a1 + *a2);
  if (a1) return *a1;
  if (a2) return *a2;
  return 1.0;
}

}  // namespace apcr

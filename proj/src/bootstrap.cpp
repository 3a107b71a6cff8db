#include "apcr/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <boost/math/distributions/normal.hpp>

#include "apcr/error.hpp"
#include "apcr/parallel.hpp"

namespace apcr {

double normal_upper_quantile(double tail_probability) {
  if (!(tail_probability > 0.0 && tail_probability < 1.0))
    throw UsageError("normal quantile: tail probability must lie in (0, 1)");
  const boost::math::normal_distribution<double> z;
  return boost::math::quantile(boost::math::complement(z, tail_probability));
}

std::string to_string(Model model) {
  return model == Model::Restricted ? "restricted" : "unrestricted";
}

Model model_from_string(const std::string& name) {
  if (name == "restricted") return Model::Restricted;
  if (name == "unrestricted") return Model::Unrestricted;
  throw UsageError("unknown model '" + name + "' (use restricted or unrestricted)");
}

std::vector<Functional> standard_functionals(Model model) {
  std::vector<Functional> f{
      {"alpha", [](const ParameterView& p) { return p.alpha; }},
      {"lambda1", [](const ParameterView& p) { return p.lambda1; }},
      {"lambda2", [](const ParameterView& p) { return p.lambda2; }},
  };
  if (model == Model::Restricted) f.push_back({"beta", [](const ParameterView& p) { return p.beta; }});
  return f;
}

const BootstrapDraws& BootstrapResult::at(const std::string& functional) const {
  for (const auto& d : draws)
    if (d.functional == functional) return d;
  throw UsageError("no bootstrap draws for functional '" + functional + "'");
}

BootstrapResult bootstrap_mles(const ParameterView& fitted, Model model, const CensoringPlan& plan,
                               const std::vector<Functional>& functionals,
                               const BootstrapOptions& opts) {
  if (opts.B < 2) throw UsageError("bootstrap: B must be at least 2");
  if (static_cast<std::uint64_t>(opts.B) > stream_ids::kMaxResamples)
    throw UsageError("bootstrap: B exceeds the per-replication stream budget");
  if (functionals.empty()) throw UsageError("bootstrap: no functionals requested");
  if (!(fitted.alpha > 0.0) || !(fitted.lambda1 > 0.0) || !(fitted.lambda2 > 0.0))
    throw NumericError("bootstrap: fitted parameters lie on the boundary (a rate is zero)");

  const auto B = static_cast<std::size_t>(opts.B);
  std::vector<std::optional<ParameterView>> refits(B);
  parallel_for(B, opts.workers, [&](std::size_t b) {
    auto rng = seed_stream(opts.master_seed, stream_ids::bootstrap(opts.replication, b));
    try {
      const auto resample = generate_sample(plan, fitted.alpha, fitted.lambda1, fitted.lambda2, rng);
      refits[b] = model == Model::Restricted ? view(fit_restricted(resample, opts.solver).params)
                                             : view(fit_unrestricted(resample, opts.solver).params);
    } catch (const NumericError&) {
      refits[b].reset();
    }
  });

  BootstrapResult out;
  out.B = opts.B;
  out.failures = static_cast<int>(std::count(refits.begin(), refits.end(), std::nullopt));
  if (2 * out.failures > opts.B)
    throw NumericError("bootstrap: " + std::to_string(out.failures) + " of " +
                       std::to_string(opts.B) + " refits failed");
  out.warning = 10 * out.failures > opts.B;
  for (const auto& f : functionals) {
    BootstrapDraws d;
    d.functional = f.name;
    d.point_estimate = f.eval(fitted);
    d.B = opts.B;
    d.failures = out.failures;
    d.estimates.reserve(B);
    for (const auto& r : refits)
      if (r) d.estimates.push_back(f.eval(*r));
    out.draws.push_back(std::move(d));
  }
  return out;
}

BootstrapResult bootstrap_mles(const RestrictedFit& fit, const CensoringPlan& plan,
                               const std::vector<Functional>& functionals,
                               const BootstrapOptions& opts) {
  return bootstrap_mles(view(fit.params), Model::Restricted, plan, functionals, opts);
}

BootstrapResult bootstrap_mles(const UnrestrictedFit& fit, const CensoringPlan& plan,
                               const std::vector<Functional>& functionals,
                               const BootstrapOptions& opts) {
  return bootstrap_mles(view(fit.params), Model::Unrestricted, plan, functionals, opts);
}

namespace {

void check_interval_inputs(const BootstrapDraws& draws, double gamma) {
  if (draws.estimates.size() < 2)
    throw UsageError("bootstrap interval: at least two successful estimates required");
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("bootstrap interval: gamma must lie in (0, 1)");
}

// ceil() that ignores representation noise such as 1000 * 0.025 = 25.000000000000004.
std::size_t ceil_index(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

}  // namespace

IntervalEstimate percentile_interval(const BootstrapDraws& draws, double gamma) {
  check_interval_inputs(draws, gamma);
  auto sorted = draws.estimates;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  auto at = [&](double q) {
    const std::size_t k = std::clamp<std::size_t>(ceil_index(static_cast<double>(n) * q), 1, n);
    return sorted[k - 1];
  };
  return {at(gamma / 2.0), at(1.0 - gamma / 2.0), 1.0 - gamma, "percentile"};
}

IntervalEstimate normal_bootstrap_interval(const BootstrapDraws& draws, double gamma) {
  check_interval_inputs(draws, gamma);
  const auto& t = draws.estimates;
  const double n = static_cast<double>(t.size());
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : t) ss += (v - mean) * (v - mean);
  const double variance = ss / (n - 1.0);
  const double bias = mean - draws.point_estimate;
  const double centre = draws.point_estimate - bias;
  const double half = normal_upper_quantile(gamma / 2.0) * std::sqrt(variance);
  return {centre - half, centre + half, 1.0 - gamma, "normal-bootstrap"};
}

}  // namespace apcr

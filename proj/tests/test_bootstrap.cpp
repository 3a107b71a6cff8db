#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "apcr/bootstrap.hpp"
#include "apcr/error.hpp"
#include "apcr/json_io.hpp"
#include "support.hpp"

using namespace apcr;
using namespace apcr::testing;

namespace {

BootstrapDraws make_draws(std::vector<double> est, double point) {
  BootstrapDraws d;
  d.functional = "tau";
  d.B = static_cast<int>(est.size());
  d.estimates = std::move(est);
  d.point_estimate = point;
  return d;
}

std::vector<double> iota_values(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = i + 1;
  return v;
}

const double z975 = 1.959963984540054;

}  // namespace

TEST_CASE("percentile interval on the identity sequence") {
  auto d = make_draws(iota_values(1000), 500);
  auto in = percentile_interval(d, 0.05);
  CHECK(in.lower == 25);
  CHECK(in.upper == 975);
  CHECK(in.method == "percentile");
  CHECK(in.level == doctest::Approx(0.95));
  in = percentile_interval(d, 0.5);
  CHECK(in.lower == 250);
  CHECK(in.upper == 750);
  std::reverse(d.estimates.begin(), d.estimates.end());
  CHECK(percentile_interval(d, 0.05).lower == 25);
}

TEST_CASE("degenerate bootstrap distributions give point intervals") {
  const auto d = make_draws(std::vector<double>(50, 2.5), 2.5);
  const auto p = percentile_interval(d, 0.05);
  CHECK(p.lower == 2.5);
  CHECK(p.upper == 2.5);
  const auto nb = normal_bootstrap_interval(d, 0.05);
  CHECK(nb.lower == doctest::Approx(2.5));
  CHECK(nb.upper == doctest::Approx(2.5));
}

TEST_CASE("normal bootstrap interval by hand") {
  const auto d = make_draws({0.9, 1.1}, 1.0);
  const auto in = normal_bootstrap_interval(d, 0.05);
  CHECK(in.lower == doctest::Approx(1 - z975 * std::sqrt(0.02)).epsilon(1e-12));
  CHECK(in.upper == doctest::Approx(1 + z975 * std::sqrt(0.02)).epsilon(1e-12));
  CHECK(in.lower == doctest::Approx(0.72282).epsilon(1e-5));
  CHECK(in.upper == doctest::Approx(1.27718).epsilon(1e-5));
  CHECK(in.method == "normal-bootstrap");

  const auto shifted = normal_bootstrap_interval(make_draws({1.1, 1.3}, 1.0), 0.05);
  CHECK(shifted.lower == doctest::Approx(in.lower - 0.2));
  CHECK(shifted.upper == doctest::Approx(in.upper - 0.2));
  CHECK(normal_upper_quantile(0.025) == doctest::Approx(z975).epsilon(1e-14));
}

TEST_CASE("interval properties on random estimate vectors") {
  auto rng = seed_stream(71, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> est(2 + sample_index(rng, 300));
    for (auto& x : est) x = sample_standard_normal(rng) * 0.3 + 1.0;
    const double tau = 1.0 + 0.1 * sample_standard_normal(rng);
    const auto d = make_draws(est, tau);
    for (double g : {0.01, 0.05, 0.1, 0.5}) {
      const auto p = percentile_interval(d, g);
      CHECK(std::find(est.begin(), est.end(), p.lower) != est.end());
      CHECK(std::find(est.begin(), est.end(), p.upper) != est.end());
      CHECK(p.lower <= p.upper);

      const auto nb = normal_bootstrap_interval(d, g);
      const double bias = mean(est) - tau;
      CHECK((nb.lower + nb.upper) / 2 == doctest::Approx(tau - bias));
      CHECK(nb.length() == doctest::Approx(2 * normal_upper_quantile(g / 2) * std::sqrt(variance(est))));

      // affine map with positive slope
      std::vector<double> mapped(est);
      for (auto& x : mapped) x = 3.0 * x - 2.0;
      const auto dm = make_draws(mapped, 3.0 * tau - 2.0);
      const auto pm = percentile_interval(dm, g);
      CHECK(pm.lower == doctest::Approx(3.0 * p.lower - 2.0));
      CHECK(pm.upper == doctest::Approx(3.0 * p.upper - 2.0));
      const auto nm = normal_bootstrap_interval(dm, g);
      CHECK(nm.lower == doctest::Approx(3.0 * nb.lower - 2.0));
      CHECK(nm.upper == doctest::Approx(3.0 * nb.upper - 2.0));
    }
  }
}

TEST_CASE("interval preconditions") {
  CHECK_THROWS_AS(percentile_interval(make_draws({1.0}, 1.0), 0.05), UsageError);
  CHECK_THROWS_AS(normal_bootstrap_interval(make_draws({1.0}, 1.0), 0.05), UsageError);
  CHECK_THROWS_AS(percentile_interval(make_draws({1.0, 2.0}, 1.0), 0.0), UsageError);
}

TEST_CASE("bootstrap_mles: precondition, determinism and worker independence") {
  const auto s = simulate(50, 40, parse_scheme("right:10", 40), 0.25, 1.5, 1.2, 1.0, 3, 0);
  const auto fit = fit_restricted(s);
  const auto fs = standard_functionals(Model::Restricted);
  BootstrapOptions opts;
  opts.master_seed = 17;
  opts.B = 0;
  CHECK_THROWS_AS(bootstrap_mles(fit, s.plan, fs, opts), UsageError);
  opts.B = 1;
  CHECK_THROWS_AS(bootstrap_mles(fit, s.plan, fs, opts), UsageError);

  opts.B = 120;
  const auto a = bootstrap_mles(fit, s.plan, fs, opts);
  const auto b = bootstrap_mles(fit, s.plan, fs, opts);
  opts.workers = 3;
  const auto c = bootstrap_mles(fit, s.plan, fs, opts);
  REQUIRE(a.draws.size() == 4);
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    CHECK(a.draws[i].estimates == b.draws[i].estimates);
    CHECK(a.draws[i].estimates == c.draws[i].estimates);
    CHECK(a.draws[i].estimates.size() == static_cast<std::size_t>(a.B - a.failures));
  }
  CHECK(a.at("alpha").point_estimate == fit.params.alpha);
  CHECK(a.at("lambda2").point_estimate == doctest::Approx(fit.params.lambda2()));
  CHECK_THROWS_AS(a.at("gamma"), UsageError);

  opts.replication = 1;
  const auto other = bootstrap_mles(fit, s.plan, fs, opts);
  CHECK(other.draws[0].estimates != a.draws[0].estimates);
}

TEST_CASE("bootstrap mean of alpha-hat sits near the fitted value") {
  const int n = 200;
  const auto s = simulate(n, n, std::vector<int>(n, 0), kInfinity, 1.5, 1.2, 1.0, 5, 0);
  const auto fit = fit_unrestricted(s);
  BootstrapOptions opts;
  opts.B = 400;
  opts.master_seed = 5;
  const auto res = bootstrap_mles(fit, s.plan, standard_functionals(Model::Unrestricted), opts);
  const auto& est = res.at("alpha").estimates;
  // alpha-hat is biased upward by roughly (1 + 1.4/n); allow for it on top of 3 SE.
  CHECK(std::abs(mean(est) - fit.params.alpha) <
        3 * std::sqrt(variance(est) / est.size()) + 1.5 * fit.params.alpha / n);
}

TEST_CASE("boundary fits cannot seed a bootstrap") {
  std::vector<double> t{0.1, 0.2, 0.35, 0.5};
  const auto s = make_sample(t, {1, 1, 1, 1}, {0, 0, 0, 2});
  BootstrapOptions opts;
  opts.B = 10;
  CHECK_THROWS_AS(bootstrap_mles(fit_unrestricted(s), s.plan,
                                 standard_functionals(Model::Unrestricted), opts),
                  NumericError);
}

TEST_CASE("model names and functionals") {
  CHECK(model_from_string("restricted") == Model::Restricted);
  CHECK(to_string(Model::Unrestricted) == "unrestricted");
  CHECK_THROWS_AS(model_from_string("other"), UsageError);
  CHECK(standard_functionals(Model::Restricted).size() == 4);
  CHECK(standard_functionals(Model::Unrestricted).size() == 3);
}

TEST_CASE("interval JSON layout") {
  auto d = make_draws(iota_values(100), 50);
  d.failures = 3;
  const auto j = interval_to_json(percentile_interval(d, 0.05), d);
  for (const char* k : {"functional", "method", "level", "lower", "upper", "B", "failures"})
    CHECK(j.contains(k));
  CHECK(j.at("method") == "percentile");
  CHECK(j.at("failures") == 3);
}

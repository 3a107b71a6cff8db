// Cross-module properties of the study harness.
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "apcr/study.hpp"
#include "support.hpp"

using namespace apcr;
using namespace apcr::testing;

namespace {

ScenarioSpec spec_with(std::uint64_t seed, const char* scheme, double T) {
  ScenarioSpec s;
  s.plan = {50, 40, parse_scheme(scheme, 40), T};
  s.label = scheme;
  s.replications = 10;
  s.B = 50;
  s.M = 300;
  s.seed = seed;
  return s;
}

bool same(const MetricsRow& a, const MetricsRow& b) {
  if (a.scenario != b.scenario || a.model != b.model || a.succeeded != b.succeeded) return false;
  for (std::size_t i = 0; i < a.parameters.size(); ++i) {
    const auto &p = a.parameters[i], &q = b.parameters[i];
    const double x[] = {p.mle_bias, p.mle_mse, p.cpb, p.alb, p.cpp, p.alp, p.be_bias, p.be_mse, p.cps, p.als, p.cph, p.alh};
    const double y[] = {q.mle_bias, q.mle_mse, q.cpb, q.alb, q.cpp, q.alp, q.be_bias, q.be_mse, q.cps, q.als, q.cph, q.alh};
    if (!std::equal(std::begin(x), std::end(x), std::begin(y))) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("rows are bit-identical regardless of worker count") {
  const auto spec = spec_with(5, "osp:10", 0.25);
  const auto a = run_scenario(spec, 1);
  const auto b = run_scenario(spec, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same(a[i], b[i]));
  CHECK(render_table(a, TableFormat::Csv) == render_table(b, TableFormat::Csv));
}

TEST_CASE("permuting the config permutes the rows") {
  const std::vector<ScenarioSpec> cfg{spec_with(1, "right:10", 0.25), spec_with(2, "fsp:10", 0.75),
                                      spec_with(3, "osp:10", kInfinity)};
  const auto rows = run_study(cfg, 2);
  const auto rev = run_study({cfg[2], cfg[0], cfg[1]}, 2);
  REQUIRE(rows.size() == 6);
  CHECK(same(rows[0], rev[2]));
  CHECK(same(rows[1], rev[3]));
  CHECK(same(rows[4], rev[0]));
  CHECK(same(rows[5], rev[1]));
}

TEST_CASE("MSE dominates squared bias and coverages are proportions") {
  for (const auto& row : run_scenario(spec_with(9, "fsp:10", 0.75), 2))
    for (const auto& p : row.parameters) {
      CHECK(p.mle_mse >= p.mle_bias * p.mle_bias - 1e-15);
      CHECK(p.be_mse >= p.be_bias * p.be_bias - 1e-15);
      for (double c : {p.cpb, p.cpp, p.cps, p.cph}) CHECK((c >= 0.0 && c <= 1.0));
      for (double l : {p.alb, p.alp, p.als, p.alh}) CHECK(l >= 0.0);
    }
}

TEST_CASE("nominal level orders average lengths") {
  auto lo = spec_with(12, "right:10", 0.25);
  auto hi = lo;
  lo.level = 0.90;
  hi.level = 0.95;
  const auto a = run_scenario(lo, 2), b = run_scenario(hi, 2);
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t i = 0; i < a[r].parameters.size(); ++i) {
      const auto &p = a[r].parameters[i], &q = b[r].parameters[i];
      CAPTURE(p.name);
      CHECK(q.alb >= p.alb);
      CHECK(q.alp >= p.alp);
      CHECK(q.als >= p.als);
      CHECK(q.alh >= p.alh);
    }
}

TEST_CASE("restricted and unrestricted MLEs coincide on replications with m1 > m2") {
  const auto spec = spec_with(21, "osp:10", 0.25);
  int seen = 0;
  for (int rep = 0; rep < 30; ++rep) {
    auto rng = seed_stream(spec.seed, stream_ids::data(rep));
    const auto s = generate_sample(spec.plan, spec.alpha, spec.lambda1, spec.lambda2, rng);
    if (s.m1() <= s.m2()) continue;
    const auto r = run_replication(spec, Model::Restricted, rep);
    const auto u = run_replication(spec, Model::Unrestricted, rep);
    if (!r.ok || !u.ok) continue;
    ++seen;
    for (const char* name : {"alpha", "lambda1", "lambda2"})
      CHECK(r.analysis.at(name).mle == doctest::Approx(u.analysis.at(name).mle).epsilon(1e-8));
  }
  CHECK(seen > 10);
}

TEST_CASE("study paths agree with direct library calls") {
  const auto spec = spec_with(33, "right:10", 0.25);
  const auto rep = run_replication(spec, Model::Unrestricted, 4);
  REQUIRE(rep.ok);
  auto rng = seed_stream(spec.seed, stream_ids::data(4));
  const auto s = generate_sample(spec.plan, spec.alpha, spec.lambda1, spec.lambda2, rng);
  AnalysisOptions opts;
  opts.B = spec.B;
  opts.M = spec.M;
  opts.seed = spec.seed;
  opts.replication = 4;
  const auto direct = analyze_sample(s, Model::Unrestricted, opts);
  CHECK(analysis_to_json(direct) == analysis_to_json(rep.analysis));
}

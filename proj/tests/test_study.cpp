#include <doctest.h>

#include <cmath>
#include <sstream>

#include "apcr/error.hpp"
#include "apcr/study.hpp"
#include "support.hpp"

using namespace apcr;
using namespace apcr::testing;

namespace {

ScenarioSpec small_spec(std::uint64_t seed = 3) {
  ScenarioSpec s;
  s.label = "small";
  s.plan = {50, 40, parse_scheme("right:10", 40), 0.25};
  s.replications = 12;
  s.B = 60;
  s.M = 300;
  s.seed = seed;
  return s;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cell += '"', ++i;
        else if (c == '"') quoted = false;
        else cell += c;
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("single-sample analysis fills every column") {
  const auto s = simulate(50, 40, parse_scheme("osp:10", 40), 0.25, 1.5, 1.2, 1.0, 1, 0);
  AnalysisOptions opts;
  opts.B = 100;
  opts.M = 500;
  const auto a = analyze_sample(s, Model::Restricted, opts);
  REQUIRE(a.parameters.size() == 4);
  for (const auto& p : a.parameters) {
    CHECK(std::isfinite(p.mle));
    CHECK(std::isfinite(p.bayes));
    CHECK(p.percentile.lower <= p.percentile.upper);
    CHECK(p.hpd.lower <= p.hpd.upper);
    CHECK(p.symmetric.level == doctest::Approx(0.95));
  }
  CHECK(a.at("lambda2").mle == doctest::Approx(a.at("beta").mle * a.at("lambda1").mle));
  const auto j = analysis_to_json(a);
  for (const char* k : {"MLE", "BB", "PB", "BE", "SCRI", "HPD"}) CHECK(j.at("parameters").at("alpha").contains(k));
}

TEST_CASE("one replication gives 0/1 coverages") {
  auto spec = small_spec();
  spec.replications = 1;
  for (const auto& row : run_scenario(spec)) {
    CHECK(row.requested == 1);
    for (const auto& p : row.parameters)
      for (double c : {p.cpb, p.cpp, p.cps, p.cph}) CHECK((c == 0.0 || c == 1.0));
  }
}

TEST_CASE("large uncensored samples recover the truth") {
  ScenarioSpec spec;
  spec.label = "recovery";
  spec.plan = {500, 500, std::vector<int>(500, 0), kInfinity};
  spec.replications = 20;
  spec.B = 20;
  spec.M = 200;
  spec.models = {Model::Unrestricted};
  const auto rows = run_scenario(spec);
  for (const auto& p : rows.at(0).parameters) {
    CAPTURE(p.name);
    CHECK(std::abs(p.mle_bias) < 0.05);
  }
}

TEST_CASE("study preconditions") {
  CHECK_THROWS_AS(run_study({}), UsageError);
  auto bad = small_spec();
  bad.replications = 0;
  CHECK_THROWS_AS(run_scenario(bad), UsageError);
  bad = small_spec();
  bad.level = 1.0;
  CHECK_THROWS_AS(run_scenario(bad), UsageError);
  CHECK_THROWS_AS(render_table({}, TableFormat::Csv), UsageError);
  CHECK_THROWS_AS(table_format_from_string("html"), UsageError);
}

TEST_CASE("frequent failures flag the row") {
  auto spec = small_spec();
  spec.lambda2 = 1e-4;  // cause 2 is almost never observed, so fits sit on the boundary
  spec.plan = {10, 10, std::vector<int>(10, 0), kInfinity};
  spec.replications = 10;
  for (const auto& row : run_scenario(spec)) {
    CHECK(row.failed > 0);
    CHECK(row.flagged);
    CHECK(row.succeeded + row.failed == row.requested);
    CHECK_FALSE(row.failure_samples.empty());
  }
}

TEST_CASE("table layout: 12 metric columns in the published order") {
  const auto rows = run_scenario(small_spec());
  const auto csv = parse_csv(render_table(rows, TableFormat::Csv));
  REQUIRE(csv.size() == 1 + 4 + 3);
  const std::vector<std::string> metrics{"mle_bias", "mle_mse", "CPB", "ALB", "CPP", "ALP",
                                         "be_bias",  "be_mse",  "CPS", "ALS", "CPH", "ALH"};
  const auto& header = csv[0];
  REQUIRE(header.size() == 6 + 12);
  CHECK(std::vector<std::string>(header.begin() + 6, header.end()) == metrics);
  for (std::size_t r = 1; r < csv.size(); ++r) {
    CHECK(csv[r].size() == header.size());
    CHECK(csv[r][0] == "small");
  }
  CHECK(csv[1][2] == "alpha");
  CHECK(std::stod(csv[1][6]) == doctest::Approx(rows[0].parameters[0].mle_bias).epsilon(0.01).scale(1));

  const auto md = render_table(rows, TableFormat::Markdown);
  CHECK(md.find("| Bias | MSE | CPB | ALB | CPP | ALP | Bias | MSE | CPS | ALS | CPH | ALH |") !=
        std::string::npos);
  TablePrecision wide;
  wide.coverage = 5;
  CHECK(render_table(rows, TableFormat::Markdown, wide) != md);
}

TEST_CASE("labels with commas survive CSV quoting") {
  auto spec = small_spec();
  spec.label = "R=1,0,\"x\"";
  spec.replications = 2;
  spec.models = {Model::Unrestricted};
  const auto csv = parse_csv(render_table(run_scenario(spec), TableFormat::Csv));
  CHECK(csv[1][0] == spec.label);
}

TEST_CASE("study config parsing") {
  const auto specs = scenarios_from_json(Json::parse(R"([
    {"n": 50, "m": 40, "R": "osp:10", "T": "inf", "alpha": 0.5, "lambda1": 1.4, "lambda2": 1.0,
     "reps": 3, "B": 50, "M": 100, "level": 0.9, "seed": 8, "models": ["unrestricted"]},
    {"n": 6, "m": 3, "R": [1, 1, 1], "T": 0.5, "alpha": 1.5, "lambda1": 1.2, "lambda2": 1.0,
     "label": "tiny", "priors": {"a1": 2}}
  ])"));
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].plan.removals[19] == 10);
  CHECK(std::isinf(specs[0].plan.ideal_time));
  CHECK(specs[0].models == std::vector<Model>{Model::Unrestricted});
  CHECK(specs[0].level == 0.9);
  CHECK(specs[0].seed == 8);
  CHECK(specs[1].label == "tiny");
  CHECK(specs[1].priors.a1 == 2.0);
  CHECK(specs[1].replications == 500);
  CHECK(specs[1].models.size() == 2);

  CHECK_THROWS_AS(scenarios_from_json(Json::parse(R"({"n": 5})")), SchemaError);
  CHECK_THROWS_AS(scenarios_from_json(Json::parse(R"([{"n": 5, "m": 4}])")), SchemaError);
  CHECK_THROWS_AS(scenarios_from_json(Json::parse(
                      R"([{"n":5,"m":4,"R":"right:1","alpha":1,"lambda1":1,"lambda2":1,"bogus":1}])")),
                  SchemaError);
  CHECK_THROWS_AS(scenarios_from_json(Json::parse(
                      R"([{"n":5,"m":4,"R":[0,0,0,0],"alpha":1,"lambda1":1,"lambda2":1}])")),
                  ValidationError);
  CHECK_THROWS_AS(load_study_config("/nonexistent/grid.json"), DataError);
}

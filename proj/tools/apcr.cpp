// apcr: command-line front end. Every subcommand parses flags, calls the
// library and serializes the result; no estimation happens here.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apcr/bayes.hpp"
#include "apcr/bootstrap.hpp"
#include "apcr/censoring.hpp"
#include "apcr/error.hpp"
#include "apcr/json_io.hpp"
#include "apcr/likelihood.hpp"
#include "apcr/study.hpp"

namespace fs = std::filesystem;
using namespace apcr;

namespace {

enum ExitCode { kOk = 0, kUnexpected = 1, kUsage = 2, kData = 3, kNumeric = 4 };

struct CliConfig {
  // global
  std::uint64_t seed = 1;
  std::string out;
  std::string format;

  // data and plan
  std::string data;
  std::string plan_path;
  std::optional<int> n, m;
  std::string scheme;
  std::string T = "inf";

  // simulation truth
  double alpha = 1.5, l1 = 1.0, l2 = 1.0;

  // models
  bool restricted = false, unrestricted = false;

  // numerics
  double eps = 1e-8;
  int max_iter = 500;
  std::optional<double> alpha0;
  int B = 1000;
  int M = 2000;
  std::optional<double> level;
  std::optional<int> reps;
  unsigned workers = 1;
  std::string priors_path;
  std::string proposal = "regression";

  // fit extras
  bool lrt = false;
  std::string profile_out;
  int profile_points = 200;
  std::optional<double> profile_lower, profile_upper;

  std::string config;
};

double parse_time(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "infinity") return kInfinity;
  try {
    std::size_t used = 0;
    const double t = std::stod(text, &used);
    if (used == text.size()) return t;
  } catch (const std::exception&) {
  }
  throw UsageError("--T must be a number or 'inf', got '" + text + "'");
}

std::vector<Model> selected_models(const CliConfig& c) {
  if (c.restricted) return {Model::Restricted};
  if (c.unrestricted) return {Model::Unrestricted};
  return {Model::Restricted, Model::Unrestricted};
}

SolverOptions solver_options(const CliConfig& c) {
  SolverOptions s;
  s.alpha0 = c.alpha0;
  s.eps = c.eps;
  s.max_iter = c.max_iter;
  return s;
}

CensoringPlan plan_from_flags(const CliConfig& c) {
  if (!c.n || !c.m) throw UsageError("--scheme needs --n and --m");
  return make_plan(*c.n, *c.m, parse_scheme(c.scheme, *c.m), parse_time(c.T));
}

CompetingRisksSample load_sample(const CliConfig& c) {
  if (!c.scheme.empty()) return read_sample(c.data, plan_from_flags(c));
  if (!c.plan_path.empty()) return read_sample(c.data, read_plan(c.plan_path));
  if (const auto sidecar = plan_sidecar_path(c.data); fs::exists(sidecar))
    return read_sample(c.data, read_plan(sidecar));
  return read_sample(c.data);
}

Priors load_priors(const CliConfig& c) {
  if (c.priors_path.empty()) return {};
  std::ifstream in(c.priors_path);
  if (!in) throw DataError("cannot open priors file " + c.priors_path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw SchemaError("priors file " + c.priors_path + ": " + e.what());
  }
  return priors_from_json(j);
}

ShapeProposal shape_proposal(const CliConfig& c) {
  if (c.proposal == "regression") return ShapeProposal::RegressionCentred;
  if (c.proposal == "conjugate") return ShapeProposal::Conjugate;
  throw UsageError("--proposal must be 'regression' or 'conjugate'");
}

void require_json_format(const CliConfig& c) {
  if (!c.format.empty() && c.format != "json")
    throw UsageError("this subcommand only writes json, not '" + c.format + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

void emit(const CliConfig& c, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty())
    std::cout << text;
  else
    write_text(c.out, text);
}

int cmd_simulate(const CliConfig& c) {
  const auto plan = plan_from_flags(c);
  auto rng = seed_stream(c.seed, stream_ids::data(0));
  const auto sample = generate_sample(plan, c.alpha, c.l1, c.l2, rng);
  const fs::path path = c.out.empty() ? fs::path("sample.csv") : fs::path(c.out);
  write_sample(sample, path);
  write_plan(plan, plan_sidecar_path(path));
  std::cout << "wrote " << path.string() << " and " << plan_sidecar_path(path).string() << "\n"
            << "m1=" << sample.m1() << " m2=" << sample.m2() << " J=" << sample.change_index
            << "\n";
  return kOk;
}

int cmd_fit(const CliConfig& c) {
  require_json_format(c);
  const auto sample = load_sample(c);
  const auto solver = solver_options(c);
  Json j = Json::object();
  double alpha_hat = 0.0;
  for (Model model : selected_models(c)) {
    if (model == Model::Restricted) {
      const auto fit = fit_restricted(sample, solver);
      j["restricted"] = fit_to_json(fit);
      alpha_hat = fit.params.alpha;
    } else {
      const auto fit = fit_unrestricted(sample, solver);
      j["unrestricted"] = fit_to_json(fit);
      alpha_hat = fit.params.alpha;
    }
  }
  if (c.lrt) {
    const double level = c.level.value_or(0.05);
    const auto lrt = lrt_equal_scales(sample, level, solver);
    j["lrt"] = lrt_to_json(lrt);
    std::cerr << "LRT lambda1 = lambda2: Lambda=" << lrt.statistic
              << " critical=" << lrt.critical << " decision="
              << (lrt.reject ? "reject" : "do not reject") << "\n";
  }
  if (!c.profile_out.empty()) {
    const SufficientStats stats(sample);
    const double lo = c.profile_lower.value_or(alpha_hat / 5.0);
    const double hi = c.profile_upper.value_or(alpha_hat * 5.0);
    std::string csv = "alpha,p1\n";
    std::ostringstream os;
    os.precision(17);
    for (const auto& pt : profile_series(stats, lo, hi, c.profile_points))
      os << pt.alpha << ',' << pt.p1 << '\n';
    write_text(c.profile_out, csv + os.str());
  }
  emit(c, j);
  return kOk;
}

BootstrapOptions bootstrap_options(const CliConfig& c) {
  BootstrapOptions b;
  b.B = c.B;
  b.master_seed = c.seed;
  b.workers = c.workers;
  b.solver = solver_options(c);
  return b;
}

int cmd_bootstrap(const CliConfig& c) {
  require_json_format(c);
  if (c.B < 2) throw UsageError("--B must be at least 2");
  const auto sample = load_sample(c);
  const double gamma = 1.0 - c.level.value_or(0.95);
  Json j = Json::object();
  for (Model model : selected_models(c)) {
    const auto functionals = standard_functionals(model);
    ParameterView mle;
    BootstrapResult res;
    if (model == Model::Restricted) {
      const auto fit = fit_restricted(sample, solver_options(c));
      mle = view(fit.params);
      res = bootstrap_mles(fit, sample.plan, functionals, bootstrap_options(c));
    } else {
      const auto fit = fit_unrestricted(sample, solver_options(c));
      mle = view(fit.params);
      res = bootstrap_mles(fit, sample.plan, functionals, bootstrap_options(c));
    }
    if (res.warning)
      std::cerr << "warning: " << res.failures << " of " << res.B << " bootstrap refits failed ("
                << to_string(model) << ")\n";
    Json params = Json::object();
    for (std::size_t i = 0; i < functionals.size(); ++i) {
      const auto& d = res.draws[i];
      params[functionals[i].name] =
          Json{{"MLE", functionals[i].eval(mle)},
               {"BB", interval_to_json(normal_bootstrap_interval(d, gamma), d)},
               {"PB", interval_to_json(percentile_interval(d, gamma), d)}};
    }
    j[to_string(model)] = Json{{"B", res.B}, {"failures", res.failures},
                               {"warning", res.warning}, {"parameters", params}};
  }
  emit(c, j);
  return kOk;
}

int cmd_bayes(const CliConfig& c) {
  require_json_format(c);
  if (c.M < 2) throw UsageError("--M must be at least 2");
  const auto sample = load_sample(c);
  const auto priors = load_priors(c);
  const double level = c.level.value_or(0.95);
  Json j = Json::object();
  for (Model model : selected_models(c)) {
    auto rng = seed_stream(c.seed, stream_ids::importance(0));
    const auto draws =
        model == Model::Restricted
            ? draw_importance_restricted(sample, priors, c.M, rng, shape_proposal(c))
            : draw_importance_unrestricted(sample, priors, c.M, rng, shape_proposal(c));
    if (draws.low_ess)
      std::cerr << "warning: effective sample size " << draws.ess << " below "
                << kLowEssThreshold << " (" << to_string(model) << ")\n";
    j[to_string(model)] = posterior_summary_to_json(draws, level);
  }
  emit(c, j);
  return kOk;
}

int cmd_analyze(const CliConfig& c) {
  require_json_format(c);
  if (c.B < 2) throw UsageError("--B must be at least 2");
  if (c.M < 2) throw UsageError("--M must be at least 2");
  const auto sample = load_sample(c);
  AnalysisOptions opts;
  opts.B = c.B;
  opts.M = c.M;
  opts.level = c.level.value_or(0.95);
  opts.seed = c.seed;
  opts.workers = c.workers;
  opts.priors = load_priors(c);
  opts.solver = solver_options(c);
  opts.proposal = shape_proposal(c);
  Json j = Json::object();
  for (Model model : selected_models(c)) {
    const auto a = analyze_sample(sample, model, opts);
    if (a.bootstrap_warning)
      std::cerr << "warning: " << a.bootstrap_failures << " bootstrap refits failed ("
                << to_string(model) << ")\n";
    if (a.low_ess)
      std::cerr << "warning: effective sample size " << a.ess << " below " << kLowEssThreshold
                << " (" << to_string(model) << ")\n";
    j[to_string(model)] = analysis_to_json(a);
  }
  emit(c, j);
  return kOk;
}

int cmd_study(const CliConfig& c) {
  const TableFormat stdout_format =
      table_format_from_string(c.format.empty() || c.format == "json" ? "markdown" : c.format);
  if (c.format == "json") throw UsageError("study writes csv or markdown tables, not json");
  auto config = load_study_config(c.config);
  if (c.reps) {
    for (auto& s : config) s.replications = *c.reps;
  }
  const auto rows = run_study(config, c.workers);
  const std::string prefix = c.out.empty() ? "study" : c.out;
  write_text(prefix + ".csv", render_table(rows, TableFormat::Csv));
  write_text(prefix + ".md", render_table(rows, TableFormat::Markdown));
  for (const auto& r : rows) {
    if (r.flagged)
      std::cerr << "flagged: " << r.scenario << " (" << to_string(r.model) << "): " << r.failed
                << " of " << r.requested << " replications failed\n";
    for (const auto& msg : r.failure_samples) std::cerr << "  failure: " << msg << "\n";
  }
  std::cout << render_table(rows, stdout_format);
  return kOk;
}

void add_data_options(CLI::App* sub, CliConfig& c) {
  sub->add_option("--data,data", c.data, "Sample CSV (index,time,cause,removed)")->required();
  sub->add_option("--plan", c.plan_path, "Plan JSON (default: <data>.plan.json if present)");
  sub->add_option("--n", c.n, "Number of units on test");
  sub->add_option("--m", c.m, "Number of observed failures");
  sub->add_option("--scheme", c.scheme, "right:k | fsp:k | osp:k | comma list");
  sub->add_option("--T", c.T, "Ideal test duration (number or inf)");
}

void add_model_flags(CLI::App* sub, CliConfig& c) {
  auto* r = sub->add_flag("--restricted", c.restricted, "Order-restricted model only");
  auto* u = sub->add_flag("--unrestricted", c.unrestricted, "Unrestricted model only");
  r->excludes(u);
}

void add_solver_options(CLI::App* sub, CliConfig& c) {
  sub->add_option("--eps", c.eps, "Fixed-point tolerance");
  sub->add_option("--max-iter", c.max_iter, "Fixed-point iteration cap");
  sub->add_option("--alpha0", c.alpha0, "Starting shape (default: regression prestimate)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weibull competing risks under adaptive progressive Type-II censoring"};
  app.require_subcommand(1);
  app.fallthrough();
  CliConfig c;
  app.add_option("--seed", c.seed, "Master RNG seed");
  app.add_option("--out", c.out, "Output path (study: file prefix)");
  app.add_option("--format", c.format, "json | csv | markdown")
      ->check(CLI::IsMember({"json", "csv", "markdown"}));

  auto* sim = app.add_subcommand("simulate", "Generate a censored competing-risks sample");
  sim->add_option("--n", c.n)->required();
  sim->add_option("--m", c.m)->required();
  sim->add_option("--scheme", c.scheme)->required();
  sim->add_option("--T", c.T);
  sim->add_option("--alpha", c.alpha)->required();
  sim->add_option("--l1", c.l1)->required();
  sim->add_option("--l2", c.l2)->required();

  auto* fit = app.add_subcommand("fit", "Maximum likelihood fit");
  add_data_options(fit, c);
  add_model_flags(fit, c);
  add_solver_options(fit, c);
  fit->add_flag("--lrt", c.lrt, "Test lambda1 = lambda2");
  fit->add_option("--level", c.level, "Significance level of the test (default 0.05)");
  fit->add_option("--profile-out", c.profile_out, "Write (alpha, p1) series as CSV");
  fit->add_option("--profile-points", c.profile_points);
  fit->add_option("--profile-lower", c.profile_lower);
  fit->add_option("--profile-upper", c.profile_upper);

  auto* lrt = app.add_subcommand("lrt", "Alias of fit --lrt");
  add_data_options(lrt, c);
  add_model_flags(lrt, c);
  add_solver_options(lrt, c);
  lrt->add_option("--level", c.level, "Significance level (default 0.05)");

  auto* boot = app.add_subcommand("bootstrap", "Parametric bootstrap intervals");
  add_data_options(boot, c);
  add_model_flags(boot, c);
  add_solver_options(boot, c);
  boot->add_option("--B", c.B, "Bootstrap resamples");
  boot->add_option("--level", c.level, "Confidence level 1 - gamma (default 0.95)");
  boot->add_option("--workers", c.workers, "Threads for refits (0: all cores)");

  auto* bayes = app.add_subcommand("bayes", "Importance-sampling Bayes estimates and CRIs");
  add_data_options(bayes, c);
  add_model_flags(bayes, c);
  bayes->add_option("--M", c.M, "Importance draws");
  bayes->add_option("--level", c.level, "Credible level 1 - gamma (default 0.95)");
  bayes->add_option("--priors", c.priors_path, "JSON object of hyperparameters a1..b6");
  bayes->add_option("--proposal", c.proposal, "regression | conjugate");

  auto* analyze = app.add_subcommand("analyze", "MLE, BB, PB, BE, SCRI and HPD in one table");
  add_data_options(analyze, c);
  add_model_flags(analyze, c);
  add_solver_options(analyze, c);
  analyze->add_option("--B", c.B);
  analyze->add_option("--M", c.M);
  analyze->add_option("--level", c.level, "Nominal level 1 - gamma (default 0.95)");
  analyze->add_option("--workers", c.workers);
  analyze->add_option("--priors", c.priors_path);
  analyze->add_option("--proposal", c.proposal);

  auto* study = app.add_subcommand("study", "Monte Carlo study over a scenario config");
  study->add_option("--config,config", c.config, "JSON array of scenarios")->required();
  study->add_option("--workers", c.workers, "Replication threads (0: all cores)");
  study->add_option("--reps", c.reps, "Override every scenario's replication count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(c);
    if (fit->parsed()) return cmd_fit(c);
    if (lrt->parsed()) {
      c.lrt = true;
      return cmd_fit(c);
    }
    if (boot->parsed()) return cmd_bootstrap(c);
    if (bayes->parsed()) return cmd_bayes(c);
    if (analyze->parsed()) return cmd_analyze(c);
    if (study->parsed()) return cmd_study(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}

#include "apcr/study.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "apcr/error.hpp"
#include "apcr/parallel.hpp"

namespace apcr {

namespace {

constexpr std::size_t kKeptFailureMessages = 5;

template <class Fit>
SampleAnalysis analyze_fit(const CompetingRisksSample& sample, const Fit& fit, Model model,
                           const AnalysisOptions& opts) {
  const auto functionals = standard_functionals(model);
  BootstrapOptions bopts;
  bopts.B = opts.B;
  bopts.master_seed = opts.seed;
  bopts.replication = opts.replication;
  bopts.workers = opts.workers;
  bopts.solver = opts.solver;
  const auto boot = bootstrap_mles(fit, sample.plan, functionals, bopts);

  auto rng = seed_stream(opts.seed, stream_ids::importance(opts.replication));
  const auto draws = model == Model::Restricted
                         ? draw_importance_restricted(sample, opts.priors, opts.M, rng, opts.proposal)
                         : draw_importance_unrestricted(sample, opts.priors, opts.M, rng,
                                                        opts.proposal);

  const double gamma = 1.0 - opts.level;
  const ParameterView mle = view(fit.params);
  SampleAnalysis out;
  out.model = model;
  out.max_loglik = fit.max_loglik;
  out.bootstrap_failures = boot.failures;
  out.bootstrap_warning = boot.warning;
  out.ess = draws.ess;
  out.low_ess = draws.low_ess;
  for (std::size_t i = 0; i < functionals.size(); ++i) {
    const auto& f = functionals[i];
    ParameterAnalysis p;
    p.name = f.name;
    p.mle = f.eval(mle);
    p.normal_bootstrap = normal_bootstrap_interval(boot.draws[i], gamma);
    p.percentile = percentile_interval(boot.draws[i], gamma);
    p.bayes = bayes_estimate(draws, f.eval);
    p.symmetric = symmetric_cri(draws, f.eval, gamma);
    p.hpd = hpd_cri(draws, f.eval, gamma);
    out.parameters.push_back(std::move(p));
  }
  return out;
}

Json bounds(const IntervalEstimate& in) { return Json::array({in.lower, in.upper}); }

}  // namespace

const ParameterAnalysis& SampleAnalysis::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw UsageError("no parameter '" + name + "' in analysis");
}

SampleAnalysis analyze_sample(const CompetingRisksSample& sample, Model model,
                              const AnalysisOptions& opts) {
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw UsageError("level must lie in (0, 1)");
  if (model == Model::Restricted)
    return analyze_fit(sample, fit_restricted(sample, opts.solver), model, opts);
  return analyze_fit(sample, fit_unrestricted(sample, opts.solver), model, opts);
}

Json analysis_to_json(const SampleAnalysis& a) {
  Json params = Json::object();
  for (const auto& p : a.parameters) {
    params[p.name] = Json{{"MLE", p.mle},
                          {"BB", bounds(p.normal_bootstrap)},
                          {"PB", bounds(p.percentile)},
                          {"BE", p.bayes},
                          {"SCRI", bounds(p.symmetric)},
                          {"HPD", bounds(p.hpd)}};
  }
  return Json{{"model", to_string(a.model)},
              {"loglik", a.max_loglik},
              {"bootstrap_failures", a.bootstrap_failures},
              {"bootstrap_warning", a.bootstrap_warning},
              {"ess", a.ess},
              {"low_ess", a.low_ess},
              {"parameters", params}};
}

ParameterView ScenarioSpec::truth() const noexcept {
  return {alpha, lambda1, lambda2, lambda2 / lambda1};
}

void ScenarioSpec::validate() const {
  if (auto v = plan_violations(plan); !v.empty()) {
    std::string msg = "scenario '" + label + "': invalid plan";
    for (const auto& s : v) msg += "; " + s;
    throw UsageError(msg);
  }
  if (!(alpha > 0.0 && lambda1 > 0.0 && lambda2 > 0.0))
    throw UsageError("scenario '" + label + "': parameters must be positive");
  if (replications < 1) throw UsageError("scenario '" + label + "': reps must be >= 1");
  if (B < 2) throw UsageError("scenario '" + label + "': B must be >= 2");
  if (M < 2) throw UsageError("scenario '" + label + "': M must be >= 2");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("scenario '" + label + "': level must lie in (0, 1)");
  if (models.empty()) throw UsageError("scenario '" + label + "': no models requested");
  priors.validate();
}

const ParameterMetrics& MetricsRow::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw UsageError("no parameter '" + name + "' in metrics row");
}

ReplicationOutcome run_replication(const ScenarioSpec& spec, Model model, int rep) {
  ReplicationOutcome out;
  try {
    auto rng = seed_stream(spec.seed, stream_ids::data(static_cast<std::uint64_t>(rep)));
    const auto sample = generate_sample(spec.plan, spec.alpha, spec.lambda1, spec.lambda2, rng);
    AnalysisOptions opts;
    opts.B = spec.B;
    opts.M = spec.M;
    opts.level = spec.level;
    opts.seed = spec.seed;
    opts.replication = static_cast<std::uint64_t>(rep);
    opts.priors = spec.priors;
    out.analysis = analyze_sample(sample, model, opts);
    out.ok = true;
  } catch (const NumericError& e) {
    out.failure = e.what();
  } catch (const DataError& e) {
    out.failure = e.what();
  }
  return out;
}

namespace {

MetricsRow aggregate(const ScenarioSpec& spec, Model model,
                     const std::vector<ReplicationOutcome>& outcomes) {
  MetricsRow row;
  row.scenario = spec.label;
  row.model = model;
  row.requested = static_cast<int>(outcomes.size());
  const ParameterView truth = spec.truth();
  for (const auto& f : standard_functionals(model)) {
    ParameterMetrics pm;
    pm.name = f.name;
    pm.truth = f.eval(truth);
    row.parameters.push_back(pm);
  }
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++row.failed;
      if (row.failure_samples.size() < kKeptFailureMessages) row.failure_samples.push_back(o.failure);
      continue;
    }
    ++row.succeeded;
    if (o.analysis.low_ess) ++row.low_ess;
    for (std::size_t i = 0; i < row.parameters.size(); ++i) {
      auto& pm = row.parameters[i];
      const auto& pa = o.analysis.parameters[i];
      const double em = pa.mle - pm.truth, eb = pa.bayes - pm.truth;
      pm.mle_bias += em;
      pm.mle_mse += em * em;
      pm.be_bias += eb;
      pm.be_mse += eb * eb;
      pm.cpb += pa.normal_bootstrap.contains(pm.truth);
      pm.alb += pa.normal_bootstrap.length();
      pm.cpp += pa.percentile.contains(pm.truth);
      pm.alp += pa.percentile.length();
      pm.cps += pa.symmetric.contains(pm.truth);
      pm.als += pa.symmetric.length();
      pm.cph += pa.hpd.contains(pm.truth);
      pm.alh += pa.hpd.length();
    }
  }
  const double k = row.succeeded > 0 ? static_cast<double>(row.succeeded)
                                     : std::numeric_limits<double>::quiet_NaN();
  for (auto& pm : row.parameters) {
    for (double* v : {&pm.mle_bias, &pm.mle_mse, &pm.cpb, &pm.alb, &pm.cpp, &pm.alp, &pm.be_bias,
                      &pm.be_mse, &pm.cps, &pm.als, &pm.cph, &pm.alh})
      *v /= k;
  }
  row.flagged = row.failed > kFailureFlagFraction * row.requested;
  return row;
}

}  // namespace

std::vector<MetricsRow> run_scenario(const ScenarioSpec& spec, unsigned workers) {
  spec.validate();
  const auto reps = static_cast<std::size_t>(spec.replications);
  std::vector<MetricsRow> rows;
  for (Model model : spec.models) {
    std::vector<ReplicationOutcome> outcomes(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
      outcomes[r] = run_replication(spec, model, static_cast<int>(r));
    });
    rows.push_back(aggregate(spec, model, outcomes));
  }
  return rows;
}

std::vector<MetricsRow> run_study(const std::vector<ScenarioSpec>& config, unsigned workers) {
  if (config.empty()) throw UsageError("study config has no scenarios");
  for (const auto& s : config) s.validate();
  std::vector<MetricsRow> rows;
  for (const auto& s : config) {
    auto r = run_scenario(s, workers);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

TableFormat table_format_from_string(const std::string& name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  throw UsageError("unknown table format '" + name + "' (expected csv or markdown)");
}

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  std::string s = os.str();
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> metric_cells(const ParameterMetrics& p, const TablePrecision& q) {
  return {fixed(p.mle_bias, q.bias), fixed(p.mle_mse, q.mse),    fixed(p.cpb, q.coverage),
          fixed(p.alb, q.length),    fixed(p.cpp, q.coverage),   fixed(p.alp, q.length),
          fixed(p.be_bias, q.bias),  fixed(p.be_mse, q.mse),     fixed(p.cps, q.coverage),
          fixed(p.als, q.length),    fixed(p.cph, q.coverage),   fixed(p.alh, q.length)};
}

}  // namespace

std::string render_table(const std::vector<MetricsRow>& rows, TableFormat format,
                         const TablePrecision& precision) {
  if (rows.empty()) throw UsageError("render_table: no rows");
  std::ostringstream os;
  if (format == TableFormat::Csv) {
    os << "scenario,model,parameter,truth,succeeded,failed,mle_bias,mle_mse,CPB,ALB,CPP,ALP,"
          "be_bias,be_mse,CPS,ALS,CPH,ALH\n";
    for (const auto& r : rows)
      for (const auto& p : r.parameters) {
        os << csv_field(r.scenario) << ',' << to_string(r.model) << ',' << p.name << ','
           << std::setprecision(17) << p.truth << ',' << r.succeeded << ',' << r.failed;
        for (const auto& c : metric_cells(p, precision)) os << ',' << c;
        os << '\n';
      }
    return os.str();
  }
  os << "| Scenario | Model | Parameter | Bias | MSE | CPB | ALB | CPP | ALP "
        "| Bias | MSE | CPS | ALS | CPH | ALH |\n";
  os << "|---|---|---|";
  for (int i = 0; i < 12; ++i) os << "---:|";
  os << '\n';
  for (const auto& r : rows)
    for (const auto& p : r.parameters) {
      os << "| " << r.scenario << (r.flagged ? " (flagged)" : "") << " | " << to_string(r.model)
         << " | " << p.name << " |";
      for (const auto& c : metric_cells(p, precision)) os << ' ' << c << " |";
      os << '\n';
    }
  return os.str();
}

// ---- config ----------------------------------------------------------------

namespace {

const std::set<std::string> kScenarioKeys{"label", "n",    "m",     "R",    "T",    "alpha",
                                          "lambda1", "lambda2", "reps", "B", "M", "level",
                                          "seed",  "models", "priors"};

double number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw SchemaError("scenario field '" + key + "' must be a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& key) {
  if (!j.is_number_integer()) throw SchemaError("scenario field '" + key + "' must be an integer");
  return j.get<int>();
}

const Json& required(const Json& obj, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError("scenario is missing field '" + key + "'");
  return *it;
}

std::string default_label(const ScenarioSpec& s) {
  std::ostringstream os;
  os << "n=" << s.plan.n << " m=" << s.plan.m << " R=" << describe_scheme(s.plan.removals)
     << " T=" << s.plan.ideal_time << " alpha=" << s.alpha << " l1=" << s.lambda1
     << " l2=" << s.lambda2;
  return os.str();
}

ScenarioSpec scenario_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("each scenario must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kScenarioKeys.count(key)) throw SchemaError("unknown scenario field '" + key + "'");
  ScenarioSpec s;
  s.plan.n = integer(required(j, "n"), "n");
  s.plan.m = integer(required(j, "m"), "m");
  const Json& r = required(j, "R");
  if (r.is_string()) {
    try {
      s.plan.removals = parse_scheme(r.get<std::string>(), s.plan.m);
    } catch (const UsageError& e) {
      throw SchemaError(std::string("scenario field 'R': ") + e.what());
    }
  } else if (r.is_array()) {
    for (const auto& x : r) s.plan.removals.push_back(integer(x, "R"));
  } else {
    throw SchemaError("scenario field 'R' must be an integer array or a scheme string");
  }
  if (j.contains("T")) s.plan.ideal_time = time_from_json(j.at("T"), "T");
  if (auto v = plan_violations(s.plan); !v.empty()) throw ValidationError("invalid plan", std::move(v));
  s.alpha = number(required(j, "alpha"), "alpha");
  s.lambda1 = number(required(j, "lambda1"), "lambda1");
  s.lambda2 = number(required(j, "lambda2"), "lambda2");
  if (j.contains("reps")) s.replications = integer(j.at("reps"), "reps");
  if (j.contains("B")) s.B = integer(j.at("B"), "B");
  if (j.contains("M")) s.M = integer(j.at("M"), "M");
  if (j.contains("level")) s.level = number(j.at("level"), "level");
  if (j.contains("seed")) {
    const Json& seed = j.at("seed");
    if (!seed.is_number_unsigned()) throw SchemaError("scenario field 'seed' must be a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
  }
  if (j.contains("models")) {
    const Json& ms = j.at("models");
    if (!ms.is_array()) throw SchemaError("scenario field 'models' must be an array");
    s.models.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) throw SchemaError("scenario field 'models' must hold strings");
      try {
        s.models.push_back(model_from_string(m.get<std::string>()));
      } catch (const UsageError& e) {
        throw SchemaError(e.what());
      }
    }
  }
  if (j.contains("priors")) s.priors = priors_from_json(j.at("priors"));
  s.label = j.contains("label") ? j.at("label").get<std::string>() : default_label(s);
  return s;
}

}  // namespace

std::vector<ScenarioSpec> scenarios_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("study config must be a JSON array of scenarios");
  std::vector<ScenarioSpec> out;
  for (const auto& item : j) out.push_back(scenario_from_json(item));
  return out;
}

std::vector<ScenarioSpec> load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open study config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw SchemaError("study config " + path.string() + ": " + e.what());
  }
  return scenarios_from_json(j);
}

}  // namespace apcr

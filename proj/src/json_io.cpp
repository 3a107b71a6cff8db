#include "apcr/json_io.hpp"

#include <cmath>
#include <string>

#include "apcr/error.hpp"

namespace apcr {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  const auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
  return *it;
}

int int_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw SchemaError(std::string("field '") + name + "' must be an integer");
  return v.get<int>();
}

const char* solver_path_name(SolverPath p) {
  return p == SolverPath::FixedPoint ? "fixed-point" : "golden-section";
}

template <class Fit>
Json fit_common(const Fit& fit, const ParameterView& v) {
  return Json{{"alpha", v.alpha},           {"lambda1", v.lambda1},
              {"lambda2", v.lambda2},       {"beta", v.beta},
              {"loglik", fit.max_loglik},   {"converged", fit.converged},
              {"iterations", fit.iterations}, {"boundary", fit.boundary},
              {"solver", solver_path_name(fit.path)}};
}

}  // namespace

Json time_to_json(double t) {
  if (std::isinf(t) && t > 0) return "inf";
  return t;
}

double time_from_json(const Json& j, const char* name) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && j.get<std::string>() == "inf") return kInfinity;
  throw SchemaError(std::string("field '") + name + "' must be a number or \"inf\"");
}

Json plan_to_json(const CensoringPlan& plan) {
  return Json{{"n", plan.n}, {"m", plan.m}, {"R", plan.removals}, {"T", time_to_json(plan.ideal_time)}};
}

CensoringPlan plan_from_json(const Json& j) {
  CensoringPlan plan;
  plan.n = int_field(j, "n");
  plan.m = int_field(j, "m");
  const Json& r = field(j, "R");
  if (!r.is_array()) throw SchemaError("field 'R' must be an array of integers");
  for (const auto& x : r) {
    if (!x.is_number_integer()) throw SchemaError("field 'R' must be an array of integers");
    plan.removals.push_back(x.get<int>());
  }
  plan.ideal_time = j.contains("T") ? time_from_json(j.at("T"), "T") : kInfinity;
  if (auto v = plan_violations(plan); !v.empty()) throw ValidationError("invalid plan", std::move(v));
  return plan;
}

Json fit_to_json(const RestrictedFit& fit) {
  auto j = fit_common(fit, view(fit.params));
  j["model"] = "restricted";
  return j;
}

Json fit_to_json(const UnrestrictedFit& fit) {
  auto j = fit_common(fit, view(fit.params));
  j["model"] = "unrestricted";
  return j;
}

Json fit_to_json(const EqualScalesFit& fit) {
  auto j = fit_common(fit, view(fit.params));
  j["model"] = "equal-scales";
  return j;
}

Json lrt_to_json(const LrtResult& lrt) {
  return Json{{"statistic", lrt.statistic}, {"df", lrt.df},         {"level", lrt.level},
              {"critical", lrt.critical},   {"p_value", lrt.p_value},
              {"decision", lrt.reject ? "reject" : "do not reject"}};
}

Json interval_to_json(const IntervalEstimate& in) {
  return Json{{"method", in.method}, {"level", in.level}, {"lower", in.lower}, {"upper", in.upper}};
}

Json interval_to_json(const IntervalEstimate& in, const BootstrapDraws& draws) {
  auto j = interval_to_json(in);
  j["functional"] = draws.functional;
  j["B"] = draws.B;
  j["failures"] = draws.failures;
  return j;
}

Json posterior_summary_to_json(const ImportanceDraws& draws, double level) {
  const double gamma = 1.0 - level;
  Json estimates = Json::object(), cri = Json::object();
  for (const auto& f : standard_functionals(draws.model)) {
    estimates[f.name] = bayes_estimate(draws, f.eval);
    cri[f.name] = Json{{"symmetric", interval_to_json(symmetric_cri(draws, f.eval, gamma))},
                       {"hpd", interval_to_json(hpd_cri(draws, f.eval, gamma))}};
  }
  return Json{{"model", to_string(draws.model)},
              {"M", draws.size()},
              {"alpha_tilde", draws.alpha_tilde},
              {"ess", draws.ess},
              {"low_ess", draws.low_ess},
              {"estimates", estimates},
              {"cri", cri}};
}

Priors priors_from_json(const Json& j) {
  const auto prior_value = [](const Json& v, const std::string& key) {
    if (!v.is_number()) throw SchemaError("prior hyperparameter '" + key + "' must be a number");
    return v.get<double>();
  };
  if (!j.is_object()) throw SchemaError("priors must be a JSON object");
  Priors p;
  double* slots[] = {&p.a1, &p.b1, &p.a2, &p.b2, &p.a3, &p.b3,
                     &p.a4, &p.b4, &p.a5, &p.b5, &p.a6, &p.b6};
  const char* names[] = {"a1", "b1", "a2", "b2", "a3", "b3", "a4", "b4", "a5", "b5", "a6", "b6"};
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (std::size_t i = 0; i < 12; ++i)
      if (key == names[i]) {
        *slots[i] = prior_value(value, key);
        found = true;
      }
    if (!found) throw SchemaError("unknown prior hyperparameter '" + key + "'");
  }
  p.validate();
  return p;
}

}  // namespace apcr

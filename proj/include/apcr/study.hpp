#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apcr/bayes.hpp"
#include "apcr/bootstrap.hpp"
#include "apcr/censoring.hpp"
#include "apcr/interval.hpp"
#include "apcr/json_io.hpp"
#include "apcr/likelihood.hpp"

namespace apcr {

// ---- single-sample analysis ------------------------------------------------

struct AnalysisOptions {
  int B = 1000;
  int M = 2000;
  double level = 0.95;  ///< nominal 1 - gamma for every interval
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;  ///< selects bootstrap and importance streams
  unsigned workers = 1;           ///< bootstrap refits
  Priors priors;
  SolverOptions solver;
  ShapeProposal proposal = ShapeProposal::RegressionCentred;
};

/// One row of the data-analysis layout: MLE, BB, PB, BE, SCRI, HPD.
struct ParameterAnalysis {
  std::string name;
  double mle = 0.0;
  IntervalEstimate normal_bootstrap;  ///< BB
  IntervalEstimate percentile;        ///< PB
  double bayes = 0.0;                 ///< BE
  IntervalEstimate symmetric;         ///< SCRI
  IntervalEstimate hpd;
};

struct SampleAnalysis {
  Model model = Model::Restricted;
  std::vector<ParameterAnalysis> parameters;
  double max_loglik = 0.0;
  int bootstrap_failures = 0;
  bool bootstrap_warning = false;
  double ess = 0.0;
  bool low_ess = false;

  const ParameterAnalysis& at(const std::string& name) const;
};

/// Fit, both bootstrap intervals and the importance-sampling summaries for
/// one model. Propagates the first library error.
SampleAnalysis analyze_sample(const CompetingRisksSample& sample, Model model,
                              const AnalysisOptions& opts);

/// Keys MLE, BB, PB, BE, SCRI, HPD per parameter.
Json analysis_to_json(const SampleAnalysis& analysis);

// ---- Monte Carlo study ----------------------------------------------------

struct ScenarioSpec {
  std::string label;
  CensoringPlan plan;
  double alpha = 1.5;
  double lambda1 = 1.2;
  double lambda2 = 1.0;
  std::vector<Model> models{Model::Restricted, Model::Unrestricted};
  int replications = 500;
  int B = 500;
  int M = 2000;
  double level = 0.95;
  std::uint64_t seed = 1;
  Priors priors;

  /// Monitored truth in the model's parameterization.
  ParameterView truth() const noexcept;
  void validate() const;  ///< throws UsageError
};

/// Per-parameter metrics; the first six are likelihood-side, the rest Bayes.
struct ParameterMetrics {
  std::string name;
  double truth = 0.0;
  double mle_bias = 0.0, mle_mse = 0.0;
  double cpb = 0.0, alb = 0.0;  ///< normal bootstrap
  double cpp = 0.0, alp = 0.0;  ///< percentile bootstrap
  double be_bias = 0.0, be_mse = 0.0;
  double cps = 0.0, als = 0.0;  ///< symmetric CRI
  double cph = 0.0, alh = 0.0;  ///< HPD CRI
};

struct MetricsRow {
  std::string scenario;
  Model model = Model::Restricted;
  std::vector<ParameterMetrics> parameters;
  int requested = 0;
  int succeeded = 0;
  int failed = 0;
  int low_ess = 0;             ///< replications whose ESS fell below 10
  bool flagged = false;        ///< more than 5% of replications failed
  std::vector<std::string> failure_samples;  ///< first few failure messages

  const ParameterMetrics& at(const std::string& name) const;
};

inline constexpr double kFailureFlagFraction = 0.05;

struct ReplicationOutcome {
  bool ok = false;
  std::string failure;
  SampleAnalysis analysis;
};

/// Generates replication `rep` of the scenario and analyzes it under `model`.
/// Library errors become ok = false.
ReplicationOutcome run_replication(const ScenarioSpec& spec, Model model, int rep);

/// One row per requested model, in spec.models order. Replications run on
/// `workers` threads (0: hardware concurrency); results do not depend on it.
std::vector<MetricsRow> run_scenario(const ScenarioSpec& spec, unsigned workers = 1);

/// Rows in config order. Empty config is a usage error.
std::vector<MetricsRow> run_study(const std::vector<ScenarioSpec>& config, unsigned workers = 1);

enum class TableFormat { Csv, Markdown };
TableFormat table_format_from_string(const std::string& name);

struct TablePrecision {
  int bias = 2;
  int mse = 3;
  int coverage = 3;
  int length = 2;
};

/// Long layout, one line per (scenario, model, parameter), metric columns in
/// the order Bias MSE CPB ALB CPP ALP | Bias MSE CPS ALS CPH ALH.
std::string render_table(const std::vector<MetricsRow>& rows, TableFormat format,
                         const TablePrecision& precision = {});

/// Study config: JSON array of {n, m, R, T, alpha, lambda1, lambda2, reps, B,
/// M, level, seed, models}; R is an integer array or a scheme shorthand.
std::vector<ScenarioSpec> scenarios_from_json(const Json& j);
std::vector<ScenarioSpec> load_study_config(const std::filesystem::path& path);

}  // namespace apcr

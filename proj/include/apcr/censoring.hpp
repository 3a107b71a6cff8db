#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apcr/rng.hpp"

namespace apcr {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Life-test design: n units, m observed failures, planned removals R and the
/// ideal test duration T (may be +inf).
struct CensoringPlan {
  int n = 0;
  int m = 0;
  std::vector<int> removals;
  double ideal_time = kInfinity;

  bool operator==(const CensoringPlan&) const = default;
};

/// Every violated plan invariant, empty when the plan is usable.
std::vector<std::string> plan_violations(const CensoringPlan& plan);

/// Builds a plan and throws ParameterError naming each violated identity.
CensoringPlan make_plan(int n, int m, std::vector<int> removals, double ideal_time = kInfinity);

/// Expands `right:k`, `fsp:k`, `osp:k` or an explicit comma list into a removal
/// vector of length m. `osp` places the k removals at failure ceil(m/2).
std::vector<int> parse_scheme(std::string_view text, int m);

/// Inverse of parse_scheme for the three named shapes, otherwise a comma list.
std::string describe_scheme(const std::vector<int>& removals);

enum class Cause : std::uint8_t { First = 1, Second = 2 };

/// An adaptive progressively censored competing-risks sample.
struct CompetingRisksSample {
  std::vector<double> times;  ///< strictly increasing observed failure times
  std::vector<Cause> causes;
  std::vector<int> removals;  ///< effective removals R*
  int change_index = 0;       ///< J: failures at or before T
  CensoringPlan plan;

  int m() const noexcept { return static_cast<int>(times.size()); }
  int n() const noexcept { return plan.n; }
  int count(Cause c) const noexcept;
  int m1() const noexcept { return count(Cause::First); }
  int m2() const noexcept { return count(Cause::Second); }
  /// Zero-based positions of failures from the given cause (the index set I_k).
  std::vector<int> indices_of(Cause c) const;

  bool operator==(const CompetingRisksSample&) const = default;
};

/// Number of failure times not exceeding T; a time equal to T counts as before T.
int change_index(const CensoringPlan& plan, const std::vector<double>& times);

/// Adapted removal vector R* for the observed times.
std::vector<int> effective_scheme(const CensoringPlan& plan, const std::vector<double>& times);

/// Sequential life-test simulation with independent Weibull latent lifetimes
/// sharing the shape alpha. Ties between latent lifetimes go to cause 1.
CompetingRisksSample generate_sample(const CensoringPlan& plan, double alpha, double lambda1,
                                     double lambda2, RngStream& rng);

/// All violated sample invariants; empty means valid.
std::vector<std::string> validate_sample(const CompetingRisksSample& sample);

/// Throws ValidationError if validate_sample reports anything.
void require_valid(const CompetingRisksSample& sample);

// CSV: header `index,time,cause,removed`, one row per observed failure.
void write_sample(const CompetingRisksSample& sample, const std::filesystem::path& path);
std::string sample_to_csv(const CompetingRisksSample& sample);

/// Reads a sample CSV. Without a plan, one is inferred from the file
/// (n = m + sum removed, R = removed, T = inf).
CompetingRisksSample read_sample(const std::filesystem::path& path,
                                 const std::optional<CensoringPlan>& plan = std::nullopt);
CompetingRisksSample sample_from_csv(std::string_view text,
                                     const std::optional<CensoringPlan>& plan = std::nullopt);

// Plan sidecar JSON: {"n", "m", "R": [...], "T": number | "inf"}.
void write_plan(const CensoringPlan& plan, const std::filesystem::path& path);
CensoringPlan read_plan(const std::filesystem::path& path);

/// `data.csv` -> `data.plan.json`.
std::filesystem::path plan_sidecar_path(const std::filesystem::path& sample_path);

}  // namespace apcr

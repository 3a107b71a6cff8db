#include "apcr/censoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "apcr/error.hpp"
#include "apcr/json_io.hpp"

namespace apcr {

namespace {

bool strictly_increasing(const std::vector<double>& x) {
  return std::adjacent_find(x.begin(), x.end(), std::greater_equal<>{}) == x.end();
}

std::vector<int> adapt(const CensoringPlan& plan, int J) {
  const int m = plan.m;
  if (J >= m) return plan.removals;
  std::vector<int> r(static_cast<std::size_t>(m), 0);
  int removed_before = 0;
  for (int j = 0; j < J; ++j) {
    r[j] = plan.removals[j];
    removed_before += plan.removals[j];
  }
  r[m - 1] = plan.n - m - removed_before;
  return r;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& field, const char* what, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty())
    throw SchemaError("line " + std::to_string(line) + ": cannot parse " + what + " '" + field +
                      "'");
  return value;
}

}  // namespace

std::vector<std::string> plan_violations(const CensoringPlan& plan) {
  std::vector<std::string> v;
  if (plan.m < 1) v.push_back("m >= 1 required (m = " + std::to_string(plan.m) + ")");
  if (plan.n < plan.m)
    v.push_back("n >= m required (n = " + std::to_string(plan.n) +
                ", m = " + std::to_string(plan.m) + ")");
  if (static_cast<int>(plan.removals.size()) != plan.m)
    v.push_back("R must have length m (" + std::to_string(plan.removals.size()) + " != " +
                std::to_string(plan.m) + ")");
  if (std::any_of(plan.removals.begin(), plan.removals.end(), [](int r) { return r < 0; }))
    v.push_back("R_j >= 0 required");
  const long total = std::accumulate(plan.removals.begin(), plan.removals.end(), 0L);
  if (plan.m + total != plan.n)
    v.push_back("m + sum(R) = n violated (" + std::to_string(plan.m) + " + " +
                std::to_string(total) + " != " + std::to_string(plan.n) + ")");
  if (!(plan.ideal_time > 0.0)) v.push_back("T > 0 required");
  return v;
}

CensoringPlan make_plan(int n, int m, std::vector<int> removals, double ideal_time) {
  CensoringPlan plan{n, m, std::move(removals), ideal_time};
  if (auto v = plan_violations(plan); !v.empty())
    throw ParameterError("invalid censoring plan" + [&] {
      std::string s;
      for (const auto& e : v) s += (s.empty() ? ": " : "; ") + e;
      return s;
    }());
  return plan;
}

std::vector<int> parse_scheme(std::string_view text, int m) {
  if (m < 1) throw UsageError("scheme: m must be positive");
  const std::string spec = trim(text);
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    int k = 0;
    try {
      k = parse_number<int>(trim(spec.substr(colon + 1)), "scheme count", 0);
    } catch (const SchemaError&) {
      throw UsageError("scheme: bad removal count in '" + spec + "'");
    }
    if (k < 0) throw UsageError("scheme: removal count must be non-negative");
    std::vector<int> r(static_cast<std::size_t>(m), 0);
    if (kind == "right") {
      r.back() = k;
    } else if (kind == "fsp") {
      r.front() = k;
    } else if (kind == "osp") {
      r[(m + 1) / 2 - 1] = k;
    } else {
      throw UsageError("scheme: unknown shorthand '" + kind + "' (use right, fsp, osp)");
    }
    return r;
  }
  std::vector<int> r;
  for (const auto& field : split(spec, ',')) {
    try {
      r.push_back(parse_number<int>(field, "removal", 0));
    } catch (const SchemaError&) {
      throw UsageError("scheme: bad entry '" + field + "'");
    }
  }
  if (static_cast<int>(r.size()) != m)
    throw UsageError("scheme: expected " + std::to_string(m) + " entries, got " +
                     std::to_string(r.size()));
  return r;
}

std::string describe_scheme(const std::vector<int>& removals) {
  const int m = static_cast<int>(removals.size());
  if (m == 0) return "";
  auto only_at = [&](int pos) {
    for (int j = 0; j < m; ++j)
      if (j != pos && removals[j] != 0) return false;
    return true;
  };
  if (only_at(m - 1)) return "right:" + std::to_string(removals[m - 1]);
  if (only_at(0)) return "fsp:" + std::to_string(removals[0]);
  const int mid = (m + 1) / 2 - 1;
  if (only_at(mid)) return "osp:" + std::to_string(removals[mid]);
  std::string s;
  for (int r : removals) s += (s.empty() ? "" : ",") + std::to_string(r);
  return s;
}

int CompetingRisksSample::count(Cause c) const noexcept {
  return static_cast<int>(std::count(causes.begin(), causes.end(), c));
}

std::vector<int> CompetingRisksSample::indices_of(Cause c) const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(causes.size()); ++i)
    if (causes[i] == c) idx.push_back(i);
  return idx;
}

int change_index(const CensoringPlan& plan, const std::vector<double>& times) {
  return static_cast<int>(
      std::count_if(times.begin(), times.end(), [&](double x) { return x <= plan.ideal_time; }));
}

std::vector<int> effective_scheme(const CensoringPlan& plan, const std::vector<double>& times) {
  if (auto v = plan_violations(plan); !v.empty()) throw ValidationError("invalid plan", v);
  std::vector<std::string> problems;
  if (static_cast<int>(times.size()) != plan.m)
    problems.push_back("expected " + std::to_string(plan.m) + " failure times, got " +
                       std::to_string(times.size()));
  if (!strictly_increasing(times)) problems.push_back("strict ordering");
  if (!problems.empty()) throw ValidationError("effective_scheme", problems);
  return adapt(plan, change_index(plan, times));
}

CompetingRisksSample generate_sample(const CensoringPlan& plan, double alpha, double lambda1,
                                     double lambda2, RngStream& rng) {
  if (!(alpha > 0.0) || !(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw ParameterError("generate_sample: alpha, lambda1, lambda2 must be positive");
  if (auto v = plan_violations(plan); !v.empty())
    throw ParameterError("generate_sample: invalid plan: " + v.front());

  struct Unit {
    double life;
    Cause cause;
  };
  std::vector<Unit> alive;
  alive.reserve(static_cast<std::size_t>(plan.n));
  for (int i = 0; i < plan.n; ++i) {
    const double x1 = sample_weibull(rng, alpha, lambda1);
    const double x2 = sample_weibull(rng, alpha, lambda2);
    alive.push_back(x1 <= x2 ? Unit{x1, Cause::First} : Unit{x2, Cause::Second});
  }
  // Stable so the unit order (and thus the removal draws) is reproducible.
  std::stable_sort(alive.begin(), alive.end(),
                   [](const Unit& a, const Unit& b) { return a.life < b.life; });

  CompetingRisksSample s;
  s.plan = plan;
  s.times.reserve(static_cast<std::size_t>(plan.m));
  s.causes.reserve(static_cast<std::size_t>(plan.m));
  s.removals.reserve(static_cast<std::size_t>(plan.m));
  for (int j = 0; j < plan.m; ++j) {
    const Unit failed = alive.front();
    alive.erase(alive.begin());
    s.times.push_back(failed.life);
    s.causes.push_back(failed.cause);
    int r = 0;
    if (j == plan.m - 1) {
      r = static_cast<int>(alive.size());
      alive.clear();
    } else {
      if (failed.life <= plan.ideal_time) {
        r = plan.removals[j];
        ++s.change_index;
      }
      for (int k = 0; k < r; ++k) {
        const auto idx = sample_index(rng, alive.size());
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(idx));
      }
    }
    s.removals.push_back(r);
  }
  if (s.times.back() <= plan.ideal_time) ++s.change_index;
  return s;
}

std::vector<std::string> validate_sample(const CompetingRisksSample& s) {
  std::vector<std::string> v;
  for (const auto& p : plan_violations(s.plan)) v.push_back("plan: " + p);
  const std::size_t m = s.times.size();
  const bool sizes_ok = s.causes.size() == m && s.removals.size() == m &&
                        static_cast<int>(m) == s.plan.m && m > 0;
  if (!sizes_ok)
    v.push_back("length: times/causes/removals must all have plan.m = " +
                std::to_string(s.plan.m) + " entries");
  if (std::any_of(s.times.begin(), s.times.end(),
                  [](double x) { return !(x > 0.0) || !std::isfinite(x); }))
    v.push_back("positive times: every failure time must be finite and > 0");
  const bool ordered = strictly_increasing(s.times);
  if (!ordered) v.push_back("strict ordering: failure times must be strictly increasing");
  if (std::any_of(s.causes.begin(), s.causes.end(),
                  [](Cause c) { return c != Cause::First && c != Cause::Second; }))
    v.push_back("cause label: causes must be 1 or 2");
  if (std::any_of(s.removals.begin(), s.removals.end(), [](int r) { return r < 0; }))
    v.push_back("negative removal: R*_j >= 0 required");
  const long total = std::accumulate(s.removals.begin(), s.removals.end(), 0L);
  if (static_cast<long>(m) + total != s.plan.n)
    v.push_back("removal sum: m + sum(R*) = " + std::to_string(static_cast<long>(m) + total) +
                " but n = " + std::to_string(s.plan.n));
  const int J = change_index(s.plan, s.times);
  if (s.change_index != J)
    v.push_back("change index: J = " + std::to_string(s.change_index) + " but " +
                std::to_string(J) + " failures occur by T");
  if (sizes_ok && ordered && plan_violations(s.plan).empty() && s.removals != adapt(s.plan, J))
    v.push_back("effective scheme: removals differ from the adapted scheme R*");
  return v;
}

void require_valid(const CompetingRisksSample& sample) {
  if (auto v = validate_sample(sample); !v.empty())
    throw ValidationError("invalid competing-risks sample", std::move(v));
}

std::string sample_to_csv(const CompetingRisksSample& s) {
  std::ostringstream os;
  os.precision(17);
  os << "index,time,cause,removed\n";
  for (std::size_t i = 0; i < s.times.size(); ++i)
    os << (i + 1) << ',' << s.times[i] << ',' << static_cast<int>(s.causes[i]) << ','
       << s.removals[i] << '\n';
  return os.str();
}

void write_sample(const CompetingRisksSample& sample, const std::filesystem::path& path) {
  require_valid(sample);
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << sample_to_csv(sample);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

CompetingRisksSample sample_from_csv(std::string_view text,
                                     const std::optional<CensoringPlan>& plan) {
  static const std::vector<std::string> kColumns{"index", "time", "cause", "removed"};
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto pos = text.find('\n', start);
      auto line = trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (!line.empty()) lines.push_back(std::move(line));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  if (lines.empty()) throw SchemaError("empty sample file: missing header");

  const auto header = split(lines.front(), ',');
  std::vector<int> column_of(kColumns.size(), -1);
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const auto it = std::find(kColumns.begin(), kColumns.end(), header[c]);
    if (it == kColumns.end()) throw SchemaError("header mismatch: unexpected column '" + header[c] + "'");
    column_of[it - kColumns.begin()] = c;
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k)
    if (column_of[k] < 0) throw SchemaError("header mismatch: missing column '" + kColumns[k] + "'");

  CompetingRisksSample s;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const auto fields = split(lines[row], ',');
    const std::size_t line_no = row + 1;
    if (fields.size() != header.size())
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    const int index = parse_number<int>(fields[column_of[0]], "index", line_no);
    if (index != static_cast<int>(row))
      throw SchemaError("line " + std::to_string(line_no) + ": index " + std::to_string(index) +
                        " out of sequence");
    s.times.push_back(parse_number<double>(fields[column_of[1]], "time", line_no));
    const int cause = parse_number<int>(fields[column_of[2]], "cause", line_no);
    if (cause != 1 && cause != 2)
      throw SchemaError("line " + std::to_string(line_no) + ": cause must be 1 or 2");
    s.causes.push_back(static_cast<Cause>(cause));
    s.removals.push_back(parse_number<int>(fields[column_of[3]], "removed", line_no));
  }
  if (s.times.empty()) throw SchemaError("sample file has no data rows");

  if (plan) {
    s.plan = *plan;
  } else {
    const int m = static_cast<int>(s.times.size());
    s.plan = CensoringPlan{m + std::accumulate(s.removals.begin(), s.removals.end(), 0), m,
                           s.removals, kInfinity};
  }
  s.change_index = change_index(s.plan, s.times);
  require_valid(s);
  return s;
}

CompetingRisksSample read_sample(const std::filesystem::path& path,
                                 const std::optional<CensoringPlan>& plan) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sample file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return sample_from_csv(buffer.str(), plan);
}

void write_plan(const CensoringPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << plan_to_json(plan).dump() << '\n';
}

CensoringPlan read_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open plan file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("plan file '" + path.string() + "': " + e.what());
  }
  return plan_from_json(j);
}

std::filesystem::path plan_sidecar_path(const std::filesystem::path& sample_path) {
  auto p = sample_path;
  p.replace_extension(".plan.json");
  return p;
}

}  // namespace apcr

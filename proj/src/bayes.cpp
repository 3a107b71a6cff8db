#include "apcr/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "apcr/error.hpp"

namespace apcr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// c * ln(x), dropping the term when its coefficient vanishes.
double scaled_log(double c, double x) { return c == 0.0 ? 0.0 : c * std::log(x); }

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string("prior hyperparameter ") + name + " must be positive");
}

// Gamma(shape, rate = exp(log_rate)) without forming the rate, which may overflow.
double draw_gamma_log_rate(RngStream& rng, double shape, double log_rate) {
  return std::exp(std::log(sample_gamma(rng, shape, 1.0)) - log_rate);
}

}  // namespace

void Priors::validate() const {
  require_positive(a1, "a1");
  require_positive(b1, "b1");
  require_positive(a2, "a2");
  require_positive(b2, "b2");
  require_positive(a3, "a3");
  require_positive(b3, "b3");
  require_positive(a4, "a4");
  require_positive(b4, "b4");
  require_positive(a5, "a5");
  require_positive(b5, "b5");
  require_positive(a6, "a6");
  require_positive(b6, "b6");
}

RestrictedPosterior::RestrictedPosterior(const CompetingRisksSample& sample, const Priors& priors)
    : stats_(sample), priors_(priors), A2_(priors.b2 - stats_.sum_log_x()) {
  priors_.validate();
}

double RestrictedPosterior::log_A1(double alpha, double beta) const {
  return log_add(std::log(priors_.b1), std::log1p(beta) + stats_.log_g(alpha));
}

double RestrictedPosterior::A1(double alpha, double beta) const {
  return std::exp(log_A1(alpha, beta));
}

double RestrictedPosterior::log_weight(double alpha, double beta, double proposal_rate) const {
  const int m = stats_.m(), m2 = stats_.m2();
  const auto& p = priors_;
  return scaled_log(m + p.a2 - 2.0, alpha) + scaled_log(m2 + p.a3 - 1.0, beta) +
         scaled_log(p.b3 - 1.0, 1.0 - beta) - alpha * (A2_ - proposal_rate) -
         (m + p.a1) * log_A1(alpha, beta);
}

double RestrictedPosterior::draw_lambda1(double alpha, double beta, RngStream& rng) const {
  return draw_gamma_log_rate(rng, stats_.m() + priors_.a1, log_A1(alpha, beta));
}

UnrestrictedPosterior::UnrestrictedPosterior(const CompetingRisksSample& sample,
                                             const Priors& priors)
    : stats_(sample), priors_(priors), A5_(priors.b6 - stats_.sum_log_x()) {
  priors_.validate();
}

double UnrestrictedPosterior::log_A3(double alpha) const {
  return log_add(std::log(priors_.b4), stats_.log_g(alpha));
}
double UnrestrictedPosterior::log_A4(double alpha) const {
  return log_add(std::log(priors_.b5), stats_.log_g(alpha));
}
double UnrestrictedPosterior::A3(double alpha) const { return std::exp(log_A3(alpha)); }
double UnrestrictedPosterior::A4(double alpha) const { return std::exp(log_A4(alpha)); }

double UnrestrictedPosterior::log_weight(double alpha, double proposal_rate) const {
  const int m = stats_.m(), m1 = stats_.m1(), m2 = stats_.m2();
  const auto& p = priors_;
  const double log_g = stats_.log_g(alpha);
  return scaled_log(m + p.a6 - 2.0, alpha) - alpha * (A5_ - proposal_rate) -
         (m1 + p.a4) * log_add(std::log(p.b4), log_g) -
         (m2 + p.a5) * log_add(std::log(p.b5), log_g);
}

double UnrestrictedPosterior::draw_lambda1(double alpha, RngStream& rng) const {
  return draw_gamma_log_rate(rng, stats_.m1() + priors_.a4, log_A3(alpha));
}

double UnrestrictedPosterior::draw_lambda2(double alpha, RngStream& rng) const {
  return draw_gamma_log_rate(rng, stats_.m2() + priors_.a5, log_A4(alpha));
}

std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
  double top = kNegInf;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double lw = log_weights[i];
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity())
      throw WeightDegeneracyError("importance log-weight " + std::to_string(i) + " is not finite");
    top = std::max(top, lw);
  }
  if (top == kNegInf) throw WeightDegeneracyError("all importance weights are zero");
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += (w[i] = std::exp(log_weights[i] - top));
  for (double& v : w) v /= total;
  return w;
}

namespace {

void finish(ImportanceDraws& d) {
  d.weights = normalize_log_weights(d.log_weights);
  double sq = 0.0;
  for (double w : d.weights) sq += w * w;
  d.ess = 1.0 / sq;
  d.low_ess = d.ess < kLowEssThreshold;
}

void check_draw_inputs(const CompetingRisksSample& sample, int M) {
  if (M < 2) throw UsageError("importance sampling: M must be at least 2");
  if (sample.m() < 1) throw UsageError("importance sampling: empty sample");
}

}  // namespace

ImportanceDraws draw_importance_restricted(const CompetingRisksSample& sample, const Priors& priors,
                                           int M, RngStream& rng, ShapeProposal proposal) {
  check_draw_inputs(sample, M);
  const RestrictedPosterior post(sample, priors);
  ImportanceDraws d;
  d.model = Model::Restricted;
  d.alpha_tilde = prestimate_alpha(sample);
  d.proposal_rate = 2.0 / d.alpha_tilde;
  const double conj_shape = post.stats().m() + priors.a2 - 1.0;
  if (proposal == ShapeProposal::Conjugate && !(post.A2() > 0.0 && conj_shape > 0.0))
    throw ParameterError("conjugate shape proposal needs A2 > 0; rescale the data");
  d.draws.reserve(static_cast<std::size_t>(M));
  d.log_weights.reserve(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    double alpha, lw_shift = 0.0;
    if (proposal == ShapeProposal::RegressionCentred) {
      alpha = sample_gamma(rng, 2.0, d.proposal_rate);
    } else {
      alpha = sample_gamma(rng, conj_shape, post.A2());
      // Swap the gamma(2, b) proposal kernel for gamma(m + a2 - 1, A2).
      lw_shift = std::log(alpha) - d.proposal_rate * alpha -
                 ((conj_shape - 1.0) * std::log(alpha) - post.A2() * alpha);
    }
    const double beta = sample_uniform(rng);
    const double lambda1 = post.draw_lambda1(alpha, beta, rng);
    d.draws.push_back({alpha, lambda1, beta * lambda1, beta});
    d.log_weights.push_back(post.log_weight(alpha, beta, d.proposal_rate) + lw_shift);
  }
  finish(d);
  return d;
}

ImportanceDraws draw_importance_unrestricted(const CompetingRisksSample& sample,
                                             const Priors& priors, int M, RngStream& rng,
                                             ShapeProposal proposal) {
  check_draw_inputs(sample, M);
  const UnrestrictedPosterior post(sample, priors);
  ImportanceDraws d;
  d.model = Model::Unrestricted;
  d.alpha_tilde = prestimate_alpha(sample);
  d.proposal_rate = 2.0 / d.alpha_tilde;
  const double conj_shape = post.stats().m() + priors.a6 - 1.0;
  if (proposal == ShapeProposal::Conjugate && !(post.A5() > 0.0 && conj_shape > 0.0))
    throw ParameterError("conjugate shape proposal needs A5 > 0; rescale the data");
  d.draws.reserve(static_cast<std::size_t>(M));
  d.log_weights.reserve(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    double alpha, lw_shift = 0.0;
    if (proposal == ShapeProposal::RegressionCentred) {
      alpha = sample_gamma(rng, 2.0, d.proposal_rate);
    } else {
      alpha = sample_gamma(rng, conj_shape, post.A5());
      lw_shift = std::log(alpha) - d.proposal_rate * alpha -
                 ((conj_shape - 1.0) * std::log(alpha) - post.A5() * alpha);
    }
    const double lambda1 = post.draw_lambda1(alpha, rng);
    const double lambda2 = post.draw_lambda2(alpha, rng);
    d.draws.push_back({alpha, lambda1, lambda2, lambda2 / lambda1});
    d.log_weights.push_back(post.log_weight(alpha, d.proposal_rate) + lw_shift);
  }
  finish(d);
  return d;
}

namespace {

std::vector<double> evaluate(const ImportanceDraws& draws, const ParameterFunction& h) {
  std::vector<double> values(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    values[i] = h(draws.draws[i]);
    if (!std::isfinite(values[i]) && draws.weights[i] > 0.0)
      throw NumericError("functional is not finite at importance draw " + std::to_string(i));
  }
  return values;
}

}  // namespace

double bayes_estimate(const ImportanceDraws& draws, const ParameterFunction& h) {
  const auto values = evaluate(draws, h);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (draws.weights[i] > 0.0) s += draws.weights[i] * values[i];
  return s;
}

double bayes_estimate_jackknife_se(const ImportanceDraws& draws, const ParameterFunction& h) {
  const auto values = evaluate(draws, h);
  const double total = bayes_estimate(draws, h);
  std::vector<double> loo;
  loo.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = draws.weights[i];
    if (w >= 1.0) continue;
    loo.push_back(w > 0.0 ? (total - w * values[i]) / (1.0 - w) : total);
  }
  const double n = static_cast<double>(loo.size());
  if (n < 2) return 0.0;
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt((n - 1.0) / n * ss);
}

WeightedSample sort_weighted(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw UsageError("sort_weighted: size mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  WeightedSample out;
  out.values.reserve(order.size());
  out.weights.reserve(order.size());
  for (auto i : order) {
    out.values.push_back(values[i]);
    out.weights.push_back(weights[i]);
  }
  return out;
}

namespace {

void check_cri_inputs(const WeightedSample& s, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("credible interval: gamma must lie in (0, 1)");
  if (s.values.size() < 2) throw UsageError("credible interval: need at least two draws");
}

std::vector<double> prefix_sums(const std::vector<double>& w) {
  std::vector<double> c(w.size() + 1, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) c[i + 1] = c[i] + w[i];
  return c;
}

// A single draw heavier than 1 - gamma: no sandwich pair can contain it, so the
// interval collapses onto that draw.
std::optional<std::size_t> dominant_draw(const WeightedSample& s, double gamma) {
  const auto it = std::max_element(s.weights.begin(), s.weights.end());
  if (*it > 1.0 - gamma + kCumulativeWeightTolerance)
    return static_cast<std::size_t>(it - s.weights.begin());
  return std::nullopt;
}

}  // namespace

CriIndices symmetric_cri_indices(const WeightedSample& s, double gamma) {
  check_cri_inputs(s, gamma);
  if (auto k = dominant_draw(s, gamma)) return {*k, *k};
  const auto c = prefix_sums(s.weights);
  const std::size_t M = s.values.size();
  const double tail = gamma / 2.0 + kCumulativeWeightTolerance;
  const double cover = 1.0 - gamma + kCumulativeWeightTolerance;
  std::size_t j1 = 0;
  while (j1 + 1 < M && c[j1 + 1] <= tail) ++j1;
  std::size_t end = j1;  // exclusive
  while (end < M && c[end + 1] - c[j1] <= cover) ++end;
  if (end >= M || end < j1 + 2)
    throw ResolutionError("symmetric credible interval unresolved: weights too concentrated for "
                          "gamma; increase M");
  return {j1, end - 1};
}

CriIndices hpd_cri_indices(const WeightedSample& s, double gamma) {
  check_cri_inputs(s, gamma);
  if (auto k = dominant_draw(s, gamma)) return {*k, *k};
  const auto c = prefix_sums(s.weights);
  const std::size_t M = s.values.size();
  const double cover = 1.0 - gamma + kCumulativeWeightTolerance;
  std::optional<CriIndices> best;
  double best_width = std::numeric_limits<double>::infinity();
  std::size_t end = 0;  // largest exclusive end with span mass <= cover
  for (std::size_t j1 = 0; j1 < M; ++j1) {
    end = std::max(end, j1);
    while (end < M && c[end + 1] - c[j1] <= cover) ++end;
    if (end >= M) break;  // no draw left to push the mass over 1 - gamma
    if (end < j1 + 2) continue;
    const double width = s.values[end - 1] - s.values[j1];
    if (width < best_width) {
      best_width = width;
      best = CriIndices{j1, end - 1};
    }
  }
  if (!best)
    throw ResolutionError("HPD credible interval unresolved: no index pair satisfies the "
                          "cumulative-weight condition; increase M");
  return *best;
}

namespace {

IntervalEstimate make_cri(const ImportanceDraws& draws, const ParameterFunction& h, double gamma,
                          bool hpd) {
  const auto values = evaluate(draws, h);
  const auto sorted = sort_weighted(values, draws.weights);
  const auto idx = hpd ? hpd_cri_indices(sorted, gamma) : symmetric_cri_indices(sorted, gamma);
  return {sorted.values[idx.lower], sorted.values[idx.upper], 1.0 - gamma,
          hpd ? "hpd" : "symmetric"};
}

}  // namespace

IntervalEstimate symmetric_cri(const ImportanceDraws& draws, const ParameterFunction& h,
                               double gamma) {
  return make_cri(draws, h, gamma, false);
}

IntervalEstimate hpd_cri(const ImportanceDraws& draws, const ParameterFunction& h, double gamma) {
  return make_cri(draws, h, gamma, true);
}

}  // namespace apcr

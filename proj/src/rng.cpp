#include "apcr/rng.hpp"

#include <cmath>
#include <numbers>

#include "apcr/error.hpp"

namespace apcr {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
    : seed_(master_seed), id_(stream_id) {}

void RngStream::refill() noexcept {
  const std::array<std::uint32_t, 4> counter{
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = philox4x32_10(counter, key);
  ++block_;
  used_ = 0;
}

std::uint32_t RngStream::next_u32() noexcept {
  if (used_ == 4) refill();
  return buffer_[used_++];
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

RngStream seed_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
  return RngStream(master_seed, stream_id);
}

double sample_uniform(RngStream& rng) noexcept {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (;;) {
    const std::uint64_t k = rng.next_u64() >> 11;
    if (k != 0) return static_cast<double>(k) * kScale;
  }
}

std::uint64_t sample_index(RngStream& rng, std::uint64_t bound) {
  if (bound == 0) throw ParameterError("sample_index: bound must be positive");
  // Reject the short final bucket so every index is equally likely.
  const std::uint64_t limit = -bound % bound;
  for (;;) {
    const std::uint64_t r = rng.next_u64();
    if (r >= limit) return r % bound;
  }
}

double sample_standard_normal(RngStream& rng) noexcept {
  const double u1 = sample_uniform(rng);
  const double u2 = sample_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double weibull_from_uniform(double u, double alpha, double lambda) {
  if (!(alpha > 0.0) || !(lambda > 0.0))
    throw ParameterError("weibull: alpha and lambda must be positive");
  return std::pow(-std::log(u) / lambda, 1.0 / alpha);
}

double sample_weibull(RngStream& rng, double alpha, double lambda) {
  if (!(alpha > 0.0) || !(lambda > 0.0))
    throw ParameterError("weibull: alpha and lambda must be positive");
  return weibull_from_uniform(sample_uniform(rng), alpha, lambda);
}

// Marsaglia & Tsang squeeze; shapes below one use the x * U^(1/k) boost.
double sample_gamma(RngStream& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw ParameterError("gamma: shape and rate must be positive");
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(sample_uniform(rng), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = sample_uniform(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return boost * d * v / rate;
    }
  }
}

}  // namespace apcr

#pragma once

#include <array>
#include <cstdint>

namespace apcr {

/// Counter-based random stream (Philox4x32-10).
///
/// The key is the master seed; the upper half of the 128-bit counter holds the
/// stream id and the lower half counts blocks. Streams sharing a seed but with
/// different ids therefore walk disjoint regions of one keyed bijection, and a
/// stream's output depends only on (master_seed, stream_id, position).
///
/// A stream is single-owner. Distinct streams can be used from distinct threads.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return id_; }

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
};

RngStream seed_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

/// Uniform on the open interval (0, 1); endpoints are rejected.
double sample_uniform(RngStream& rng) noexcept;

/// Uniform integer in [0, bound). bound must be positive.
std::uint64_t sample_index(RngStream& rng, std::uint64_t bound);

double sample_standard_normal(RngStream& rng) noexcept;

/// Inverse-CDF Weibull transform for density a*l*x^(a-1)*exp(-l*x^a).
double weibull_from_uniform(double u, double alpha, double lambda);

/// Weibull with shape alpha and rate-type scale lambda: CDF 1 - exp(-lambda x^alpha).
double sample_weibull(RngStream& rng, double alpha, double lambda);

/// Gamma with density proportional to x^(shape-1) exp(-rate x).
double sample_gamma(RngStream& rng, double shape, double rate);

// Stream-id layout shared by the simulation harness: the top bits carry the
// replication, the low 20 bits the purpose within it.
namespace stream_ids {
inline constexpr std::uint64_t kReplicationShift = 20;
inline constexpr std::uint64_t kMaxResamples = (std::uint64_t{1} << kReplicationShift) - 2;

constexpr std::uint64_t data(std::uint64_t replication) {
  return replication << kReplicationShift;
}
constexpr std::uint64_t importance(std::uint64_t replication) {
  return (replication << kReplicationShift) + 1;
}
constexpr std::uint64_t bootstrap(std::uint64_t replication, std::uint64_t resample) {
  return (replication << kReplicationShift) + 2 + resample;
}
}  // namespace stream_ids

}  // namespace apcr

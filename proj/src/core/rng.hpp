#pragma once

#include <cstdint>
#include <limits>

namespace rsos {

/// Splittable counter-style generator (SplitMix64 with per-stream gamma).
///
/// A stream is identified by a 64-bit key. child(i) derives an independent
/// stream deterministically, so replication r of an experiment always uses
/// Stream(master).child(r) regardless of scheduling order. Distribution
/// sampling is done here rather than through <random> distributions so that
/// outputs are identical across standard library implementations.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) noexcept;
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  Stream child(std::uint64_t index) const noexcept;
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t state_;
  std::uint64_t gamma_;
};

/// Seed of child stream `index` under `parent`; used to publish per-replication
/// seeds in manifests.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

// Well-known child indices, kept apart from replication indices by the high bit.
inline constexpr std::uint64_t kLatticeStream = 0x8000'0000'0000'0001ULL;
inline constexpr std::uint64_t kCollisionStream = 0x8000'0000'0000'0002ULL;
inline constexpr std::uint64_t kInitStream = 0x8000'0000'0000'0003ULL;
inline constexpr std::uint64_t kProbeStream = 0x8000'0000'0000'0004ULL;
inline constexpr std::uint64_t kResampleStream = 0x8000'0000'0000'0005ULL;
inline constexpr std::uint64_t kBootstrapStream = 0x8000'0000'0000'0006ULL;

}  // namespace rsos

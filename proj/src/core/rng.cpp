#include "core/rng.hpp"

#include <bit>
#include <cmath>

namespace rsos {
namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Gamma must be odd and not too regular in its bit pattern.
std::uint64_t mix_gamma(std::uint64_t z) noexcept {
  z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
  z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xAAAAAAAAAAAAAAAAULL;
  return z;
}

}  // namespace

Stream::Stream(std::uint64_t key) noexcept
    : key_(key), state_(mix64(key)), gamma_(mix_gamma(key + kGoldenGamma)) {}

Stream::result_type Stream::operator()() noexcept {
  state_ += gamma_;
  return mix64(state_);
}

double Stream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Stream::exponential(double rate) noexcept {
  return -std::log1p(-uniform()) / rate;
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t Stream::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Stream Stream::child(std::uint64_t index) const noexcept {
  return Stream(derive_seed(key_, index));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index * kGoldenGamma + 0x632BE59BD9B4E019ULL));
}

}  // namespace rsos

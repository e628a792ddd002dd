#pragma once

#include <cstddef>
#include <cstdint>

namespace stance {

// Counter-based generator: output i of stream s is a pure function of
// (seed, s, i), so any consumer can be replayed in isolation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  // Independent generator for a named sub-purpose.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Well-known stream ids.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kDropout = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kSplit = 4;
}  // namespace streams

}  // namespace stance

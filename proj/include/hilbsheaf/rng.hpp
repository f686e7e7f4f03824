#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace hilbsheaf {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). The 64-bit seed is the key; the 128-bit
// counter is (stream, block index). Output words are consumed in order
// x0, x1, x2, x3 of each block.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* kName = "philox4x32-10";

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits (two consecutive words,
  // first word supplies the high bits).
  double uniform();
  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller on (1 - uniform(), uniform()); pairs are
  // cached so every second call is free.
  double normal();

  // Raw block function, exposed for known-answer tests.
  static Block block(Block counter, Key key);

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  Block buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; used to derive independent per-task seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for a sub-task identified by a sequence of tags (cell index, edge
// index, ...). Pure function of its arguments, so derived streams do not
// depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

}  // namespace hilbsheaf

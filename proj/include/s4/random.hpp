#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "s4/bigint.hpp"

namespace s4 {

// Source of uniform random words. Every consumer in the library draws field
// elements through below()/in_range(), so swapping the source swaps the
// randomness of a whole run.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual std::uint64_t next_u64() = 0;

  // Uniform in [0, bound). bound must be positive.
  BigUint below(const BigUint& bound);

  // Uniform in [low, high). Requires low < high.
  BigUint in_range(const BigUint& low, const BigUint& high);

  // Uniform in [0, bound) for word-sized bounds.
  std::uint64_t below_u64(std::uint64_t bound);
};

// Cryptographically secure generator (OpenSSL RAND_bytes, buffered).
class SecureRandom final : public RandomSource {
 public:
  std::uint64_t next_u64() override;

 private:
  void refill();

  std::vector<std::uint64_t> buffer_;
  std::size_t pos_ = 0;
};

// NOT SECURE. Seedable mt19937_64 stream for tests and benchmarks only: the
// output sequence is fixed by the C++ standard, so runs reproduce across
// platforms.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace s4

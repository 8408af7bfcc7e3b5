#include "s4/random.hpp"

#include <openssl/rand.h>

#include "s4/error.hpp"

namespace s4 {

std::uint64_t RandomSource::below_u64(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::kInvalidArgument, "below_u64: zero bound");
  // Rejection on the largest multiple of bound that fits in 64 bits.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    std::uint64_t word = next_u64();
    if (word < limit) return word % bound;
  }
}

BigUint RandomSource::below(const BigUint& bound) {
  if (sgn(bound) <= 0) throw Error(ErrorKind::kInvalidArgument, "below: nonpositive bound");
  if (mpz_fits_ulong_p(bound.get_mpz_t())) {
    BigUint out;
    mpz_set_ui(out.get_mpz_t(), below_u64(mpz_get_ui(bound.get_mpz_t())));
    return out;
  }
  const std::size_t bits = bit_length(bound);
  const std::size_t words = (bits + 63) / 64;
  const unsigned top_bits = static_cast<unsigned>(bits - 64 * (words - 1));
  const std::uint64_t top_mask = top_bits == 64 ? UINT64_MAX : ((std::uint64_t{1} << top_bits) - 1);
  std::vector<std::uint64_t> limbs(words);
  BigUint candidate;
  for (;;) {
    for (auto& limb : limbs) limb = next_u64();
    limbs.back() &= top_mask;
    // Least significant word first, native endianness within words.
    mpz_import(candidate.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, limbs.data());
    if (candidate < bound) return candidate;
  }
}

BigUint RandomSource::in_range(const BigUint& low, const BigUint& high) {
  if (!(low < high)) throw Error(ErrorKind::kInvalidArgument, "in_range: empty range");
  BigUint width = high - low;
  return low + below(width);
}

void SecureRandom::refill() {
  buffer_.resize(64);
  if (RAND_bytes(reinterpret_cast<unsigned char*>(buffer_.data()),
                 static_cast<int>(buffer_.size() * sizeof(std::uint64_t))) != 1) {
    throw Error(ErrorKind::kIo, "RAND_bytes failed");
  }
  pos_ = 0;
}

std::uint64_t SecureRandom::next_u64() {
  if (pos_ >= buffer_.size()) refill();
  return buffer_[pos_++];
}

}  // namespace s4

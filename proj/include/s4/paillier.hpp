#pragma once

#include <cstddef>
#include <string>

#include "s4/bigint.hpp"
#include "s4/random.hpp"

namespace s4::paillier {

// Public half: n = p*q with g fixed to n + 1.
struct PublicKey {
  BigUint n;
  BigUint n_squared;
  BigUint g;
  std::size_t bits = 0;  // bit length of n
};

struct KeyPair {
  PublicKey pub;
  BigUint lambda;  // lcm(p - 1, q - 1)
  BigUint mu;      // lambda^-1 mod n
};

// An element of Z_{n^2}; at most 2 * bits wide.
struct Ciphertext {
  BigUint c;

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Two random bits/2-bit primes, n of exactly `bits` bits. bits must be even
// and >= 64. Throws kKeyGenFailure when no valid pair turns up in a bounded
// number of attempts.
KeyPair keygen(std::size_t bits, RandomSource& rng);

// Key pair from explicit distinct primes; no size requirement. Used for small
// worked examples.
KeyPair keypair_from_primes(const BigUint& p, const BigUint& q);

// g^m * r^n mod n^2 with r uniform in Z_n^*. Throws kMessageOutOfRange if m >= n.
Ciphertext encrypt(const BigUint& m, const PublicKey& key, RandomSource& rng);

// Same, with caller-chosen randomness r (gcd(r, n) must be 1).
Ciphertext encrypt_with(const BigUint& m, const BigUint& r, const PublicKey& key);

// L(c^lambda mod n^2) * mu mod n. Throws kInvalidCiphertext.
BigUint decrypt(const Ciphertext& c, const KeyPair& key);

// c1 * c2 mod n^2, an encryption of m1 + m2 mod n.
Ciphertext add(const Ciphertext& c1, const Ciphertext& c2, const PublicKey& key);

// The trivial encryption of 0 (c = 1), the identity for add().
inline Ciphertext zero() { return Ciphertext{BigUint(1)}; }

// Lowercase hex SHA-256 of the decimal form of n.
std::string fingerprint(const BigUint& n);

// Width of a fixed-size ciphertext cell: 2 * bits / 8 bytes.
inline std::size_t ciphertext_bytes(const PublicKey& key) { return (2 * key.bits + 7) / 8; }

}  // namespace s4::paillier

#include "s4/paillier.hpp"

#include <openssl/sha.h>

#include <array>
#include <cstdio>

#include "s4/error.hpp"
#include "s4/modmath.hpp"

namespace s4::paillier {

namespace {

constexpr int kKeyGenAttempts = 64;

PublicKey make_public(const BigUint& n) {
  PublicKey pub;
  pub.n = n;
  pub.n_squared = n * n;
  pub.g = n + 1;
  pub.bits = bit_length(n);
  return pub;
}

}  // namespace

KeyPair keypair_from_primes(const BigUint& p, const BigUint& q) {
  if (p == q) throw Error(ErrorKind::kInvalidArgument, "Paillier primes must differ");
  if (!is_probable_prime(p) || !is_probable_prime(q)) {
    throw Error(ErrorKind::kNotPrime, "Paillier factors must be prime");
  }
  const BigUint n = p * q;
  BigUint lambda;
  const BigUint p1 = p - 1, q1 = q - 1;
  mpz_lcm(lambda.get_mpz_t(), p1.get_mpz_t(), q1.get_mpz_t());
  BigUint g;
  mpz_gcd(g.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t());
  if (g != 1) throw Error(ErrorKind::kKeyGenFailure, "gcd(lambda, n) != 1");
  KeyPair key;
  key.pub = make_public(n);
  key.lambda = lambda;
  key.mu = mod_inv(lambda, n);
  return key;
}

KeyPair keygen(std::size_t bits, RandomSource& rng) {
  if (bits < 64 || bits % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument, "Paillier key size must be even and >= 64 bits");
  }
  for (int attempt = 0; attempt < kKeyGenAttempts; ++attempt) {
    const BigUint p = random_prime(bits / 2, rng);
    const BigUint q = random_prime(bits / 2, rng);
    if (p == q) continue;
    try {
      KeyPair key = keypair_from_primes(p, q);
      if (key.pub.bits == bits) return key;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kKeyGenFailure) throw;
    }
  }
  throw Error(ErrorKind::kKeyGenFailure, "no valid Paillier key after retries");
}

Ciphertext encrypt_with(const BigUint& m, const BigUint& r, const PublicKey& key) {
  if (m >= key.n || sgn(m) < 0) throw Error(ErrorKind::kMessageOutOfRange, "plaintext must lie in [0, n)");
  BigUint gcd;
  mpz_gcd(gcd.get_mpz_t(), r.get_mpz_t(), key.n.get_mpz_t());
  if (sgn(r) <= 0 || gcd != 1) throw Error(ErrorKind::kInvalidArgument, "r must be a unit mod n");
  // (n + 1)^m == 1 + m*n (mod n^2)
  BigUint gm = m * key.n + 1;
  BigUint rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), key.n.get_mpz_t(), key.n_squared.get_mpz_t());
  Ciphertext out;
  out.c = gm * rn;
  out.c %= key.n_squared;
  return out;
}

Ciphertext encrypt(const BigUint& m, const PublicKey& key, RandomSource& rng) {
  if (m >= key.n || sgn(m) < 0) throw Error(ErrorKind::kMessageOutOfRange, "plaintext must lie in [0, n)");
  BigUint r, gcd;
  do {
    r = rng.below(key.n);
    mpz_gcd(gcd.get_mpz_t(), r.get_mpz_t(), key.n.get_mpz_t());
  } while (sgn(r) == 0 || gcd != 1);
  return encrypt_with(m, r, key);
}

BigUint decrypt(const Ciphertext& c, const KeyPair& key) {
  const PublicKey& pub = key.pub;
  if (sgn(c.c) <= 0 || c.c >= pub.n_squared) {
    throw Error(ErrorKind::kInvalidCiphertext, "ciphertext must lie in (0, n^2)");
  }
  BigUint u;
  mpz_powm(u.get_mpz_t(), c.c.get_mpz_t(), key.lambda.get_mpz_t(), pub.n_squared.get_mpz_t());
  u -= 1;
  if (!mpz_divisible_p(u.get_mpz_t(), pub.n.get_mpz_t())) {
    throw Error(ErrorKind::kInvalidCiphertext, "c^lambda - 1 is not divisible by n");
  }
  mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), pub.n.get_mpz_t());
  BigUint m = u * key.mu;
  m %= pub.n;
  return m;
}

Ciphertext add(const Ciphertext& c1, const Ciphertext& c2, const PublicKey& key) {
  Ciphertext out;
  out.c = c1.c * c2.c;
  out.c %= key.n_squared;
  return out;
}

std::string fingerprint(const BigUint& n) {
  const std::string text = to_decimal(n);
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest.data());
  std::string hex;
  hex.reserve(2 * digest.size());
  char byte[3];
  for (unsigned char b : digest) {
    std::snprintf(byte, sizeof(byte), "%02x", b);
    hex += byte;
  }
  return hex;
}

}  // namespace s4::paillier

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "s4/modmath.hpp"
#include "s4/paillier.hpp"

namespace pl = s4::paillier;
using s4::BigUint;
using s4::ErrorKind;
using testing::kind_of;

namespace {

BigUint big(unsigned long v) { return BigUint(v); }

void check_invariants(const pl::KeyPair& key, std::size_t bits) {
  CHECK(s4::bit_length(key.pub.n) == bits);
  CHECK(key.pub.n >= (BigUint(1) << (bits - 1)));
  CHECK(key.pub.g == key.pub.n + 1);
  CHECK(key.pub.n_squared == key.pub.n * key.pub.n);
  BigUint g;
  mpz_gcd(g.get_mpz_t(), key.lambda.get_mpz_t(), key.pub.n.get_mpz_t());
  CHECK(g == 1);
  CHECK(BigUint(key.mu * key.lambda % key.pub.n) == 1);
}

}  // namespace

TEST_CASE("keygen invariants") {
  s4::DeterministicRandom rng(1);
  for (std::size_t bits : {64u, 128u, 256u}) check_invariants(pl::keygen(bits, rng), bits);
  CHECK(kind_of([&] { pl::keygen(63, rng); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { pl::keygen(62, rng); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { pl::keygen(65, rng); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("small-modulus worked case") {
  const pl::KeyPair key = pl::keypair_from_primes(big(5), big(7));
  CHECK(key.pub.n == 35);
  CHECK(key.lambda == 12);
  CHECK(key.mu == oracle::inverse(12, 35).value());
  // g^m r^n mod n^2 with g = 36, m = 2, r = 2, by repeated multiplication.
  const std::uint64_t c = oracle::mulmod(oracle::powmod(36, 2, 1225), oracle::powmod(2, 35, 1225), 1225);
  CHECK(pl::encrypt_with(big(2), big(2), key.pub).c == c);
  CHECK(pl::decrypt(pl::Ciphertext{big(c)}, key) == 2);
  for (std::uint64_t m = 0; m < 35; ++m) {
    for (std::uint64_t r : {1u, 2u, 3u, 4u, 6u, 34u}) {
      const std::uint64_t cm = oracle::mulmod(oracle::powmod(36, m, 1225), oracle::powmod(r, 35, 1225), 1225);
      CHECK(pl::decrypt(pl::Ciphertext{big(cm)}, key) == m);
    }
  }
  CHECK(pl::decrypt(pl::zero(), key) == 0);
  CHECK(kind_of([&] { pl::encrypt_with(big(2), big(5), key.pub); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { pl::encrypt_with(big(35), big(2), key.pub); }) == ErrorKind::kMessageOutOfRange);
}

TEST_CASE("decrypt rejects invalid ciphertexts") {
  const pl::KeyPair key = pl::keypair_from_primes(big(5), big(7));
  CHECK(kind_of([&] { pl::decrypt(pl::Ciphertext{big(0)}, key); }) == ErrorKind::kInvalidCiphertext);
  CHECK(kind_of([&] { pl::decrypt(pl::Ciphertext{big(1225)}, key); }) == ErrorKind::kInvalidCiphertext);
  // 5 shares a factor with n: c^lambda - 1 is never a multiple of n.
  CHECK(kind_of([&] { pl::decrypt(pl::Ciphertext{big(5)}, key); }) == ErrorKind::kInvalidCiphertext);
  int rejected = 0;
  for (std::uint64_t c = 1; c < 1225; ++c) {
    try {
      pl::decrypt(pl::Ciphertext{big(c)}, key);
    } catch (const s4::Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidCiphertext);
      ++rejected;
    }
  }
  // Only the 35 * phi(35) = 840 elements of Z*_{1225} are valid ciphertexts.
  CHECK(rejected == 1224 - 840);
}

TEST_CASE("round trip") {
  s4::DeterministicRandom rng(2);
  for (std::size_t bits : {64u, 128u, 256u}) {
    const pl::KeyPair key = pl::keygen(bits, rng);
    CHECK(pl::decrypt(pl::encrypt(big(0), key.pub, rng), key) == 0);
    CHECK(pl::decrypt(pl::encrypt(key.pub.n - 1, key.pub, rng), key) == key.pub.n - 1);
    for (int i = 0; i < 100; ++i) {
      const BigUint m = rng.below(key.pub.n);
      const pl::Ciphertext c = pl::encrypt(m, key.pub, rng);
      CHECK(c.c > 0);
      CHECK(c.c < key.pub.n_squared);
      CHECK(s4::bit_length(c.c) <= 2 * bits);
      CHECK(pl::decrypt(c, key) == m);
    }
    CHECK(kind_of([&] { pl::encrypt(key.pub.n, key.pub, rng); }) == ErrorKind::kMessageOutOfRange);
  }
}

TEST_CASE("encryption is randomized") {
  s4::SecureRandom rng;
  const pl::KeyPair key = pl::keygen(128, rng);
  for (int i = 0; i < 100; ++i) {
    const BigUint m = rng.below(key.pub.n);
    CHECK_FALSE(pl::encrypt(m, key.pub, rng) == pl::encrypt(m, key.pub, rng));
  }
}

TEST_CASE("homomorphic addition") {
  s4::DeterministicRandom rng(3);
  const pl::KeyPair key = pl::keygen(128, rng);
  const auto sum = pl::add(pl::encrypt(big(3), key.pub, rng), pl::encrypt(big(4), key.pub, rng), key.pub);
  CHECK(pl::decrypt(sum, key) == 7);

  const pl::Ciphertext c = pl::encrypt(big(123456), key.pub, rng);
  CHECK(pl::decrypt(pl::add(c, pl::encrypt(big(0), key.pub, rng), key.pub), key) == 123456);
  CHECK(pl::add(c, pl::zero(), key.pub) == c);

  // Sum of two values wraps mod n.
  const BigUint near = key.pub.n - 2;
  CHECK(pl::decrypt(pl::add(pl::encrypt(near, key.pub, rng), pl::encrypt(big(5), key.pub, rng), key.pub), key) == 3);

  pl::Ciphertext acc = pl::zero();
  BigUint plain = 0;
  for (int i = 0; i < 1000; ++i) {
    const BigUint m = rng.below(key.pub.n);
    plain += m;
    acc = pl::add(acc, pl::encrypt(m, key.pub, rng), key.pub);
  }
  CHECK(pl::decrypt(acc, key) == BigUint(plain % key.pub.n));
}

TEST_CASE("full-size keys give 2048-bit ciphertexts") {
  s4::SecureRandom rng;
  const pl::KeyPair key = pl::keygen(1024, rng);
  check_invariants(key, 1024);
  CHECK(pl::ciphertext_bytes(key.pub) == 256);
  for (int i = 0; i < 10; ++i) {
    const BigUint m = rng.below(key.pub.n);
    const pl::Ciphertext c = pl::encrypt(m, key.pub, rng);
    CHECK(s4::bit_length(c.c) <= 2048);
    CHECK(pl::decrypt(c, key) == m);
  }
}

TEST_CASE("fingerprint") {
  // sha256("35")
  CHECK(pl::fingerprint(big(35)) == "9f14025af0065b30e47e23ebb3b491d39ae8ed17d33739e5ff3827ffb3634953");
  CHECK(pl::fingerprint(big(35)) != pl::fingerprint(big(33)));
}

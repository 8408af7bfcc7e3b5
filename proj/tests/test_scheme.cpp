#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "s4/scheme.hpp"

using s4::BigUint;
using s4::ErrorKind;
using s4::FieldPoint;
using s4::PrivateKey;
using s4::Secret;
using s4::SplitVector;
using testing::kind_of;

namespace {

BigUint big(unsigned long v) { return BigUint(v); }

PrivateKey line_key() { return PrivateKey::from_parts(big(31), {big(2)}, {big(1), big(16)}); }
PrivateKey quad_key() { return PrivateKey::from_parts(big(31), {big(2), big(3)}, {big(1), big(16)}); }

std::vector<BigUint> component_sum(const std::vector<SplitVector>& rows, const BigUint& p, std::size_t width) {
  std::vector<BigUint> out(width, 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < width; ++i) out[i] = (out[i] + row.splits[i]) % p;
  }
  return out;
}

}  // namespace

TEST_CASE("keygen produces keys satisfying every invariant") {
  s4::DeterministicRandom rng(1);
  for (std::size_t k : {2u, 3u, 8u, 29u}) {
    const PrivateKey key = s4::keygen(k, big(31), rng);
    CHECK(key.k() == k);
    CHECK(key.xs().size() == k - 1);
    CHECK(key.basis0().size() == k);
    std::set<BigUint> seen;
    for (const auto& x : key.xs()) {
      CHECK(x > 0);
      CHECK(x < 31);
      seen.insert(x);
    }
    CHECK(key.anchor().x > 0);
    CHECK(key.anchor().x < 31);
    CHECK(key.anchor().y < 31);
    seen.insert(key.anchor().x);
    CHECK(seen.size() == k);
  }
  const BigUint wide = s4::next_prime(BigUint(1) << 200);
  const PrivateKey key = s4::keygen(16, wide, rng);
  CHECK(key.p() == wide);
}

TEST_CASE("keygen errors") {
  s4::SecureRandom rng;
  CHECK(kind_of([&] { s4::keygen(1, big(31), rng); }) == ErrorKind::kInvalidThreshold);
  CHECK(kind_of([&] { s4::keygen(0, big(31), rng); }) == ErrorKind::kInvalidThreshold);
  CHECK(kind_of([&] { s4::keygen(30, big(31), rng); }) == ErrorKind::kFieldTooSmall);
  CHECK(kind_of([&] { s4::keygen(2, big(3), rng); }) == ErrorKind::kFieldTooSmall);
  CHECK(kind_of([&] { s4::keygen(3, big(33), rng); }) == ErrorKind::kNotPrime);
  // k = p - 2 leaves exactly enough nonzero nodes.
  CHECK(s4::keygen(29, big(31), rng).k() == 29);
}

TEST_CASE("from_parts validates the key") {
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {}, {big(1), big(16)}); }) == ErrorKind::kInvalidThreshold);
  CHECK(kind_of([] { PrivateKey::from_parts(big(32), {big(2)}, {big(1), big(16)}); }) == ErrorKind::kNotPrime);
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {big(0)}, {big(1), big(16)}); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {big(2)}, {big(0), big(16)}); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {big(2), big(2)}, {big(1), big(16)}); }) ==
        ErrorKind::kDuplicateNode);
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {big(1)}, {big(1), big(16)}); }) == ErrorKind::kDuplicateNode);
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {big(40)}, {big(1), big(16)}); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { PrivateKey::from_parts(big(31), {big(2)}, {big(1), big(31)}); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("basis0 over the worked key") {
  CHECK(line_key().basis0() == std::vector<BigUint>{big(30), big(2)});
  // Nodes {2, 3, 1} at 0: l = (-3, 1, 3) mod 31.
  const auto expected = s4::lagrange_basis_at(std::vector<BigUint>{big(2), big(3), big(1)}, big(0), big(31));
  CHECK(quad_key().basis0() == expected);
  CHECK(expected == std::vector<BigUint>{big(28), big(1), big(3)});
}

TEST_CASE("basis0 depends only on the nodes") {
  s4::DeterministicRandom rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const BigUint p = s4::next_prime(rng.below(BigUint(1) << 64) + 64);
    const PrivateKey key = s4::keygen(2 + rng.below_u64(20), p, rng);
    std::vector<BigUint> nodes = key.xs();
    nodes.push_back(key.anchor().x);
    CHECK(key.basis0() == s4::lagrange_basis_at(nodes, big(0), p));
    const PrivateKey other_anchor = PrivateKey::from_parts(p, key.xs(), {key.anchor().x, rng.below(p)});
    CHECK(other_anchor.basis0() == key.basis0());
    for (int i = 0; i < 5; ++i) s4::split(Secret{rng.below(p)}, key, rng);
    CHECK(key.basis0() == s4::lagrange_basis_at(nodes, big(0), p));
  }
}

TEST_CASE("split worked examples") {
  s4::SecureRandom rng;
  CHECK(s4::split(Secret{big(7)}, line_key(), rng) == SplitVector{{big(25)}});
  CHECK(s4::split_at_nodes(Secret{big(7)}, line_key(), {}) == SplitVector{{big(25)}});
  const std::vector<FieldPoint> forced{{big(8), big(15)}};
  const SplitVector splits = s4::split_at_nodes(Secret{big(7)}, quad_key(), forced);
  // Oracle: the unique quadratic through (0,7), (1,16), (8,15) by exhaustive search.
  const auto coeffs = oracle::solve_coefficients({{0, 7}, {1, 16}, {8, 15}}, 31);
  REQUIRE(coeffs == std::vector<std::uint64_t>{7, 19, 21});
  CHECK(splits.splits[0] == oracle::eval_poly(coeffs, 2, 31));
  CHECK(splits.splits[1] == oracle::eval_poly(coeffs, 3, 31));
  CHECK(splits == SplitVector{{big(5), big(5)}});
}

TEST_CASE("split errors") {
  s4::SecureRandom rng;
  CHECK(kind_of([&] { s4::split(Secret{big(31)}, line_key(), rng); }) == ErrorKind::kSecretOutOfRange);
  CHECK(kind_of([&] { s4::split_at_nodes(Secret{big(7)}, quad_key(), {}); }) == ErrorKind::kLengthMismatch);
  const std::vector<FieldPoint> on_anchor{{big(1), big(15)}};
  CHECK(kind_of([&] { s4::split_at_nodes(Secret{big(7)}, quad_key(), on_anchor); }) == ErrorKind::kInvalidArgument);
  const std::vector<FieldPoint> on_zero{{big(0), big(15)}};
  CHECK(kind_of([&] { s4::split_at_nodes(Secret{big(7)}, quad_key(), on_zero); }) == ErrorKind::kInvalidArgument);
  const PrivateKey k4 = PrivateKey::from_parts(big(31), {big(2), big(3), big(4)}, {big(1), big(16)});
  const std::vector<FieldPoint> repeated{{big(8), big(15)}, {big(8), big(3)}};
  CHECK(kind_of([&] { s4::split_at_nodes(Secret{big(7)}, k4, repeated); }) == ErrorKind::kDuplicateNode);
  // Random nodes may share abscissae with X.
  const std::vector<FieldPoint> on_x{{big(2), big(15)}, {big(8), big(3)}};
  CHECK(s4::reconstruct(s4::split_at_nodes(Secret{big(7)}, k4, on_x), k4) == Secret{big(7)});
  CHECK(s4::split_at_nodes(Secret{big(7)}, k4, on_x).splits[0] == 15);
}

TEST_CASE("reconstruct worked examples and errors") {
  CHECK(s4::reconstruct(SplitVector{{big(5), big(5)}}, quad_key()) == Secret{big(7)});
  CHECK(s4::reconstruct(SplitVector{{big(25)}}, line_key()) == Secret{big(7)});
  CHECK(kind_of([] { s4::reconstruct(SplitVector{{big(5)}}, quad_key()); }) == ErrorKind::kLengthMismatch);
  CHECK(kind_of([] { s4::reconstruct(SplitVector{{big(5), big(31)}}, quad_key()); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("draw_split_nodes respects the node constraints") {
  s4::DeterministicRandom rng(3);
  const PrivateKey key = s4::keygen(9, big(13), rng);
  for (int trial = 0; trial < 500; ++trial) {
    const auto nodes = s4::draw_split_nodes(key, rng);
    REQUIRE(nodes.size() == 7);
    std::set<BigUint> xs;
    for (const auto& node : nodes) {
      CHECK(node.x != 0);
      CHECK(node.x != key.anchor().x);
      CHECK(node.x < 13);
      CHECK(node.y < 13);
      xs.insert(node.x);
    }
    CHECK(xs.size() == nodes.size());
  }
  // The largest k for p = 5: three random abscissae out of {1..4} minus x_k.
  const PrivateKey tight = s4::keygen(3, big(5), rng);
  CHECK(s4::draw_split_nodes(tight, rng).size() == 1);
}

TEST_CASE("round trip over random secrets") {
  s4::DeterministicRandom rng(4);
  const BigUint p = s4::next_prime(BigUint(10000000000ul));
  for (std::size_t k : {2u, 8u, 16u}) {
    const PrivateKey key = s4::keygen(k, p, rng);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
      const Secret v{rng.below(p)};
      const SplitVector s = s4::split(v, key, rng);
      if (s.splits.size() != k - 1 || !(s4::reconstruct(s, key) == v)) ++mismatches;
    }
    CHECK_MESSAGE(mismatches == 0, "k=" << k);
  }
  SUBCASE("edge secrets and a zero anchor value") {
    const PrivateKey key = PrivateKey::from_parts(p, {big(5), big(6), big(7)}, {big(9), big(0)});
    for (const BigUint& v : {BigUint(0), BigUint(p - 1)}) CHECK(s4::reconstruct(s4::split(Secret{v}, key, rng), key).value == v);
  }
  SUBCASE("multi-word prime") {
    const BigUint wide = s4::next_prime(BigUint(1) << 300);
    const PrivateKey key = s4::keygen(8, wide, rng);
    for (int i = 0; i < 200; ++i) {
      const Secret v{rng.below(wide)};
      CHECK(s4::reconstruct(s4::split(v, key, rng), key) == v);
    }
  }
}

TEST_CASE("split is consistent with its discarded nodes") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    s4::DeterministicRandom rng(seed);
    const BigUint p = s4::next_prime(big(1000000));
    const PrivateKey key = s4::keygen(2 + seed % 12, p, rng);
    const Secret v{rng.below(p)};

    s4::DeterministicRandom a(seed * 7 + 1), b(seed * 7 + 1);
    const auto nodes = s4::draw_split_nodes(key, a);
    const SplitVector via_nodes = s4::split_at_nodes(v, key, nodes);
    CHECK(s4::split(v, key, b) == via_nodes);

    std::vector<FieldPoint> through;
    for (std::size_t i = 0; i < key.xs().size(); ++i) through.push_back({key.xs()[i], via_nodes.splits[i]});
    through.push_back(key.anchor());
    for (const auto& node : nodes) CHECK(s4::lagrange_eval(through, node.x, p) == node.y);
    CHECK(s4::lagrange_eval(through, big(0), p) == v.value);
  }
}

TEST_CASE("fresh nodes per secret") {
  s4::DeterministicRandom rng(5);
  const PrivateKey key = s4::keygen(8, s4::next_prime(BigUint(1) << 61), rng);
  const Secret v{big(4242)};
  CHECK_FALSE(s4::split(v, key, rng) == s4::split(v, key, rng));
}

TEST_CASE("finalize_sum") {
  const PrivateKey key = line_key();
  s4::SecureRandom rng;
  CHECK(s4::finalize_sum(s4::AggregateResponse{{big(0)}, 0}, key) == Secret{big(0)});
  CHECK(s4::finalize_sum(s4::AggregateResponse{{big(0), big(0)}, 0}, quad_key()) == Secret{big(0)});
  const SplitVector a = s4::split(Secret{big(7)}, key, rng);
  const SplitVector b = s4::split(Secret{big(10)}, key, rng);
  CHECK(a == SplitVector{{big(25)}});
  CHECK(b == SplitVector{{big(22)}});
  CHECK(s4::finalize_sum(s4::AggregateResponse{{big(16)}, 2}, key) == Secret{big(17)});
  CHECK(kind_of([&] { s4::finalize_sum(s4::AggregateResponse{{big(16), big(1)}, 2}, key); }) ==
        ErrorKind::kLengthMismatch);

  SUBCASE("random subsets of 1000 secrets match the plaintext oracle") {
    s4::DeterministicRandom drng(6);
    const BigUint p = s4::next_prime(BigUint(10000000ul));
    const PrivateKey big_key = s4::keygen(8, p, drng);
    std::vector<std::uint64_t> plain;
    std::vector<SplitVector> rows;
    for (int i = 0; i < 1000; ++i) {
      plain.push_back(drng.below_u64(10000));
      rows.push_back(s4::split(Secret{big(plain.back())}, big_key, drng));
    }
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<SplitVector> chosen;
      std::uint64_t expected = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (drng.below_u64(3) == 0) {
          chosen.push_back(rows[i]);
          expected += plain[i];
        }
      }
      const s4::AggregateResponse response{component_sum(chosen, p, 7), chosen.size()};
      CHECK(s4::finalize_sum(response, big_key).value == expected);
    }
  }
}

TEST_CASE("additive homomorphism over multisets") {
  s4::DeterministicRandom rng(7);
  const BigUint p = s4::next_prime(BigUint(1) << 40);
  for (std::size_t k : {2u, 3u, 16u}) {
    const PrivateKey key = s4::keygen(k, p, rng);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<SplitVector> rows;
      BigUint total = 0;
      const std::uint64_t base = rng.below_u64(1u << 20);
      const std::size_t n = rng.below_u64(40);
      for (std::size_t i = 0; i < n; ++i) {
        // Repeats exercise the multiset case.
        const BigUint v = i % 3 == 0 ? big(base) : rng.below(BigUint(1) << 20);
        total += v;
        rows.push_back(s4::split(Secret{v}, key, rng));
      }
      const s4::AggregateResponse response{component_sum(rows, p, k - 1), n};
      CHECK(s4::finalize_sum(response, key).value == total);
    }
  }
}

TEST_CASE("one corrupted point leaves the secret uniformly undetermined") {
  const BigUint p = 101;
  s4::DeterministicRandom rng(8);
  const PrivateKey key = s4::keygen(3, p, rng);
  const int trials = 100000;
  int matches = 0;
  std::vector<int> histogram(101, 0);
  for (int t = 0; t < trials; ++t) {
    const Secret v{rng.below(p)};
    SplitVector s = s4::split(v, key, rng);
    s.splits[rng.below_u64(s.splits.size())] = rng.below(p);
    const Secret guess = s4::reconstruct(s, key);
    ++histogram[BigUint((guess.value - v.value + p) % p).get_ui()];
    if (guess == v) ++matches;
  }
  const double expected = trials / 101.0;
  const double sigma = std::sqrt(trials * (1.0 / 101) * (1 - 1.0 / 101));
  CHECK(std::abs(matches - expected) <= 3 * sigma);
  double chi2 = 0;
  for (int c : histogram) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 149.45);  // 100 dof, p = 0.001
}

TEST_CASE("key file round trip") {
  testing::TempDir dir;
  s4::DeterministicRandom rng(9);
  const PrivateKey key = s4::keygen(5, s4::next_prime(BigUint(1) << 90), rng);
  const std::string text = s4::format_key(key);
  CHECK(text.rfind("s4-key/1\n", 0) == 0);
  CHECK(text.find("x4=") != std::string::npos);
  CHECK(text.find("anchor_v=") != std::string::npos);
  const PrivateKey parsed = s4::parse_key(text);
  CHECK(parsed == key);
  CHECK(parsed.basis0() == key.basis0());

  const auto path = dir / "client.key";
  s4::write_key_file(key, path);
  CHECK(s4::read_key_file(path) == key);
  const auto perms = std::filesystem::status(path).permissions();
  CHECK((perms & std::filesystem::perms::all) == (std::filesystem::perms::owner_read | std::filesystem::perms::owner_write));

  CHECK(kind_of([&] { s4::write_key_file(key, path); }) == ErrorKind::kIo);
  const PrivateKey other = s4::keygen(3, big(31), rng);
  s4::write_key_file(other, path, true);
  CHECK(s4::read_key_file(path) == other);
  CHECK(kind_of([&] { s4::read_key_file(dir / "missing.key"); }) == ErrorKind::kIo);
}

TEST_CASE("key file parse errors") {
  const std::string good = s4::format_key(quad_key());
  CHECK(s4::parse_key(good) == quad_key());
  auto without = [&](const std::string& field) {
    std::istringstream in(good);
    std::string line, out;
    while (std::getline(in, line)) {
      if (line.rfind(field + "=", 0) != 0) out += line + "\n";
    }
    return out;
  };
  CHECK(kind_of([&] { s4::parse_key(""); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { s4::parse_key("s4-key/2\n" + good.substr(9)); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { s4::parse_key(without("anchor_v")); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { s4::parse_key(without("x2")); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { s4::parse_key(good + "x3=4\n"); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { s4::parse_key(good + "p=31\n"); }) == ErrorKind::kFormat);
  CHECK(kind_of([&] { s4::parse_key(without("p") + "p=abc\n"); }) == ErrorKind::kMalformed);
  CHECK(kind_of([&] { s4::parse_key(without("x1") + "x1=3\n"); }) == ErrorKind::kDuplicateNode);
}

#include "s4/scheme.hpp"

#include <algorithm>
#include <utility>

#include "s4/error.hpp"

namespace s4 {

namespace {

bool contains(const std::vector<BigUint>& values, const BigUint& x) {
  return std::find(values.begin(), values.end(), x) != values.end();
}

// Uniform nonzero element of F_p outside `taken`.
BigUint draw_fresh_nonzero(const BigUint& p, const std::vector<BigUint>& taken, RandomSource& rng) {
  const BigUint span = p - 1;
  for (;;) {
    BigUint x = rng.below(span) + 1;
    if (!contains(taken, x)) return x;
  }
}

}  // namespace

PrivateKey PrivateKey::from_parts(BigUint p, std::vector<BigUint> xs, FieldPoint anchor) {
  const std::size_t k = xs.size() + 1;
  if (k < 2) throw Error(ErrorKind::kInvalidThreshold, "k must be >= 2");
  if (p <= BigUint(static_cast<unsigned long>(k + 1))) {
    throw Error(ErrorKind::kFieldTooSmall, "p must exceed k + 1");
  }
  if (!is_probable_prime(p)) throw Error(ErrorKind::kNotPrime, to_decimal(p) + " is not prime");
  if (anchor.x >= p || anchor.y >= p) {
    throw Error(ErrorKind::kInvalidArgument, "anchor coordinates must be < p");
  }
  if (sgn(anchor.x) == 0) throw Error(ErrorKind::kInvalidArgument, "anchor.x must be nonzero");
  for (const auto& x : xs) {
    if (x >= p || sgn(x) == 0) {
      throw Error(ErrorKind::kInvalidArgument, "evaluation points must lie in [1, p)");
    }
    if (x == anchor.x) throw Error(ErrorKind::kDuplicateNode, "evaluation point equals anchor.x");
  }

  PrivateKey key;
  std::vector<BigUint> nodes = xs;
  nodes.push_back(anchor.x);
  key.basis0_ = Interpolator(std::move(nodes), p).basis_at(BigUint(0));
  key.p_ = std::move(p);
  key.xs_ = std::move(xs);
  key.anchor_ = std::move(anchor);
  return key;
}

PrivateKey keygen(std::size_t k, const BigUint& p, RandomSource& rng) {
  if (k < 2) throw Error(ErrorKind::kInvalidThreshold, "k must be >= 2");
  if (p <= BigUint(static_cast<unsigned long>(k + 1))) {
    throw Error(ErrorKind::kFieldTooSmall, "p must exceed k + 1");
  }
  if (!is_probable_prime(p)) throw Error(ErrorKind::kNotPrime, to_decimal(p) + " is not prime");

  std::vector<BigUint> taken;
  taken.reserve(k);
  FieldPoint anchor;
  anchor.x = draw_fresh_nonzero(p, taken, rng);
  taken.push_back(anchor.x);
  std::vector<BigUint> xs;
  xs.reserve(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    xs.push_back(draw_fresh_nonzero(p, taken, rng));
    taken.push_back(xs.back());
  }
  anchor.y = rng.below(p);
  return PrivateKey::from_parts(p, std::move(xs), std::move(anchor));
}

std::vector<FieldPoint> draw_split_nodes(const PrivateKey& key, RandomSource& rng) {
  const std::size_t count = key.k() - 2;
  std::vector<BigUint> taken{key.anchor().x};
  taken.reserve(count + 1);
  std::vector<FieldPoint> nodes;
  nodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    BigUint a = draw_fresh_nonzero(key.p(), taken, rng);
    taken.push_back(a);
    nodes.push_back({std::move(a), rng.below(key.p())});
  }
  return nodes;
}

SplitVector split_at_nodes(const Secret& v, const PrivateKey& key,
                           std::span<const FieldPoint> random_nodes) {
  const BigUint& p = key.p();
  if (v.value >= p || sgn(v.value) < 0) {
    throw Error(ErrorKind::kSecretOutOfRange, "secret must lie in [0, p)");
  }
  if (random_nodes.size() != key.k() - 2) {
    throw Error(ErrorKind::kLengthMismatch, "expected k-2 random nodes");
  }
  std::vector<BigUint> xs{BigUint(0), key.anchor().x};
  std::vector<BigUint> ys{v.value, key.anchor().y};
  xs.reserve(key.k());
  ys.reserve(key.k());
  for (const auto& node : random_nodes) {
    if (node.x >= p || node.y >= p || sgn(node.x) == 0 || node.x == key.anchor().x) {
      throw Error(ErrorKind::kInvalidArgument, "random node outside F_p \\ {0, x_k}");
    }
    xs.push_back(node.x);
    ys.push_back(node.y);
  }
  // Duplicate a_i surface as kDuplicateNode from the interpolator.
  Interpolator polynomial(std::move(xs), p);
  return SplitVector{polynomial.eval_many(ys, key.xs())};
}

SplitVector split(const Secret& v, const PrivateKey& key, RandomSource& rng) {
  if (v.value >= key.p()) throw Error(ErrorKind::kSecretOutOfRange, "secret must lie in [0, p)");
  const std::vector<FieldPoint> nodes = draw_split_nodes(key, rng);
  return split_at_nodes(v, key, nodes);
}

namespace {

Secret combine_with_basis(const std::vector<BigUint>& ys, const BigUint& anchor_y,
                          const PrivateKey& key) {
  if (ys.size() != key.k() - 1) {
    throw Error(ErrorKind::kLengthMismatch,
                "expected " + std::to_string(key.k() - 1) + " values, got " + std::to_string(ys.size()));
  }
  const auto& basis = key.basis0();
  BigUint sum = anchor_y * basis.back();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] >= key.p()) throw Error(ErrorKind::kInvalidArgument, "split value must be < p");
    mpz_addmul(sum.get_mpz_t(), ys[i].get_mpz_t(), basis[i].get_mpz_t());
  }
  Secret out;
  mpz_fdiv_r(out.value.get_mpz_t(), sum.get_mpz_t(), key.p().get_mpz_t());
  return out;
}

}  // namespace

Secret reconstruct(const SplitVector& splits, const PrivateKey& key) {
  return combine_with_basis(splits.splits, key.anchor().y, key);
}

Secret finalize_sum(const AggregateResponse& response, const PrivateKey& key) {
  BigUint anchor_total = key.anchor().y;
  anchor_total *= static_cast<unsigned long>(response.count);
  anchor_total %= key.p();
  return combine_with_basis(response.sums, anchor_total, key);
}

}  // namespace s4

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s4/aggregate.hpp"
#include "s4/bigint.hpp"
#include "s4/modmath.hpp"
#include "s4/random.hpp"

namespace s4 {

struct Secret {
  BigUint value;

  friend bool operator==(const Secret&, const Secret&) = default;
};

// The k-1 splits of one secret, in the order of the key's evaluation points.
struct SplitVector {
  std::vector<BigUint> splits;

  friend bool operator==(const SplitVector&, const SplitVector&) = default;
};

// The secret material: evaluation points X = {x_1..x_{k-1}} and the anchor
// (x_k, v_k) shared by every secret, over the prime field F_p. Immutable; the
// Lagrange basis at 0 over X + {x_k} is computed once on construction.
class PrivateKey {
 public:
  // Validates all key invariants: p prime, k >= 2, X and anchor.x nonzero and
  // pairwise distinct, every coordinate < p.
  static PrivateKey from_parts(BigUint p, std::vector<BigUint> xs, FieldPoint anchor);

  const BigUint& p() const { return p_; }
  std::size_t k() const { return xs_.size() + 1; }
  const std::vector<BigUint>& xs() const { return xs_; }
  const FieldPoint& anchor() const { return anchor_; }
  // [l_1(0) .. l_{k-1}(0), l_k(0)]; the last entry belongs to the anchor.
  const std::vector<BigUint>& basis0() const { return basis0_; }

  friend bool operator==(const PrivateKey& a, const PrivateKey& b) {
    return a.p_ == b.p_ && a.xs_ == b.xs_ && a.anchor_ == b.anchor_;
  }

 private:
  PrivateKey() = default;

  BigUint p_;
  std::vector<BigUint> xs_;
  FieldPoint anchor_;
  std::vector<BigUint> basis0_;
};

// Draws anchor.x, X and anchor.v uniformly subject to the key invariants.
// Errors: kInvalidThreshold (k < 2), kFieldTooSmall (p <= k + 1), kNotPrime.
PrivateKey keygen(std::size_t k, const BigUint& p, RandomSource& rng);

// The k-2 throwaway interpolation nodes (a_i, b_i) for one secret: a_i drawn
// pairwise distinct and outside {0, x_k}, b_i uniform. Nodes may land on X.
std::vector<FieldPoint> draw_split_nodes(const PrivateKey& key, RandomSource& rng);

// Evaluates the polynomial through (0, v), (x_k, v_k) and the given random
// nodes at every x_i in X.
SplitVector split_at_nodes(const Secret& v, const PrivateKey& key,
                           std::span<const FieldPoint> random_nodes);

// split_at_nodes with fresh nodes from draw_split_nodes; the nodes are discarded.
SplitVector split(const Secret& v, const PrivateKey& key, RandomSource& rng);

// P(0) from the k-1 splits and the anchor, through the cached basis.
Secret reconstruct(const SplitVector& splits, const PrivateKey& key);

// Constant term of the polynomial through (x_i, SUM_i) and (x_k, q * v_k).
Secret finalize_sum(const AggregateResponse& response, const PrivateKey& key);

// Key file: "s4-key/1" followed by p, k, x1..x{k-1}, anchor_x, anchor_v as
// decimal name=value lines. basis0 is recomputed on load.
std::string format_key(const PrivateKey& key);
PrivateKey parse_key(std::string_view text);

// Writes with owner-only permissions. Refuses to replace an existing file
// unless overwrite is set.
void write_key_file(const PrivateKey& key, const std::filesystem::path& path, bool overwrite = false);
PrivateKey read_key_file(const std::filesystem::path& path);

}  // namespace s4

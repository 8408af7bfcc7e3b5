#pragma once

#include <span>
#include <vector>

#include "s4/bigint.hpp"
#include "s4/csp_store.hpp"

// Known-plaintext attack by a curious CSP. Every stored secret satisfies
//   v_j = sum_i v_{i,j} * l_i(0) + v_k * l_k(0)   (mod p)
// with the same coefficients for all rows, so k rows with known secrets pin
// down the k unknowns (l_1(0)..l_{k-1}(0), c = v_k * l_k(0)) and with them
// every other secret in the table.
namespace s4::attack {

struct KnownPair {
  BigUint secret;
  std::vector<BigUint> splits;
};

struct RecoveredBasis {
  std::vector<BigUint> lambdas;  // l_i(0), i = 1..k-1
  BigUint c;                     // v_k * l_k(0) mod p

  friend bool operator==(const RecoveredBasis&, const RecoveredBasis&) = default;
};

// Picks k pairs whose rows [splits..., 1] are linearly independent, solves
// for (lambdas, c), then checks the solution against every supplied pair.
// Errors: kInsufficientPairs (< k pairs, where k = splits + 1),
// kWidthMismatch, kSingularSystem (no independent k-subset),
// kInconsistent (some pair does not fit, e.g. pairs from different keys).
RecoveredBasis recover_basis(std::span<const KnownPair> pairs, const BigUint& p);

// sum_i splits_i * lambda_i + c mod p for each row. Throws kWidthMismatch.
std::vector<BigUint> recover_secrets(const RecoveredBasis& basis, std::span<const csp::SplitRecord> rows,
                                     const BigUint& p);

}  // namespace s4::attack

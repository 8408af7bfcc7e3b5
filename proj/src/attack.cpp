#include "s4/attack.hpp"

#include "s4/error.hpp"
#include "s4/modmath.hpp"

namespace s4::attack {

namespace {

BigUint apply(const RecoveredBasis& basis, const std::vector<BigUint>& splits, const BigUint& p) {
  BigUint sum = basis.c;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    mpz_addmul(sum.get_mpz_t(), splits[i].get_mpz_t(), basis.lambdas[i].get_mpz_t());
  }
  BigUint out;
  mpz_fdiv_r(out.get_mpz_t(), sum.get_mpz_t(), p.get_mpz_t());
  return out;
}

// Incremental row echelon form over F_p, used to pick an independent subset.
class EchelonBasis {
 public:
  EchelonBasis(std::size_t dim, const BigUint& p) : dim_(dim), p_(p) {}

  // Adds row if it is independent of those already held.
  bool try_add(std::vector<BigUint> row) {
    for (const auto& [pivot, basis_row] : rows_) {
      if (sgn(row[pivot]) == 0) continue;
      const BigUint factor = row[pivot];
      for (std::size_t c = 0; c < dim_; ++c) {
        row[c] = row[c] - factor * basis_row[c];
        mpz_fdiv_r(row[c].get_mpz_t(), row[c].get_mpz_t(), p_.get_mpz_t());
      }
    }
    std::size_t pivot = 0;
    while (pivot < dim_ && sgn(row[pivot]) == 0) ++pivot;
    if (pivot == dim_) return false;
    const BigUint inv = mod_inv(row[pivot], p_);
    for (auto& entry : row) {
      entry *= inv;
      entry %= p_;
    }
    rows_.emplace_back(pivot, std::move(row));
    return true;
  }

  std::size_t rank() const { return rows_.size(); }

 private:
  std::size_t dim_;
  const BigUint& p_;
  std::vector<std::pair<std::size_t, std::vector<BigUint>>> rows_;
};

}  // namespace

RecoveredBasis recover_basis(std::span<const KnownPair> pairs, const BigUint& p) {
  if (pairs.empty()) throw Error(ErrorKind::kInsufficientPairs, "no known pairs");
  const std::size_t width = pairs.front().splits.size();
  const std::size_t k = width + 1;
  for (const auto& pair : pairs) {
    if (pair.splits.size() != width) throw Error(ErrorKind::kWidthMismatch, "known pairs differ in width");
  }
  if (pairs.size() < k) {
    throw Error(ErrorKind::kInsufficientPairs,
                "need " + std::to_string(k) + " known pairs, got " + std::to_string(pairs.size()));
  }

  Matrix system;
  std::vector<BigUint> rhs;
  EchelonBasis echelon(k, p);
  for (const auto& pair : pairs) {
    std::vector<BigUint> row;
    row.reserve(k);
    for (const auto& s : pair.splits) row.push_back(s % p);
    row.push_back(BigUint(1));
    if (echelon.try_add(row)) {
      system.push_back(std::move(row));
      rhs.push_back(pair.secret % p);
      if (system.size() == k) break;
    }
  }
  if (system.size() < k) {
    throw Error(ErrorKind::kSingularSystem, "known pairs span only rank " + std::to_string(echelon.rank()) +
                                                " of " + std::to_string(k));
  }

  std::vector<BigUint> solution = gauss_solve(std::move(system), std::move(rhs), p);
  RecoveredBasis basis;
  basis.c = solution.back();
  solution.pop_back();
  basis.lambdas = std::move(solution);

  for (const auto& pair : pairs) {
    if (apply(basis, pair.splits, p) != pair.secret % p) {
      throw Error(ErrorKind::kInconsistent, "recovered basis does not explain every known pair");
    }
  }
  return basis;
}

std::vector<BigUint> recover_secrets(const RecoveredBasis& basis, std::span<const csp::SplitRecord> rows,
                                     const BigUint& p) {
  std::vector<BigUint> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.splits.size() != basis.lambdas.size()) {
      throw Error(ErrorKind::kWidthMismatch, "row " + std::to_string(row.id) + " width differs from basis");
    }
    out.push_back(apply(basis, row.splits, p));
  }
  return out;
}

}  // namespace s4::attack

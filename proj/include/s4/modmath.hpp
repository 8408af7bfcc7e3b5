#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s4/bigint.hpp"
#include "s4/random.hpp"

namespace s4 {

// An interpolation node (x, y) in F_p x F_p.
struct FieldPoint {
  BigUint x;
  BigUint y;

  friend bool operator==(const FieldPoint&, const FieldPoint&) = default;
};

inline constexpr unsigned kDefaultPrimalityRounds = 64;

// b with a*b == 1 (mod p). Throws kNotInvertible when gcd(a, p) != 1.
BigUint mod_inv(const BigUint& a, const BigUint& p);

// base^exp mod m, m >= 2.
BigUint mod_pow(const BigUint& base, const BigUint& exp, const BigUint& m);

// Miller-Rabin with `rounds` random witnesses after trial division. Exact for
// n < 2^16. A composite survives with probability at most 4^-rounds.
bool is_probable_prime(const BigUint& n, unsigned rounds = kDefaultPrimalityRounds);

// A probable prime strictly greater than bound (the smallest one, up to the
// Miller-Rabin error).
BigUint next_prime(const BigUint& bound);

// Uniformly chosen probable prime with exactly `bits` bits whose two top bits
// are set, so a product of two such primes has exactly 2*bits bits.
BigUint random_prime(std::size_t bits, RandomSource& rng);

// P(x0) mod p for the unique polynomial of degree <= t-1 through the t points,
// computed term by term as sum y_i * l_i(x0). Throws kDuplicateNode.
BigUint lagrange_eval(std::span<const FieldPoint> points, const BigUint& x0, const BigUint& p);

// [l_1(x0), ..., l_t(x0)] over the nodes xs. Throws kDuplicateNode.
std::vector<BigUint> lagrange_basis_at(std::span<const BigUint> xs, const BigUint& x0,
                                       const BigUint& p);

using Matrix = std::vector<std::vector<BigUint>>;

// Solves matrix * x == rhs (mod p) for a square system by Gauss-Jordan
// elimination. Throws kSingularSystem when some column has no invertible pivot.
std::vector<BigUint> gauss_solve(Matrix matrix, std::vector<BigUint> rhs, const BigUint& p);

// Interpolation through one fixed node set, evaluated at many abscissae.
// The per-node denominators are inverted once at construction; each
// evaluation afterwards costs O(t) multiplications and no inversion. Agrees
// exactly with lagrange_eval / lagrange_basis_at on the same nodes.
class Interpolator {
 public:
  Interpolator(std::vector<BigUint> xs, BigUint p);

  std::size_t size() const { return xs_.size(); }
  const BigUint& modulus() const { return p_; }

  std::vector<BigUint> basis_at(const BigUint& x0) const;

  BigUint eval(std::span<const BigUint> ys, const BigUint& x0) const;

  // eval(ys, x) for every x in at, sharing the y-dependent precomputation.
  std::vector<BigUint> eval_many(std::span<const BigUint> ys, std::span<const BigUint> at) const;

 private:
  BigUint combine(std::span<const BigUint> scaled, const BigUint& x0) const;

  std::vector<BigUint> xs_;
  std::vector<BigUint> weights_;  // (prod_{j != i} (x_i - x_j))^-1
  BigUint p_;
};

}  // namespace s4

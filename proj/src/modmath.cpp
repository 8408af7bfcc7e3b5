#include "s4/modmath.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>

#include "s4/error.hpp"

namespace s4 {

BigUint parse_decimal(std::string_view text) {
  if (text.empty() || text.size() > 100000 ||
      !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::kMalformed, "not an unsigned decimal: '" + std::string(text) + "'");
  }
  return BigUint(std::string(text), 10);
}

std::string to_decimal(const BigUint& value) { return value.get_str(10); }

std::size_t bit_length(const BigUint& value) {
  return sgn(value) == 0 ? 0 : mpz_sizeinbase(value.get_mpz_t(), 2);
}

namespace {

// Odd primes below 2^10, used to sieve candidates before Miller-Rabin.
constexpr auto kSmallPrimes = [] {
  std::array<std::uint32_t, 171> out{};
  std::size_t count = 0;
  for (std::uint32_t n = 3; n < 1024; n += 2) {
    bool prime = true;
    for (std::uint32_t d = 3; d * d <= n; d += 2) {
      if (n % d == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out[count++] = n;
  }
  return out;
}();

bool trial_division_prime(std::uint32_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint32_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

BigUint reduce(const BigUint& value, const BigUint& p) {
  BigUint out;
  mpz_fdiv_r(out.get_mpz_t(), value.get_mpz_t(), p.get_mpz_t());
  return out;
}

// out = (a - b) mod p for reduced a, b.
void sub_mod(BigUint& out, const BigUint& a, const BigUint& b, const BigUint& p) {
  mpz_sub(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  if (sgn(out) < 0) mpz_add(out.get_mpz_t(), out.get_mpz_t(), p.get_mpz_t());
}

// out = a * b mod p; out may alias a or b.
void mul_mod(BigUint& out, const BigUint& a, const BigUint& b, const BigUint& p) {
  mpz_mul(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  mpz_fdiv_r(out.get_mpz_t(), out.get_mpz_t(), p.get_mpz_t());
}

void check_distinct(std::vector<BigUint> xs) {
  std::sort(xs.begin(), xs.end());
  if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
    throw Error(ErrorKind::kDuplicateNode, "interpolation nodes must be pairwise distinct");
  }
}

std::vector<BigUint> reduced(std::span<const BigUint> xs, const BigUint& p) {
  std::vector<BigUint> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(reduce(x, p));
  return out;
}

void check_modulus(const BigUint& p) {
  if (p < 2) throw Error(ErrorKind::kInvalidArgument, "modulus must be >= 2");
}

}  // namespace

BigUint mod_inv(const BigUint& a, const BigUint& p) {
  check_modulus(p);
  BigUint out;
  BigUint a_red = reduce(a, p);
  if (sgn(a_red) == 0 || mpz_invert(out.get_mpz_t(), a_red.get_mpz_t(), p.get_mpz_t()) == 0) {
    throw Error(ErrorKind::kNotInvertible, to_decimal(a) + " has no inverse mod " + to_decimal(p));
  }
  return out;
}

BigUint mod_pow(const BigUint& base, const BigUint& exp, const BigUint& m) {
  check_modulus(m);
  BigUint out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
  return out;
}

bool is_probable_prime(const BigUint& n, unsigned rounds) {
  if (rounds == 0) throw Error(ErrorKind::kInvalidArgument, "rounds must be >= 1");
  if (n < 65536) return trial_division_prime(static_cast<std::uint32_t>(n.get_ui()));
  if (mpz_even_p(n.get_mpz_t())) return false;
  for (std::uint32_t d : kSmallPrimes) {
    if (d == 0) break;
    if (mpz_divisible_ui_p(n.get_mpz_t(), d)) return false;
  }

  // n - 1 = d * 2^s with d odd.
  const BigUint n_minus_1 = n - 1;
  const mp_bitcnt_t s = mpz_scan1(n_minus_1.get_mpz_t(), 0);
  BigUint d;
  mpz_tdiv_q_2exp(d.get_mpz_t(), n_minus_1.get_mpz_t(), s);

  thread_local SecureRandom witnesses;
  const BigUint witness_span = n - 3;  // witnesses in [2, n-2]
  BigUint a, x;
  for (unsigned round = 0; round < rounds; ++round) {
    a = witnesses.below(witness_span) + 2;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n_minus_1) continue;
    bool witness_found = true;
    for (mp_bitcnt_t r = 1; r < s; ++r) {
      mul_mod(x, x, x, n);
      if (x == n_minus_1) {
        witness_found = false;
        break;
      }
    }
    if (witness_found) return false;
  }
  return true;
}

BigUint next_prime(const BigUint& bound) {
  if (bound < 2) throw Error(ErrorKind::kInvalidArgument, "next_prime: bound must be >= 2");
  BigUint candidate = bound + 1;
  if (candidate == 3) return candidate;
  if (mpz_even_p(candidate.get_mpz_t())) candidate += 1;
  // One cheap round filters composites; survivors get the full test.
  while (!is_probable_prime(candidate, 1) || !is_probable_prime(candidate)) candidate += 2;
  return candidate;
}

BigUint random_prime(std::size_t bits, RandomSource& rng) {
  if (bits < 3) throw Error(ErrorKind::kInvalidArgument, "random_prime: need at least 3 bits");
  BigUint low, candidate;
  mpz_ui_pow_ui(low.get_mpz_t(), 2, bits - 1);
  for (;;) {
    candidate = rng.below(low);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    if (is_probable_prime(candidate, 1) && is_probable_prime(candidate)) return candidate;
  }
}

BigUint lagrange_eval(std::span<const FieldPoint> points, const BigUint& x0, const BigUint& p) {
  check_modulus(p);
  if (points.empty()) throw Error(ErrorKind::kInvalidArgument, "lagrange_eval: no points");
  std::vector<BigUint> xs;
  xs.reserve(points.size());
  for (const auto& point : points) xs.push_back(reduce(point.x, p));
  check_distinct(xs);

  const BigUint at = reduce(x0, p);
  BigUint sum = 0, numerator, denominator, diff, term;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    numerator = 1;
    denominator = 1;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      sub_mod(diff, at, xs[j], p);
      mul_mod(numerator, numerator, diff, p);
      sub_mod(diff, xs[i], xs[j], p);
      mul_mod(denominator, denominator, diff, p);
    }
    mul_mod(term, numerator, mod_inv(denominator, p), p);
    mul_mod(term, term, reduce(points[i].y, p), p);
    sum += term;
  }
  return reduce(sum, p);
}

std::vector<BigUint> lagrange_basis_at(std::span<const BigUint> xs, const BigUint& x0,
                                       const BigUint& p) {
  check_modulus(p);
  std::vector<BigUint> nodes = reduced(xs, p);
  check_distinct(nodes);
  const BigUint at = reduce(x0, p);
  std::vector<BigUint> basis(nodes.size());
  BigUint numerator, denominator, diff;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    numerator = 1;
    denominator = 1;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j == i) continue;
      sub_mod(diff, at, nodes[j], p);
      mul_mod(numerator, numerator, diff, p);
      sub_mod(diff, nodes[i], nodes[j], p);
      mul_mod(denominator, denominator, diff, p);
    }
    mul_mod(basis[i], numerator, mod_inv(denominator, p), p);
  }
  return basis;
}

std::vector<BigUint> gauss_solve(Matrix matrix, std::vector<BigUint> rhs, const BigUint& p) {
  check_modulus(p);
  const std::size_t n = matrix.size();
  if (rhs.size() != n) throw Error(ErrorKind::kLengthMismatch, "gauss_solve: rhs length differs from row count");
  for (auto& row : matrix) {
    if (row.size() != n) throw Error(ErrorKind::kInvalidArgument, "gauss_solve: matrix is not square");
    for (auto& entry : row) entry = reduce(entry, p);
  }
  for (auto& entry : rhs) entry = reduce(entry, p);

  BigUint factor, scratch;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && sgn(matrix[pivot][col]) == 0) ++pivot;
    if (pivot == n) {
      throw Error(ErrorKind::kSingularSystem, "no invertible pivot in column " + std::to_string(col));
    }
    std::swap(matrix[pivot], matrix[col]);
    std::swap(rhs[pivot], rhs[col]);

    const BigUint inv = mod_inv(matrix[col][col], p);
    for (std::size_t c = col; c < n; ++c) mul_mod(matrix[col][c], matrix[col][c], inv, p);
    mul_mod(rhs[col], rhs[col], inv, p);

    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || sgn(matrix[row][col]) == 0) continue;
      factor = matrix[row][col];
      for (std::size_t c = col; c < n; ++c) {
        mul_mod(scratch, factor, matrix[col][c], p);
        sub_mod(matrix[row][c], matrix[row][c], scratch, p);
      }
      mul_mod(scratch, factor, rhs[col], p);
      sub_mod(rhs[row], rhs[row], scratch, p);
    }
  }
  return rhs;
}

Interpolator::Interpolator(std::vector<BigUint> xs, BigUint p) : p_(std::move(p)) {
  check_modulus(p_);
  if (xs.empty()) throw Error(ErrorKind::kInvalidArgument, "Interpolator: no nodes");
  xs_ = reduced(xs, p_);
  check_distinct(xs_);
  weights_.assign(xs_.size(), BigUint(1));
  BigUint diff;
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    for (std::size_t j = i + 1; j < xs_.size(); ++j) {
      sub_mod(diff, xs_[i], xs_[j], p_);
      mul_mod(weights_[i], weights_[i], diff, p_);
      sub_mod(diff, p_, diff, p_);
      mul_mod(weights_[j], weights_[j], diff, p_);
    }
  }
  for (auto& w : weights_) w = mod_inv(w, p_);
}

// sum_i scaled_i * prod_{j != i} (x0 - x_j), via suffix products so a node
// equal to x0 needs no special case.
BigUint Interpolator::combine(std::span<const BigUint> scaled, const BigUint& x0) const {
  const std::size_t t = xs_.size();
  const BigUint at = reduce(x0, p_);
  std::vector<BigUint> diffs(t);
  for (std::size_t j = 0; j < t; ++j) sub_mod(diffs[j], at, xs_[j], p_);
  std::vector<BigUint> suffix(t + 1);
  suffix[t] = 1;
  for (std::size_t j = t; j-- > 0;) mul_mod(suffix[j], suffix[j + 1], diffs[j], p_);

  BigUint prefix = 1, sum = 0, term;
  for (std::size_t i = 0; i < t; ++i) {
    mul_mod(term, scaled[i], prefix, p_);
    mul_mod(term, term, suffix[i + 1], p_);
    sum += term;
    mul_mod(prefix, prefix, diffs[i], p_);
  }
  return reduce(sum, p_);
}

std::vector<BigUint> Interpolator::basis_at(const BigUint& x0) const {
  // l_i(x0) = w_i * prod_{j < i} (x0 - x_j) * prod_{j > i} (x0 - x_j)
  const std::size_t t = xs_.size();
  const BigUint at = reduce(x0, p_);
  std::vector<BigUint> diffs(t);
  for (std::size_t j = 0; j < t; ++j) sub_mod(diffs[j], at, xs_[j], p_);
  std::vector<BigUint> basis(t);
  basis[t - 1] = 1;
  for (std::size_t j = t - 1; j-- > 0;) mul_mod(basis[j], basis[j + 1], diffs[j + 1], p_);
  BigUint prefix = 1;
  for (std::size_t i = 0; i < t; ++i) {
    mul_mod(basis[i], basis[i], prefix, p_);
    mul_mod(basis[i], basis[i], weights_[i], p_);
    mul_mod(prefix, prefix, diffs[i], p_);
  }
  return basis;
}

BigUint Interpolator::eval(std::span<const BigUint> ys, const BigUint& x0) const {
  return eval_many(ys, std::span<const BigUint>(&x0, 1)).front();
}

std::vector<BigUint> Interpolator::eval_many(std::span<const BigUint> ys,
                                             std::span<const BigUint> at) const {
  if (ys.size() != xs_.size()) throw Error(ErrorKind::kLengthMismatch, "Interpolator: y count differs from node count");
  std::vector<BigUint> scaled(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    mpz_fdiv_r(scaled[i].get_mpz_t(), ys[i].get_mpz_t(), p_.get_mpz_t());
    mul_mod(scaled[i], scaled[i], weights_[i], p_);
  }
  std::vector<BigUint> out;
  out.reserve(at.size());
  for (const auto& x : at) out.push_back(combine(scaled, x));
  return out;
}

}  // namespace s4

#pragma once

// Test-only reference computations in plain 64-bit arithmetic. Nothing here
// calls into the library, so it can check the library's answers.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t out = 1 % m;
  for (std::uint64_t i = 0; i < exp; ++i) out = mulmod(out, base % m, m);
  return out;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline std::uint64_t next_prime(std::uint64_t bound) {
  std::uint64_t n = bound + 1;
  while (!is_prime(n)) ++n;
  return n;
}

// Exhaustive search for the inverse of a mod p.
inline std::optional<std::uint64_t> inverse(std::uint64_t a, std::uint64_t p) {
  for (std::uint64_t b = 1; b < p; ++b) {
    if (mulmod(a, b, p) == 1) return b;
  }
  return std::nullopt;
}

inline std::uint64_t eval_poly(const std::vector<std::uint64_t>& coeffs, std::uint64_t x, std::uint64_t p) {
  std::uint64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (mulmod(acc, x, p) + *it) % p;
  return acc;
}

// Brute force over all p^t coefficient vectors (constant term first) for the
// unique polynomial of degree < t through the points.
inline std::vector<std::uint64_t> solve_coefficients(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& points,
                                                     std::uint64_t p) {
  const std::size_t t = points.size();
  std::vector<std::uint64_t> coeffs(t, 0);
  std::optional<std::vector<std::uint64_t>> found;
  for (;;) {
    bool fits = true;
    for (const auto& [x, y] : points) {
      if (eval_poly(coeffs, x, p) != y % p) {
        fits = false;
        break;
      }
    }
    if (fits) {
      if (found) return {};  // not unique: caller passed duplicate nodes
      found = coeffs;
    }
    std::size_t i = 0;
    while (i < t && ++coeffs[i] == p) coeffs[i++] = 0;
    if (i == t) break;
  }
  return found.value_or(std::vector<std::uint64_t>{});
}

}  // namespace oracle

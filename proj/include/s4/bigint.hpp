#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <string_view>

namespace s4 {

// Arbitrary-precision nonnegative integer. Backed by GMP; every value the
// library hands out is nonnegative and, where a modulus applies, fully reduced.
using BigUint = mpz_class;

// Parses an unsigned decimal string ("0", "12345"). Signs, whitespace and
// empty input are rejected with ErrorKind::kMalformed.
BigUint parse_decimal(std::string_view text);

std::string to_decimal(const BigUint& value);

// Number of significant bits; bit_length(0) == 0.
std::size_t bit_length(const BigUint& value);

}  // namespace s4

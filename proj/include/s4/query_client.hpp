#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "s4/csp_store.hpp"
#include "s4/random.hpp"
#include "s4/scheme.hpp"

// Trusted side of the deployment: holds the private key, turns plaintext
// measures into field elements, drives outsourcing and finalizes aggregates.
namespace s4::client {

// Fixed-point encoding: a value v is stored as v * 10^decimals.
struct EncodingSpec {
  unsigned decimals = 0;
  // Largest accepted plaintext, in plaintext units. Unbounded when empty.
  std::optional<BigUint> max_value;

  BigUint scale() const;
};

// Errors: kNegativeValue, kOverflow (above max_value), kMalformed (not a
// decimal, or more fractional precision than the scale keeps).
Secret encode(std::string_view value, const EncodingSpec& spec);

// Decimal rendering of encoded / scale.
std::string decode(const BigUint& encoded, const EncodingSpec& spec);

// numerator / denominator, exact when the expansion ends within
// `fraction_digits` places and rounded half-up there otherwise. Trailing
// zeros are dropped.
std::string render_rational(const BigUint& numerator, const BigUint& denominator, unsigned fraction_digits);

// p = next_prime(m * max_value * scale): room for the sum of m maximal values.
BigUint auto_prime(std::uint64_t m, const BigUint& max_value, const EncodingSpec& spec);

enum class QueryKind { kSum, kCount, kAvg };

struct QueryResult {
  QueryKind kind = QueryKind::kSum;
  BigUint sum_numerator;  // encoded sum; the row count for COUNT
  std::uint64_t count = 0;
  std::string decoded;

  // {"kind":..,"numerator":..,"count":..,"decoded":..} on one line.
  std::string to_json() const;
};

std::string_view query_kind_name(QueryKind kind);

// Encodes, splits and ingests every value, creating the table when missing.
// Records get ids max_id + 1, max_id + 2, ... Throws kPrimeTooSmall when the
// table total after the batch would reach p, before anything is written.
std::size_t outsource(std::span<const std::string> values, const PrivateKey& key, const EncodingSpec& spec,
                      csp::Store& store, const std::string& table, RandomSource& rng);

// Same for values that are already field elements.
std::size_t outsource_secrets(std::span<const Secret> secrets, const PrivateKey& key, csp::Store& store,
                              const std::string& table, RandomSource& rng);

QueryResult sum_query(const csp::Store& store, const std::string& table, const csp::Selection& selection,
                      const PrivateKey& key, const EncodingSpec& spec);

// Needs no key material.
QueryResult count_query(const csp::Store& store, const std::string& table, const csp::Selection& selection);

// SUM and COUNT from one aggregate round trip. Throws kEmptySelection.
QueryResult avg_query(const csp::Store& store, const std::string& table, const csp::Selection& selection,
                      const PrivateKey& key, const EncodingSpec& spec);

// Every stored row reconstructed with the key, in table order.
std::vector<std::pair<csp::RecordId, Secret>> reconstruct_rows(const csp::Store& store, const std::string& table,
                                                               const PrivateKey& key);

}  // namespace s4::client

#include "s4/query_client.hpp"

#include <json.hpp>

#include <algorithm>

#include "s4/error.hpp"

namespace s4::client {

namespace {

constexpr std::size_t kIngestBatch = 4096;

BigUint pow10(unsigned exponent) {
  BigUint out;
  mpz_ui_pow_ui(out.get_mpz_t(), 10, exponent);
  return out;
}

void check_table_matches(const csp::Store& store, const std::string& table, const PrivateKey& key) {
  const csp::TableInfo info = store.info(table);
  if (info.k != key.k() || info.p != key.p()) {
    throw Error(ErrorKind::kKeyMismatch, "table " + table + " was not built with this key (k or p differs)");
  }
}

}  // namespace

BigUint EncodingSpec::scale() const { return pow10(decimals); }

Secret encode(std::string_view value, const EncodingSpec& spec) {
  if (!value.empty() && value.front() == '-') {
    throw Error(ErrorKind::kNegativeValue, "negative values are not supported: " + std::string(value));
  }
  const auto dot = value.find('.');
  std::string_view integral = value.substr(0, dot);
  std::string_view fraction = dot == std::string_view::npos ? std::string_view{} : value.substr(dot + 1);
  if (integral.empty() || (dot != std::string_view::npos && fraction.empty())) {
    throw Error(ErrorKind::kMalformed, "not a decimal number: '" + std::string(value) + "'");
  }
  if (fraction.size() > spec.decimals) {
    const auto dropped = fraction.substr(spec.decimals);
    if (!std::all_of(dropped.begin(), dropped.end(), [](char c) { return c == '0'; })) {
      // Still reject garbage as malformed rather than as lost precision.
      parse_decimal(dropped);
      throw Error(ErrorKind::kMalformed, std::string(value) + " needs more than " +
                                              std::to_string(spec.decimals) + " decimal places");
    }
    fraction = fraction.substr(0, spec.decimals);
  }
  std::string digits(integral);
  digits += fraction;
  digits.append(spec.decimals - fraction.size(), '0');
  Secret out{parse_decimal(digits)};
  if (spec.max_value && out.value > *spec.max_value * spec.scale()) {
    throw Error(ErrorKind::kOverflow, std::string(value) + " exceeds max value " + to_decimal(*spec.max_value));
  }
  return out;
}

std::string render_rational(const BigUint& numerator, const BigUint& denominator, unsigned fraction_digits) {
  if (sgn(denominator) <= 0) throw Error(ErrorKind::kInvalidArgument, "render_rational: zero denominator");
  const BigUint unit = pow10(fraction_digits);
  // round(numerator * unit / denominator), half up
  BigUint scaled = (2 * numerator * unit + denominator) / (2 * denominator);
  const BigUint whole = scaled / unit;
  std::string frac = fraction_digits == 0 ? "" : to_decimal(BigUint(scaled % unit));
  frac.insert(0, fraction_digits - frac.size(), '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = to_decimal(whole);
  if (!frac.empty()) out += "." + frac;
  return out;
}

std::string decode(const BigUint& encoded, const EncodingSpec& spec) {
  return render_rational(encoded, spec.scale(), spec.decimals);
}

BigUint auto_prime(std::uint64_t m, const BigUint& max_value, const EncodingSpec& spec) {
  BigUint bound = max_value * spec.scale();
  bound *= static_cast<unsigned long>(m);
  if (bound < 2) bound = 2;
  return next_prime(bound);
}

std::string_view query_kind_name(QueryKind kind) {
  switch (kind) {
    case QueryKind::kSum: return "SUM";
    case QueryKind::kCount: return "COUNT";
    case QueryKind::kAvg: return "AVG";
  }
  return "?";
}

std::string QueryResult::to_json() const {
  nlohmann::ordered_json record;
  record["kind"] = query_kind_name(kind);
  record["numerator"] = to_decimal(sum_numerator);
  record["count"] = count;
  record["decoded"] = decoded;
  return record.dump();
}

std::size_t outsource_secrets(std::span<const Secret> secrets, const PrivateKey& key, csp::Store& store,
                              const std::string& table, RandomSource& rng) {
  BigUint total = 0;
  if (store.has_table(table)) {
    check_table_matches(store, table, key);
    if (store.info(table).rows > 0) total = finalize_sum(store.sum_splits(table, csp::Selection::all()), key).value;
  }
  // A single value >= p already breaks the total, so one check covers both.
  for (const auto& s : secrets) total += s.value;
  if (total >= key.p()) {
    throw Error(ErrorKind::kPrimeTooSmall, "table total " + to_decimal(total) + " would reach p = " +
                                               to_decimal(key.p()) + "; sums would wrap");
  }
  if (!store.has_table(table)) store.create_table(table, key.k(), key.p());

  csp::RecordId next_id = store.info(table).max_id + 1;
  std::size_t stored = store.info(table).rows;
  std::vector<csp::SplitRecord> batch;
  batch.reserve(std::min(secrets.size(), kIngestBatch));
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    batch.push_back({next_id++, split(secrets[i], key, rng).splits});
    if (batch.size() == kIngestBatch || i + 1 == secrets.size()) {
      stored = store.ingest(table, batch);
      batch.clear();
    }
  }
  return stored;
}

std::size_t outsource(std::span<const std::string> values, const PrivateKey& key, const EncodingSpec& spec,
                      csp::Store& store, const std::string& table, RandomSource& rng) {
  std::vector<Secret> secrets;
  secrets.reserve(values.size());
  for (const auto& v : values) secrets.push_back(encode(v, spec));
  return outsource_secrets(secrets, key, store, table, rng);
}

QueryResult sum_query(const csp::Store& store, const std::string& table, const csp::Selection& selection,
                      const PrivateKey& key, const EncodingSpec& spec) {
  check_table_matches(store, table, key);
  const AggregateResponse response = store.sum_splits(table, selection);
  QueryResult result;
  result.kind = QueryKind::kSum;
  result.sum_numerator = finalize_sum(response, key).value;
  result.count = response.count;
  result.decoded = decode(result.sum_numerator, spec);
  return result;
}

QueryResult count_query(const csp::Store& store, const std::string& table, const csp::Selection& selection) {
  QueryResult result;
  result.kind = QueryKind::kCount;
  result.count = store.count_rows(table, selection);
  result.sum_numerator = static_cast<unsigned long>(result.count);
  result.decoded = std::to_string(result.count);
  return result;
}

QueryResult avg_query(const csp::Store& store, const std::string& table, const csp::Selection& selection,
                      const PrivateKey& key, const EncodingSpec& spec) {
  if (!selection.is_all() && selection.ids().empty()) {
    throw Error(ErrorKind::kEmptySelection, "AVG over an empty selection");
  }
  QueryResult result = sum_query(store, table, selection, key, spec);
  if (result.count == 0) throw Error(ErrorKind::kEmptySelection, "AVG over an empty table");
  result.kind = QueryKind::kAvg;
  BigUint denominator = spec.scale();
  denominator *= static_cast<unsigned long>(result.count);
  result.decoded = render_rational(result.sum_numerator, denominator, spec.decimals + 12);
  return result;
}

std::vector<std::pair<csp::RecordId, Secret>> reconstruct_rows(const csp::Store& store, const std::string& table,
                                                               const PrivateKey& key) {
  check_table_matches(store, table, key);
  std::vector<std::pair<csp::RecordId, Secret>> out;
  for (auto& row : store.rows(table, csp::Selection::all())) {
    out.emplace_back(row.id, reconstruct(SplitVector{std::move(row.splits)}, key));
  }
  return out;
}

}  // namespace s4::client

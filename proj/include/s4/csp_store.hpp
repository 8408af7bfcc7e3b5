#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s4/aggregate.hpp"
#include "s4/bigint.hpp"
#include "s4/paillier.hpp"

// The simulated honest-but-curious cloud provider. Everything here runs
// without the S4 private key: the store only ever learns the public prime p
// (to reduce sums) and, for ciphertext tables, the Paillier modulus n.
namespace s4::csp {

using RecordId = std::uint64_t;

// One outsourced row of table T': record id plus the splits A_1..A_{k-1}.
struct SplitRecord {
  RecordId id = 0;
  std::vector<BigUint> splits;

  friend bool operator==(const SplitRecord&, const SplitRecord&) = default;
};

struct CiphertextRecord {
  RecordId id = 0;
  paillier::Ciphertext c;

  friend bool operator==(const CiphertextRecord&, const CiphertextRecord&) = default;
};

// Rows to aggregate: every row, or an explicit id set (duplicates collapse).
class Selection {
 public:
  static Selection all() { return Selection(); }
  static Selection of(std::vector<RecordId> ids);

  bool is_all() const { return !ids_.has_value(); }
  // Sorted, unique. Only meaningful when !is_all().
  const std::vector<RecordId>& ids() const { return *ids_; }

 private:
  Selection() = default;
  std::optional<std::vector<RecordId>> ids_;
};

struct TableInfo {
  std::string name;
  std::size_t k = 0;  // splits per row + 1
  BigUint p;
  std::size_t rows = 0;
  RecordId max_id = 0;  // 0 when empty
};

struct CiphertextTableInfo {
  std::string name;
  paillier::PublicKey key;
  std::size_t rows = 0;
  RecordId max_id = 0;
};

// Product of the selected ciphertexts mod n^2 (an encryption of their sum).
struct CiphertextAggregate {
  paillier::Ciphertext product;
  std::uint64_t count = 0;
};

// Serialized size of a table's cell payload, measured from files on disk.
struct PayloadBytes {
  std::uint64_t text = 0;    // decimal characters of every cell in the CSV
  std::uint64_t binary = 0;  // fixed-width cells in the binary export
};

// Table store with optional directory persistence. Per directory, each table
// NAME owns NAME.csv (header `id,a1,...,a{k-1}` or `id,c`) and a one-line
// sidecar NAME.meta (`s4-table/1 k=<k> p=<p>` or
// `s4-ptable/1 n=<n> fp=<sha256 of n>`). Tables are append-only.
//
// Ingest takes a table exclusively; aggregation and reads share it.
class Store {
 public:
  // Non-persistent store.
  Store();
  // Opens (creating if needed) a store directory and loads its tables.
  explicit Store(const std::filesystem::path& dir);
  ~Store();
  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;

  const std::optional<std::filesystem::path>& directory() const;

  // Throws kInvalidArgument on a bad name or when the name is taken.
  void create_table(const std::string& name, std::size_t k, const BigUint& p);
  bool has_table(const std::string& name) const;
  TableInfo info(const std::string& name) const;
  std::vector<std::string> table_names() const;

  // Validates the whole batch first, then appends it. Returns the table's row
  // count afterwards. Errors: kUnknownTable, kWidthMismatch, kDuplicateId,
  // kInvalidArgument (a split >= p).
  std::size_t ingest(const std::string& name, std::span<const SplitRecord> rows);

  // Column-wise mod-p sums over the selection. Errors: kUnknownTable, kUnknownId.
  AggregateResponse sum_splits(const std::string& name, const Selection& selection) const;
  std::uint64_t count_rows(const std::string& name, const Selection& selection) const;
  std::vector<SplitRecord> rows(const std::string& name, const Selection& selection) const;

  void create_ciphertext_table(const std::string& name, const paillier::PublicKey& key);
  bool has_ciphertext_table(const std::string& name) const;
  CiphertextTableInfo ciphertext_info(const std::string& name) const;
  std::size_t ingest_ciphertexts(const std::string& name, std::span<const CiphertextRecord> rows);
  CiphertextAggregate multiply_ciphertexts(const std::string& name, const Selection& selection) const;
  std::vector<CiphertextRecord> ciphertexts(const std::string& name, const Selection& selection) const;

  // Writes NAME.bin next to the CSV: a text header line
  // `s4-table-bin/1 ...rows=<m>` then per row an 8-byte little-endian id and
  // fixed-width little-endian cells. Returns the file path.
  std::filesystem::path export_binary(const std::string& name) const;

  // Requires a directory store; exports the binary form first.
  PayloadBytes payload_bytes(const std::string& name) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Cell width in bytes for a split table over p: whole 64-bit words.
std::size_t split_cell_bytes(const BigUint& p);

}  // namespace s4::csp

#include "s4/csp_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "s4/error.hpp"

namespace s4::csp {

namespace fs = std::filesystem;

static_assert(GMP_NUMB_BITS == 64, "cell packing assumes 64-bit GMP limbs");

Selection Selection::of(std::vector<RecordId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Selection s;
  s.ids_ = std::move(ids);
  return s;
}

std::size_t split_cell_bytes(const BigUint& p) { return 8 * ((bit_length(p) + 63) / 64); }

namespace {

constexpr std::string_view kSplitMagic = "s4-table/1";
constexpr std::string_view kCipherMagic = "s4-ptable/1";

bool valid_name(const std::string& name) {
  return !name.empty() && name.size() <= 128 &&
         std::all_of(name.begin(), name.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
         });
}

void put_cell(const BigUint& value, std::uint64_t* out, std::size_t words) {
  std::fill(out, out + words, 0);
  std::size_t count = 0;
  mpz_export(out, &count, -1, sizeof(std::uint64_t), 0, 0, value.get_mpz_t());
}

BigUint get_cell(const std::uint64_t* in, std::size_t words) {
  BigUint out;
  mpz_import(out.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, in);
  return out;
}

void write_le64(std::ostream& out, std::uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

// Splits "key=value key=value" tokens after the magic word.
std::map<std::string, std::string> parse_meta(const std::string& line, std::string_view magic,
                                              const fs::path& path) {
  std::istringstream in(line);
  std::string token;
  if (!(in >> token) || token != magic) {
    throw Error(ErrorKind::kFormat, path.string() + ": expected '" + std::string(magic) + "'");
  }
  std::map<std::string, std::string> fields;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kFormat, path.string() + ": bad field " + token);
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return fields;
}

// Comma-separated decimal fields of one CSV row.
std::vector<std::string_view> csv_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

RecordId parse_id(std::string_view text) {
  const BigUint id = parse_decimal(text);
  if (!mpz_fits_ulong_p(id.get_mpz_t())) throw Error(ErrorKind::kFormat, "record id out of range");
  return id.get_ui();
}

std::string read_first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return line;
}

std::ofstream open_append(const fs::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for append");
  return out;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::trunc);
  if (!out || !(out << contents) || !out.flush()) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

struct SplitTable {
  std::string name;
  std::size_t k = 0;
  BigUint p;
  std::size_t words = 0;  // 64-bit words per cell
  std::vector<RecordId> ids;
  std::vector<std::uint64_t> cells;  // row-major, (k-1) cells per row
  std::unordered_map<RecordId, std::size_t> index;
  RecordId max_id = 0;
  mutable std::shared_mutex mutex;

  std::size_t width() const { return k - 1; }
  std::size_t row_words() const { return width() * words; }
  const std::uint64_t* row(std::size_t r) const { return cells.data() + r * row_words(); }
};

struct CipherTable {
  std::string name;
  paillier::PublicKey key;
  std::vector<RecordId> ids;
  std::vector<BigUint> cells;
  std::unordered_map<RecordId, std::size_t> index;
  RecordId max_id = 0;
  mutable std::shared_mutex mutex;
};

// Row positions for a selection, in table order for ALL and id order otherwise.
template <typename Table>
std::vector<std::size_t> resolve(const Table& table, const Selection& selection) {
  std::vector<std::size_t> positions;
  if (selection.is_all()) {
    positions.resize(table.ids.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    return positions;
  }
  positions.reserve(selection.ids().size());
  for (RecordId id : selection.ids()) {
    auto it = table.index.find(id);
    if (it == table.index.end()) {
      throw Error(ErrorKind::kUnknownId, "table " + table.name + " has no record " + std::to_string(id));
    }
    positions.push_back(it->second);
  }
  return positions;
}

template <typename Table, typename Record>
void check_ids(const Table& table, std::span<const Record> rows) {
  std::unordered_set<RecordId> batch;
  batch.reserve(rows.size());
  for (const auto& row : rows) {
    if (table.index.count(row.id) || !batch.insert(row.id).second) {
      throw Error(ErrorKind::kDuplicateId, "record id " + std::to_string(row.id) + " already present");
    }
  }
}

}  // namespace

struct Store::Impl {
  std::optional<fs::path> dir;
  mutable std::shared_mutex mutex;
  std::map<std::string, std::unique_ptr<SplitTable>> split_tables;
  std::map<std::string, std::unique_ptr<CipherTable>> cipher_tables;

  fs::path csv_path(const std::string& name) const { return *dir / (name + ".csv"); }
  fs::path meta_path(const std::string& name) const { return *dir / (name + ".meta"); }
  fs::path bin_path(const std::string& name) const { return *dir / (name + ".bin"); }

  SplitTable& split_table(const std::string& name) const {
    std::shared_lock lock(mutex);
    auto it = split_tables.find(name);
    if (it == split_tables.end()) throw Error(ErrorKind::kUnknownTable, "no split table '" + name + "'");
    return *it->second;
  }

  CipherTable& cipher_table(const std::string& name) const {
    std::shared_lock lock(mutex);
    auto it = cipher_tables.find(name);
    if (it == cipher_tables.end()) throw Error(ErrorKind::kUnknownTable, "no ciphertext table '" + name + "'");
    return *it->second;
  }

  void check_new_name(const std::string& name) const {
    if (!valid_name(name)) throw Error(ErrorKind::kInvalidArgument, "invalid table name '" + name + "'");
    if (split_tables.count(name) || cipher_tables.count(name)) {
      throw Error(ErrorKind::kInvalidArgument, "table '" + name + "' already exists");
    }
  }

  static void append_rows(SplitTable& table, std::span<const SplitRecord> rows) {
    table.ids.reserve(table.ids.size() + rows.size());
    table.cells.reserve(table.cells.size() + rows.size() * table.row_words());
    for (const auto& row : rows) {
      const std::size_t offset = table.cells.size();
      table.cells.resize(offset + table.row_words());
      for (std::size_t i = 0; i < row.splits.size(); ++i) {
        put_cell(row.splits[i], table.cells.data() + offset + i * table.words, table.words);
      }
      table.index.emplace(row.id, table.ids.size());
      table.ids.push_back(row.id);
      table.max_id = std::max(table.max_id, row.id);
    }
  }

  static void append_ciphertexts(CipherTable& table, std::span<const CiphertextRecord> rows) {
    for (const auto& row : rows) {
      table.index.emplace(row.id, table.ids.size());
      table.ids.push_back(row.id);
      table.cells.push_back(row.c.c);
      table.max_id = std::max(table.max_id, row.id);
    }
  }

  void load_split_table(const std::string& name, const std::map<std::string, std::string>& meta) {
    auto table = std::make_unique<SplitTable>();
    table->name = name;
    auto field = [&](const char* key) {
      auto it = meta.find(key);
      if (it == meta.end()) throw Error(ErrorKind::kFormat, meta_path(name).string() + ": missing " + key);
      return parse_decimal(it->second);
    };
    const BigUint k = field("k");
    if (k < 2 || k > 1u << 20) throw Error(ErrorKind::kFormat, meta_path(name).string() + ": bad k");
    table->k = k.get_ui();
    table->p = field("p");
    table->words = split_cell_bytes(table->p) / 8;

    std::ifstream in(csv_path(name));
    std::string line;
    if (!in || !std::getline(in, line)) throw Error(ErrorKind::kIo, "cannot read " + csv_path(name).string());
    std::vector<SplitRecord> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = csv_fields(line);
      if (fields.size() != table->k) {
        throw Error(ErrorKind::kWidthMismatch, csv_path(name).string() + ": row width differs from k");
      }
      SplitRecord record;
      record.id = parse_id(fields[0]);
      for (std::size_t i = 1; i < fields.size(); ++i) record.splits.push_back(parse_decimal(fields[i]));
      rows.push_back(std::move(record));
    }
    check_ids<SplitTable, SplitRecord>(*table, rows);
    append_rows(*table, rows);
    split_tables.emplace(name, std::move(table));
  }

  void load_cipher_table(const std::string& name, const std::map<std::string, std::string>& meta) {
    auto table = std::make_unique<CipherTable>();
    table->name = name;
    auto it = meta.find("n");
    if (it == meta.end()) throw Error(ErrorKind::kFormat, meta_path(name).string() + ": missing n");
    const BigUint n = parse_decimal(it->second);
    auto fp = meta.find("fp");
    if (fp == meta.end() || fp->second != paillier::fingerprint(n)) {
      throw Error(ErrorKind::kKeyMismatch, meta_path(name).string() + ": fingerprint does not match n");
    }
    table->key.n = n;
    table->key.n_squared = n * n;
    table->key.g = n + 1;
    table->key.bits = bit_length(n);

    std::ifstream in(csv_path(name));
    std::string line;
    if (!in || !std::getline(in, line)) throw Error(ErrorKind::kIo, "cannot read " + csv_path(name).string());
    std::vector<CiphertextRecord> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = csv_fields(line);
      if (fields.size() != 2) throw Error(ErrorKind::kWidthMismatch, csv_path(name).string() + ": expected id,c");
      rows.push_back({parse_id(fields[0]), paillier::Ciphertext{parse_decimal(fields[1])}});
    }
    check_ids<CipherTable, CiphertextRecord>(*table, rows);
    append_ciphertexts(*table, rows);
    cipher_tables.emplace(name, std::move(table));
  }
};

Store::Store() : impl_(std::make_unique<Impl>()) {}

Store::Store(const fs::path& dir) : impl_(std::make_unique<Impl>()) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::kIo, "cannot open store directory " + dir.string());
  impl_->dir = dir;
  std::vector<fs::path> metas;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".meta") metas.push_back(entry.path());
  }
  std::sort(metas.begin(), metas.end());
  for (const auto& meta : metas) {
    const std::string name = meta.stem().string();
    const std::string line = read_first_line(meta);
    if (line.rfind(kCipherMagic, 0) == 0) {
      impl_->load_cipher_table(name, parse_meta(line, kCipherMagic, meta));
    } else {
      impl_->load_split_table(name, parse_meta(line, kSplitMagic, meta));
    }
  }
}

Store::~Store() = default;
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;

const std::optional<fs::path>& Store::directory() const { return impl_->dir; }

void Store::create_table(const std::string& name, std::size_t k, const BigUint& p) {
  if (k < 2) throw Error(ErrorKind::kInvalidThreshold, "k must be >= 2");
  if (p < 2) throw Error(ErrorKind::kInvalidArgument, "p must be >= 2");
  std::unique_lock lock(impl_->mutex);
  impl_->check_new_name(name);
  if (impl_->dir) {
    std::string header = "id";
    for (std::size_t i = 1; i < k; ++i) header += ",a" + std::to_string(i);
    write_file(impl_->csv_path(name), header + "\n");
    write_file(impl_->meta_path(name), std::string(kSplitMagic) + " k=" + std::to_string(k) +
                                           " p=" + to_decimal(p) + "\n");
  }
  auto table = std::make_unique<SplitTable>();
  table->name = name;
  table->k = k;
  table->p = p;
  table->words = split_cell_bytes(p) / 8;
  impl_->split_tables.emplace(name, std::move(table));
}

bool Store::has_table(const std::string& name) const {
  std::shared_lock lock(impl_->mutex);
  return impl_->split_tables.count(name) > 0;
}

std::vector<std::string> Store::table_names() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : impl_->split_tables) names.push_back(name);
  for (const auto& [name, _] : impl_->cipher_tables) names.push_back(name);
  std::sort(names.begin(), names.end());
  return names;
}

TableInfo Store::info(const std::string& name) const {
  const SplitTable& table = impl_->split_table(name);
  std::shared_lock lock(table.mutex);
  return TableInfo{table.name, table.k, table.p, table.ids.size(), table.max_id};
}

std::size_t Store::ingest(const std::string& name, std::span<const SplitRecord> rows) {
  SplitTable& table = impl_->split_table(name);
  std::unique_lock lock(table.mutex);
  for (const auto& row : rows) {
    if (row.splits.size() != table.width()) {
      throw Error(ErrorKind::kWidthMismatch, "row " + std::to_string(row.id) + " has " +
                                                 std::to_string(row.splits.size()) + " splits, table expects " +
                                                 std::to_string(table.width()));
    }
    for (const auto& v : row.splits) {
      if (sgn(v) < 0 || v >= table.p) throw Error(ErrorKind::kInvalidArgument, "split value outside [0, p)");
    }
  }
  check_ids<SplitTable, SplitRecord>(table, rows);

  if (impl_->dir) {
    std::ostringstream text;
    for (const auto& row : rows) {
      text << row.id;
      for (const auto& v : row.splits) text << ',' << to_decimal(v);
      text << '\n';
    }
    auto out = open_append(impl_->csv_path(name));
    if (!(out << text.str()) || !out.flush()) throw Error(ErrorKind::kIo, "append failed for table " + name);
  }
  Impl::append_rows(table, rows);
  return table.ids.size();
}

AggregateResponse Store::sum_splits(const std::string& name, const Selection& selection) const {
  const SplitTable& table = impl_->split_table(name);
  std::shared_lock lock(table.mutex);
  const auto positions = resolve(table, selection);
  const std::size_t width = table.width();
  AggregateResponse response;
  response.count = positions.size();
  response.sums.resize(width);

  if (table.words == 1) {
    // Each accumulator absorbs up to 2^64 cells below 2^64 without overflow.
    std::vector<unsigned __int128> acc(width, 0);
    for (std::size_t r : positions) {
      const std::uint64_t* row = table.row(r);
      for (std::size_t i = 0; i < width; ++i) acc[i] += row[i];
    }
    for (std::size_t i = 0; i < width; ++i) {
      const std::uint64_t limbs[2] = {static_cast<std::uint64_t>(acc[i]), static_cast<std::uint64_t>(acc[i] >> 64)};
      response.sums[i] = get_cell(limbs, 2) % table.p;
    }
    return response;
  }

  const std::size_t w = table.words;
  std::vector<mp_limb_t> acc(width * (w + 1), 0);
  for (std::size_t r : positions) {
    const std::uint64_t* row = table.row(r);
    for (std::size_t i = 0; i < width; ++i) {
      mp_limb_t* slot = acc.data() + i * (w + 1);
      mpn_add(slot, slot, static_cast<mp_size_t>(w + 1), reinterpret_cast<const mp_limb_t*>(row + i * w),
              static_cast<mp_size_t>(w));
    }
  }
  for (std::size_t i = 0; i < width; ++i) {
    response.sums[i] = get_cell(reinterpret_cast<const std::uint64_t*>(acc.data() + i * (w + 1)), w + 1) % table.p;
  }
  return response;
}

std::uint64_t Store::count_rows(const std::string& name, const Selection& selection) const {
  const SplitTable& table = impl_->split_table(name);
  std::shared_lock lock(table.mutex);
  return resolve(table, selection).size();
}

std::vector<SplitRecord> Store::rows(const std::string& name, const Selection& selection) const {
  const SplitTable& table = impl_->split_table(name);
  std::shared_lock lock(table.mutex);
  std::vector<SplitRecord> out;
  for (std::size_t r : resolve(table, selection)) {
    SplitRecord record;
    record.id = table.ids[r];
    record.splits.reserve(table.width());
    for (std::size_t i = 0; i < table.width(); ++i) {
      record.splits.push_back(get_cell(table.row(r) + i * table.words, table.words));
    }
    out.push_back(std::move(record));
  }
  return out;
}

void Store::create_ciphertext_table(const std::string& name, const paillier::PublicKey& key) {
  std::unique_lock lock(impl_->mutex);
  impl_->check_new_name(name);
  if (impl_->dir) {
    write_file(impl_->csv_path(name), "id,c\n");
    write_file(impl_->meta_path(name), std::string(kCipherMagic) + " n=" + to_decimal(key.n) +
                                           " fp=" + paillier::fingerprint(key.n) + "\n");
  }
  auto table = std::make_unique<CipherTable>();
  table->name = name;
  table->key = key;
  impl_->cipher_tables.emplace(name, std::move(table));
}

bool Store::has_ciphertext_table(const std::string& name) const {
  std::shared_lock lock(impl_->mutex);
  return impl_->cipher_tables.count(name) > 0;
}

CiphertextTableInfo Store::ciphertext_info(const std::string& name) const {
  const CipherTable& table = impl_->cipher_table(name);
  std::shared_lock lock(table.mutex);
  return CiphertextTableInfo{table.name, table.key, table.ids.size(), table.max_id};
}

std::size_t Store::ingest_ciphertexts(const std::string& name, std::span<const CiphertextRecord> rows) {
  CipherTable& table = impl_->cipher_table(name);
  std::unique_lock lock(table.mutex);
  for (const auto& row : rows) {
    if (sgn(row.c.c) <= 0 || row.c.c >= table.key.n_squared) {
      throw Error(ErrorKind::kInvalidCiphertext, "ciphertext outside (0, n^2)");
    }
  }
  check_ids<CipherTable, CiphertextRecord>(table, rows);
  if (impl_->dir) {
    std::ostringstream text;
    for (const auto& row : rows) text << row.id << ',' << to_decimal(row.c.c) << '\n';
    auto out = open_append(impl_->csv_path(name));
    if (!(out << text.str()) || !out.flush()) throw Error(ErrorKind::kIo, "append failed for table " + name);
  }
  Impl::append_ciphertexts(table, rows);
  return table.ids.size();
}

CiphertextAggregate Store::multiply_ciphertexts(const std::string& name, const Selection& selection) const {
  const CipherTable& table = impl_->cipher_table(name);
  std::shared_lock lock(table.mutex);
  const auto positions = resolve(table, selection);
  CiphertextAggregate out;
  out.count = positions.size();
  if (positions.empty()) {
    out.product = paillier::zero();
    return out;
  }
  // m - 1 modular multiplications for m ciphertexts.
  BigUint product = table.cells[positions.front()];
  for (std::size_t i = 1; i < positions.size(); ++i) {
    product *= table.cells[positions[i]];
    product %= table.key.n_squared;
  }
  out.product.c = std::move(product);
  return out;
}

std::vector<CiphertextRecord> Store::ciphertexts(const std::string& name, const Selection& selection) const {
  const CipherTable& table = impl_->cipher_table(name);
  std::shared_lock lock(table.mutex);
  std::vector<CiphertextRecord> out;
  for (std::size_t r : resolve(table, selection)) out.push_back({table.ids[r], {table.cells[r]}});
  return out;
}

fs::path Store::export_binary(const std::string& name) const {
  if (!impl_->dir) throw Error(ErrorKind::kInvalidArgument, "binary export needs a directory store");
  const fs::path path = impl_->bin_path(name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());

  if (has_table(name)) {
    const SplitTable& table = impl_->split_table(name);
    std::shared_lock lock(table.mutex);
    out << "s4-table-bin/1 k=" << table.k << " cell_bytes=" << table.words * 8 << " rows=" << table.ids.size()
        << '\n';
    for (std::size_t r = 0; r < table.ids.size(); ++r) {
      write_le64(out, table.ids[r]);
      const std::uint64_t* row = table.row(r);
      for (std::size_t i = 0; i < table.row_words(); ++i) write_le64(out, row[i]);
    }
  } else {
    const CipherTable& table = impl_->cipher_table(name);
    std::shared_lock lock(table.mutex);
    const std::size_t cell = paillier::ciphertext_bytes(table.key);
    out << "s4-ptable-bin/1 cell_bytes=" << cell << " rows=" << table.ids.size() << '\n';
    std::vector<unsigned char> bytes(cell);
    for (std::size_t r = 0; r < table.ids.size(); ++r) {
      write_le64(out, table.ids[r]);
      std::fill(bytes.begin(), bytes.end(), 0);
      std::size_t count = 0;
      mpz_export(bytes.data(), &count, -1, 1, 0, 0, table.cells[r].get_mpz_t());
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(cell));
    }
  }
  if (!out.flush()) throw Error(ErrorKind::kIo, "write failed: " + path.string());
  return path;
}

PayloadBytes Store::payload_bytes(const std::string& name) const {
  const fs::path bin = export_binary(name);
  PayloadBytes bytes;

  // Binary: file size minus the header line and the per-row ids.
  const std::string header = read_first_line(bin);
  const auto rows_at = header.rfind("rows=");
  if (rows_at == std::string::npos) throw Error(ErrorKind::kFormat, bin.string() + ": header lacks rows=");
  const std::uint64_t rows = parse_id(std::string_view(header).substr(rows_at + 5));
  bytes.binary = fs::file_size(bin) - (header.size() + 1) - 8 * rows;

  // Text: every character of every non-id cell in the CSV.
  std::ifstream in(impl_->csv_path(name));
  std::string line;
  if (!in || !std::getline(in, line)) throw Error(ErrorKind::kIo, "cannot read table " + name);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::string_view cells = std::string_view(line).substr(comma + 1);
    bytes.text += cells.size() - static_cast<std::size_t>(std::count(cells.begin(), cells.end(), ','));
  }
  return bytes;
}

}  // namespace s4::csp

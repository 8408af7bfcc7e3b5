#include "s4/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "s4/csp_store.hpp"
#include "s4/error.hpp"
#include "s4/paillier.hpp"
#include "s4/scheme.hpp"

namespace s4::bench {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kChunk = 4096;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

bool wants(const BenchConfig& config, Phase phase) {
  return std::find(config.phases.begin(), config.phases.end(), phase) != config.phases.end();
}

int scheme_rank(Scheme s) { return s == Scheme::kS4 ? 0 : 1; }

std::string table_name(Scheme scheme, std::size_t param, std::uint64_t m) {
  return (scheme == Scheme::kS4 ? "s4_k" : "paillier_b") + std::to_string(param) + "_m" + std::to_string(m);
}

// Runs `body` repetitions + 1 times, drops the warm-up and returns the median.
// body(final) returns the time it measured itself.
template <typename Body>
double timed(unsigned repetitions, Body&& body) {
  std::vector<double> samples;
  for (unsigned rep = 0; rep <= repetitions; ++rep) {
    const double t = body(rep == repetitions);
    if (rep > 0) samples.push_back(t);
  }
  return median(std::move(samples));
}

class Logger {
 public:
  explicit Logger(std::ostream* out) : out_(out) {}
  template <typename... Args>
  void operator()(const Args&... args) const {
    if (!out_) return;
    ((*out_) << ... << args) << std::endl;
  }

 private:
  std::ostream* out_;
};

struct Context {
  const BenchConfig& config;
  csp::Store& store;
  Logger log;
  std::vector<BenchRecord>& records;

  void add(Scheme scheme, std::size_t param, std::uint64_t m, Phase phase, double value) {
    records.push_back({scheme, param, m, phase, phase == Phase::kStorage ? "bytes" : "seconds", value});
  }
};

BigUint plaintext_sum(const std::vector<BigUint>& values) {
  BigUint sum = 0;
  for (const auto& v : values) sum += v;
  return sum;
}

void run_s4(Context& ctx, std::size_t k, std::uint64_t m, const std::vector<BigUint>& data, const BigUint& expected,
            DeterministicRandom& rng) {
  const BenchConfig& config = ctx.config;
  const BigUint p = next_prime(BigUint(static_cast<unsigned long>(m)) * static_cast<unsigned long>(config.value_high));
  const PrivateKey key = keygen(k, p, rng);
  const std::string name = table_name(Scheme::kS4, k, m);
  ctx.store.create_table(name, k, p);
  ctx.log("S4 k=", k, " m=", m, " p=", to_decimal(p));

  // Splitting; the final pass also feeds the store (ingest is not timed).
  auto split_pass = [&](bool ingest) {
    double elapsed = 0;
    std::vector<csp::SplitRecord> batch;
    batch.reserve(kChunk);
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
      const std::size_t end = std::min(data.size(), start + kChunk);
      batch.clear();
      const auto t0 = Clock::now();
      for (std::size_t j = start; j < end; ++j) {
        batch.push_back({j + 1, split(Secret{data[j]}, key, rng).splits});
      }
      elapsed += seconds_since(t0);
      if (ingest) ctx.store.ingest(name, batch);
    }
    return elapsed;
  };
  if (wants(config, Phase::kSplit)) {
    ctx.add(Scheme::kS4, k, m, Phase::kSplit, timed(config.repetitions, split_pass));
  } else {
    split_pass(true);
  }

  if (wants(config, Phase::kReconstruct)) {
    std::vector<SplitVector> rows;
    rows.reserve(data.size());
    for (auto& row : ctx.store.rows(name, csp::Selection::all())) rows.push_back({std::move(row.splits)});
    std::vector<Secret> out(rows.size());
    const double t = timed(config.repetitions, [&](bool) {
      const auto t0 = Clock::now();
      for (std::size_t j = 0; j < rows.size(); ++j) out[j] = reconstruct(rows[j], key);
      return seconds_since(t0);
    });
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (out[j].value != data[j]) throw Error(ErrorKind::kInconsistent, "S4 reconstruction mismatch in " + name);
    }
    ctx.add(Scheme::kS4, k, m, Phase::kReconstruct, t);
  }

  if (wants(config, Phase::kSum)) {
    Secret result;
    const double t = timed(config.repetitions, [&](bool) {
      const auto t0 = Clock::now();
      result = finalize_sum(ctx.store.sum_splits(name, csp::Selection::all()), key);
      return seconds_since(t0);
    });
    if (result.value != expected) {
      throw Error(ErrorKind::kInconsistent, "S4 SUM " + to_decimal(result.value) + " != plaintext " +
                                                to_decimal(expected) + " in " + name);
    }
    ctx.add(Scheme::kS4, k, m, Phase::kSum, t);
  }

  if (wants(config, Phase::kStorage)) {
    const csp::PayloadBytes bytes = ctx.store.payload_bytes(name);
    ctx.log("storage ", name, " binary=", bytes.binary, " text=", bytes.text);
    ctx.add(Scheme::kS4, k, m, Phase::kStorage, static_cast<double>(bytes.binary));
  }
}

void run_paillier(Context& ctx, const paillier::KeyPair& key, std::uint64_t m, const std::vector<BigUint>& data,
                  const BigUint& expected, DeterministicRandom& rng) {
  const BenchConfig& config = ctx.config;
  const std::size_t bits = config.paillier_bits;
  const std::string name = table_name(Scheme::kPaillier, bits, m);
  ctx.store.create_ciphertext_table(name, key.pub);
  ctx.log("Paillier bits=", bits, " m=", m);

  auto encrypt_pass = [&](bool ingest) {
    double elapsed = 0;
    std::vector<csp::CiphertextRecord> batch;
    batch.reserve(kChunk);
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
      const std::size_t end = std::min(data.size(), start + kChunk);
      batch.clear();
      const auto t0 = Clock::now();
      for (std::size_t j = start; j < end; ++j) batch.push_back({j + 1, paillier::encrypt(data[j], key.pub, rng)});
      elapsed += seconds_since(t0);
      if (ingest) ctx.store.ingest_ciphertexts(name, batch);
    }
    return elapsed;
  };
  if (wants(config, Phase::kSplit)) {
    ctx.add(Scheme::kPaillier, bits, m, Phase::kSplit, timed(config.repetitions, encrypt_pass));
  } else {
    encrypt_pass(true);
  }

  if (wants(config, Phase::kReconstruct)) {
    const auto rows = ctx.store.ciphertexts(name, csp::Selection::all());
    std::vector<BigUint> out(rows.size());
    const double t = timed(config.repetitions, [&](bool) {
      const auto t0 = Clock::now();
      for (std::size_t j = 0; j < rows.size(); ++j) out[j] = paillier::decrypt(rows[j].c, key);
      return seconds_since(t0);
    });
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (out[j] != data[j]) throw Error(ErrorKind::kInconsistent, "Paillier decryption mismatch in " + name);
    }
    ctx.add(Scheme::kPaillier, bits, m, Phase::kReconstruct, t);
  }

  if (wants(config, Phase::kSum)) {
    BigUint result;
    const double t = timed(config.repetitions, [&](bool) {
      const auto t0 = Clock::now();
      result = paillier::decrypt(ctx.store.multiply_ciphertexts(name, csp::Selection::all()).product, key);
      return seconds_since(t0);
    });
    if (result != expected) {
      throw Error(ErrorKind::kInconsistent, "Paillier SUM " + to_decimal(result) + " != plaintext " +
                                                to_decimal(expected) + " in " + name);
    }
    ctx.add(Scheme::kPaillier, bits, m, Phase::kSum, t);
  }

  if (wants(config, Phase::kStorage)) {
    const csp::PayloadBytes bytes = ctx.store.payload_bytes(name);
    ctx.log("storage ", name, " binary=", bytes.binary, " text=", bytes.text);
    ctx.add(Scheme::kPaillier, bits, m, Phase::kStorage, static_cast<double>(bytes.binary));
  }
}

}  // namespace

std::string scheme_name(Scheme scheme) { return scheme == Scheme::kS4 ? "S4" : "Paillier"; }

std::string phase_name(Phase phase) {
  switch (phase) {
    case Phase::kSplit: return "split";
    case Phase::kReconstruct: return "reconstruct";
    case Phase::kSum: return "sum";
    case Phase::kStorage: return "storage";
  }
  return "?";
}

BenchConfig BenchConfig::small_grid() {
  BenchConfig config;
  config.m_list = {1000, 10000};
  config.paillier_max_m = 1000;
  config.repetitions = 3;
  return config;
}

void BenchConfig::validate() const {
  if (value_low >= value_high) throw Error(ErrorKind::kInvalidArgument, "value range is empty");
  if (repetitions == 0) throw Error(ErrorKind::kInvalidArgument, "repetitions must be >= 1");
  for (auto m : m_list) {
    if (m == 0) throw Error(ErrorKind::kInvalidArgument, "m must be >= 1");
  }
  for (auto k : k_list) {
    if (k < 2) throw Error(ErrorKind::kInvalidThreshold, "k must be >= 2");
  }
  if (paillier_bits < 64 || paillier_bits % 2) throw Error(ErrorKind::kInvalidArgument, "bad Paillier key size");
}

std::vector<BigUint> gen_dataset(std::uint64_t m, std::uint64_t low, std::uint64_t high, std::uint64_t seed) {
  if (low >= high) throw Error(ErrorKind::kInvalidArgument, "gen_dataset: empty range");
  DeterministicRandom rng(seed);
  std::vector<BigUint> out;
  out.reserve(m);
  for (std::uint64_t j = 0; j < m; ++j) {
    out.emplace_back(static_cast<unsigned long>(low + rng.below_u64(high - low)));
  }
  return out;
}

std::vector<GridCell> plan(const BenchConfig& config) {
  std::vector<Phase> phases = config.phases;
  std::sort(phases.begin(), phases.end());
  phases.erase(std::unique(phases.begin(), phases.end()), phases.end());
  std::vector<std::size_t> ks = config.k_list;
  std::sort(ks.begin(), ks.end());
  std::vector<std::uint64_t> ms = config.m_list;
  std::sort(ms.begin(), ms.end());

  std::vector<GridCell> cells;
  for (std::size_t k : ks) {
    for (auto m : ms) {
      for (Phase phase : phases) cells.push_back({Scheme::kS4, k, m, phase});
    }
  }
  for (auto m : ms) {
    if (m > config.paillier_max_m) continue;
    for (Phase phase : phases) cells.push_back({Scheme::kPaillier, config.paillier_bits, m, phase});
  }
  return cells;
}

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  config.validate();
  fs::path work = config.work_dir;
  if (work.empty()) {
    work = fs::temp_directory_path() / ("s4-bench-" + std::to_string(Clock::now().time_since_epoch().count()));
  }
  csp::Store store(work);
  std::vector<BenchRecord> records;
  Context ctx{config, store, Logger(config.log), records};
  ctx.log("work dir ", work.string());

  DeterministicRandom rng(config.seed ^ 0x5345435245545321ull);
  std::optional<paillier::KeyPair> paillier_key;
  for (auto m : config.m_list) {
    const auto data = gen_dataset(m, config.value_low, config.value_high, config.seed + m);
    const BigUint expected = plaintext_sum(data);
    for (auto k : config.k_list) run_s4(ctx, k, m, data, expected, rng);
    if (m <= config.paillier_max_m) {
      if (!paillier_key) paillier_key = paillier::keygen(config.paillier_bits, rng);
      run_paillier(ctx, *paillier_key, m, data, expected, rng);
    }
  }
  return records;
}

std::string format_csv(std::vector<BenchRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tuple(scheme_rank(a.scheme), a.param, a.m, static_cast<int>(a.phase)) <
           std::tuple(scheme_rank(b.scheme), b.param, b.m, static_cast<int>(b.phase));
  });
  std::ostringstream out;
  out << "scheme,param,m,phase,metric,value\n";
  char value[64];
  for (const auto& r : records) {
    if (r.metric == "bytes") {
      std::snprintf(value, sizeof(value), "%.0f", r.value);
    } else {
      std::snprintf(value, sizeof(value), "%.9g", r.value);
    }
    out << scheme_name(r.scheme) << ',' << (r.scheme == Scheme::kS4 ? "k=" : "bits=") << r.param << ',' << r.m
        << ',' << phase_name(r.phase) << ',' << r.metric << ',' << value << '\n';
  }
  return out.str();
}

void emit_csv(std::span<const BenchRecord> records, const fs::path& path) {
  if (records.empty()) throw Error(ErrorKind::kInvalidArgument, "emit_csv: no records");
  const std::string text = format_csv(std::vector<BenchRecord>(records.begin(), records.end()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

std::vector<Crossover> split_crossover(std::span<const BenchRecord> records) {
  std::map<std::uint64_t, double> paillier;
  std::map<std::uint64_t, std::map<std::size_t, double>> s4;
  for (const auto& r : records) {
    if (r.phase != Phase::kSplit) continue;
    if (r.scheme == Scheme::kPaillier) {
      paillier[r.m] = r.value;
    } else {
      s4[r.m][r.param] = r.value;
    }
  }
  std::vector<Crossover> out;
  for (const auto& [m, by_k] : s4) {
    auto it = paillier.find(m);
    if (it == paillier.end()) continue;
    Crossover c{m, std::nullopt};
    for (const auto& [k, t] : by_k) {
      if (t > it->second) {
        c.first_slower_k = k;
        break;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace s4::bench

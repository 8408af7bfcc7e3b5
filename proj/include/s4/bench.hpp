#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s4/bigint.hpp"

// Benchmark harness comparing S4 across k with Paillier: split/encrypt,
// reconstruct/decrypt, SUM over all rows, and serialized storage.
namespace s4::bench {

enum class Scheme { kS4, kPaillier };
enum class Phase { kSplit, kReconstruct, kSum, kStorage };

std::string scheme_name(Scheme scheme);
std::string phase_name(Phase phase);

struct BenchConfig {
  std::vector<std::uint64_t> m_list{1000, 10000, 100000, 1000000};
  std::vector<std::size_t> k_list{8, 16, 32, 64};
  std::size_t paillier_bits = 1024;
  std::uint64_t value_low = 1000;    // inclusive
  std::uint64_t value_high = 10000;  // exclusive
  std::uint64_t seed = 1;
  unsigned repetitions = 5;
  // Paillier runs are skipped for m above this cap.
  std::uint64_t paillier_max_m = 100000;
  std::vector<Phase> phases{Phase::kSplit, Phase::kReconstruct, Phase::kSum, Phase::kStorage};
  // Serialized tables are written here; a fresh temporary directory when empty.
  std::filesystem::path work_dir;
  // Progress and text-form storage figures; silent when null.
  std::ostream* log = nullptr;

  static BenchConfig default_grid() { return BenchConfig{}; }
  static BenchConfig small_grid();

  // Throws kInvalidArgument on an empty range, m == 0, k < 2 or zero repetitions.
  void validate() const;
};

struct BenchRecord {
  Scheme scheme = Scheme::kS4;
  std::size_t param = 0;  // k for S4, key bits for Paillier
  std::uint64_t m = 0;
  Phase phase = Phase::kSplit;
  std::string metric;  // "seconds" (median) or "bytes" (exact)
  double value = 0;
};

// m values uniform on [low, high), a fixed function of seed (and of nothing else).
std::vector<BigUint> gen_dataset(std::uint64_t m, std::uint64_t low, std::uint64_t high, std::uint64_t seed);

struct GridCell {
  Scheme scheme;
  std::size_t param;
  std::uint64_t m;
  Phase phase;
};

// The (scheme, param, m, phase) cells run_bench will report, in output order.
std::vector<GridCell> plan(const BenchConfig& config);

// Runs the grid. Every SUM is checked against the plaintext sum (and the two
// schemes against each other); a mismatch throws kInconsistent.
std::vector<BenchRecord> run_bench(const BenchConfig& config);

// Sorts by (scheme, param, m, phase) and renders
// `scheme,param,m,phase,metric,value`.
std::string format_csv(std::vector<BenchRecord> records);
void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path);

// Per dataset size: the smallest k whose split time exceeds Paillier
// encryption time; empty when S4 stays faster across the grid. Only sizes
// with both timings present are reported.
struct Crossover {
  std::uint64_t m = 0;
  std::optional<std::size_t> first_slower_k;
};
std::vector<Crossover> split_crossover(std::span<const BenchRecord> records);

}  // namespace s4::bench

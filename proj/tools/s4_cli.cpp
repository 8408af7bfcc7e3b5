// s4: command-line front end for key generation, outsourcing, queries,
// benchmarks and the known-plaintext attack demo.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "s4/attack.hpp"
#include "s4/bench.hpp"
#include "s4/csp_store.hpp"
#include "s4/error.hpp"
#include "s4/paillier.hpp"
#include "s4/query_client.hpp"
#include "s4/scheme.hpp"

namespace {

using s4::BigUint;
using s4::Error;
using s4::ErrorKind;

constexpr const char* kDefaultStore = "./csp-store";

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

s4::client::EncodingSpec encoding(unsigned decimals, const std::string& max_value) {
  s4::client::EncodingSpec spec;
  spec.decimals = decimals;
  if (!max_value.empty()) spec.max_value = s4::parse_decimal(max_value);
  return spec;
}

s4::csp::Selection selection(const std::vector<std::uint64_t>& ids, bool all) {
  if (all == !ids.empty()) throw Error(ErrorKind::kInvalidArgument, "give exactly one of --ids or --all");
  return all ? s4::csp::Selection::all() : s4::csp::Selection::of(ids);
}

struct KeygenArgs {
  std::size_t k = 0;
  std::string p;
  std::vector<std::string> auto_p;
  std::string out;
  unsigned decimals = 0;
  bool force = false;
};

int run_keygen(const KeygenArgs& args) {
  BigUint p;
  if (!args.p.empty()) {
    p = s4::parse_decimal(args.p);
  } else {
    const BigUint m = s4::parse_decimal(args.auto_p.at(0));
    if (!mpz_fits_ulong_p(m.get_mpz_t())) throw Error(ErrorKind::kInvalidArgument, "--auto-p m is too large");
    p = s4::client::auto_prime(m.get_ui(), s4::parse_decimal(args.auto_p.at(1)), encoding(args.decimals, ""));
  }
  if (args.k == 2) {
    std::cerr << "warning: k=2 uses no random nodes; each split is an affine function of its secret\n";
  }
  s4::SecureRandom rng;
  const s4::PrivateKey key = s4::keygen(args.k, p, rng);
  s4::write_key_file(key, args.out, args.force);
  std::cout << "key file=" << args.out << " k=" << key.k() << " p=" << s4::to_decimal(key.p())
            << " p_bits=" << s4::bit_length(key.p()) << '\n';
  return 0;
}

struct OutsourceArgs {
  std::string key, in, table, store = kDefaultStore, max_value;
  unsigned decimals = 0;
  bool reconstruct_all = false;
};

int run_outsource(const OutsourceArgs& args) {
  const s4::PrivateKey key = s4::read_key_file(args.key);
  const auto spec = encoding(args.decimals, args.max_value);
  const auto values = read_lines(args.in);
  s4::csp::Store store(args.store);
  s4::SecureRandom rng;
  const std::size_t rows = s4::client::outsource(values, key, spec, store, args.table, rng);
  std::cout << "outsourced table=" << args.table << " added=" << values.size() << " rows=" << rows << '\n';
  if (args.reconstruct_all) {
    for (const auto& [id, secret] : s4::client::reconstruct_rows(store, args.table, key)) {
      std::cout << "row id=" << id << " value=" << s4::client::decode(secret.value, spec) << '\n';
    }
  }
  return 0;
}

struct QueryArgs {
  std::string key, table, store = kDefaultStore, op = "sum";
  std::vector<std::uint64_t> ids;
  bool all = false;
  unsigned decimals = 0;
};

int run_query(const QueryArgs& args) {
  const s4::csp::Store store(args.store);
  const auto sel = selection(args.ids, args.all);
  s4::client::QueryResult result;
  if (args.op == "count") {
    result = s4::client::count_query(store, args.table, sel);
  } else {
    if (args.key.empty()) throw Error(ErrorKind::kInvalidArgument, "--key is required for " + args.op);
    const s4::PrivateKey key = s4::read_key_file(args.key);
    const auto spec = encoding(args.decimals, "");
    result = args.op == "sum" ? s4::client::sum_query(store, args.table, sel, key, spec)
                              : s4::client::avg_query(store, args.table, sel, key, spec);
  }
  std::cout << result.to_json() << '\n';
  return 0;
}

struct BenchArgs {
  std::string grid = "small", out, phases;
  std::vector<std::uint64_t> m;
  std::vector<std::size_t> k;
  std::optional<unsigned> reps;
  std::optional<std::uint64_t> paillier_max_m, seed;
  std::optional<std::size_t> paillier_bits;
};

int run_bench(const BenchArgs& args) {
  namespace bench = s4::bench;
  bench::BenchConfig config = args.grid == "default" ? bench::BenchConfig::default_grid()
                                                     : bench::BenchConfig::small_grid();
  if (!args.m.empty()) config.m_list = args.m;
  if (!args.k.empty()) config.k_list = args.k;
  if (args.reps) config.repetitions = *args.reps;
  if (args.paillier_max_m) config.paillier_max_m = *args.paillier_max_m;
  if (args.paillier_bits) config.paillier_bits = *args.paillier_bits;
  if (args.seed) config.seed = *args.seed;
  if (!args.phases.empty()) {
    const std::map<std::string, bench::Phase> names{{"split", bench::Phase::kSplit},
                                                    {"reconstruct", bench::Phase::kReconstruct},
                                                    {"sum", bench::Phase::kSum},
                                                    {"storage", bench::Phase::kStorage}};
    config.phases.clear();
    std::stringstream in(args.phases);
    std::string name;
    while (std::getline(in, name, ',')) {
      auto it = names.find(name);
      if (it == names.end()) throw Error(ErrorKind::kInvalidArgument, "unknown phase " + name);
      config.phases.push_back(it->second);
    }
  }

  std::filesystem::path result_dir = ".";
  if (const char* env = std::getenv("S4_BENCH_DIR"); env && *env) result_dir = env;
  std::filesystem::create_directories(result_dir);
  config.work_dir = result_dir / "tables";
  std::filesystem::remove_all(config.work_dir);
  config.log = &std::cerr;
  const std::filesystem::path out = args.out.empty() ? result_dir / "bench.csv" : std::filesystem::path(args.out);

  const auto records = bench::run_bench(config);
  bench::emit_csv(records, out);
  std::cout << "bench csv=" << out.string() << " rows=" << records.size() << '\n';
  for (const auto& c : bench::split_crossover(records)) {
    std::cout << "crossover m=" << c.m << " first_slower_k="
              << (c.first_slower_k ? std::to_string(*c.first_slower_k) : "none") << '\n';
  }
  return 0;
}

struct AttackArgs {
  std::string table, store = kDefaultStore, known, key;
};

int run_attack(const AttackArgs& args) {
  const s4::csp::Store store(args.store);
  const auto info = store.info(args.table);
  const auto rows = store.rows(args.table, s4::csp::Selection::all());
  std::map<s4::csp::RecordId, const s4::csp::SplitRecord*> by_id;
  for (const auto& row : rows) by_id[row.id] = &row;

  std::vector<s4::attack::KnownPair> pairs;
  for (const auto& line : read_lines(args.known)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::kFormat, "known pair line must be id,secret: " + line);
    const BigUint id = s4::parse_decimal(line.substr(0, comma));
    auto it = mpz_fits_ulong_p(id.get_mpz_t()) ? by_id.find(id.get_ui()) : by_id.end();
    if (it == by_id.end()) throw Error(ErrorKind::kUnknownId, "no row " + line.substr(0, comma));
    pairs.push_back({s4::parse_decimal(line.substr(comma + 1)), it->second->splits});
  }

  const auto basis = s4::attack::recover_basis(pairs, info.p);
  std::cout << "basis";
  for (std::size_t i = 0; i < basis.lambdas.size(); ++i) {
    std::cout << " lambda" << (i + 1) << '=' << s4::to_decimal(basis.lambdas[i]);
  }
  std::cout << " c=" << s4::to_decimal(basis.c) << '\n';
  const auto secrets = s4::attack::recover_secrets(basis, rows, info.p);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    std::cout << "secret id=" << rows[j].id << " value=" << s4::to_decimal(secrets[j]) << '\n';
  }

  if (!args.key.empty()) {
    const s4::PrivateKey key = s4::read_key_file(args.key);
    std::size_t exact = 0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (s4::reconstruct(s4::SplitVector{rows[j].splits}, key).value == secrets[j]) ++exact;
    }
    bool basis_match = true;
    for (std::size_t i = 0; i < basis.lambdas.size(); ++i) basis_match &= basis.lambdas[i] == key.basis0()[i];
    basis_match &= basis.c == key.anchor().y * key.basis0().back() % key.p();
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.2f", rows.empty() ? 100.0 : 100.0 * exact / rows.size());
    std::cout << "scorecard exact=" << exact << " total=" << rows.size() << " rate=" << rate
              << "% basis_match=" << (basis_match ? "true" : "false") << '\n';
  }
  return 0;
}

int run_paillier_selftest(std::size_t bits, unsigned trials) {
  s4::SecureRandom rng;
  const auto key = s4::paillier::keygen(bits, rng);
  const BigUint half = key.pub.n / 2;
  unsigned ok = 0;
  std::size_t max_bits = 0;
  for (unsigned t = 0; t < trials; ++t) {
    const BigUint x = rng.below(half), y = rng.below(half);
    const auto cx = s4::paillier::encrypt(x, key.pub, rng);
    const auto cy = s4::paillier::encrypt(y, key.pub, rng);
    max_bits = std::max({max_bits, s4::bit_length(cx.c), s4::bit_length(cy.c)});
    const bool round_trip = s4::paillier::decrypt(cx, key) == x;
    const bool additive = s4::paillier::decrypt(s4::paillier::add(cx, cy, key.pub), key) == x + y;
    if (round_trip && additive) ++ok;
  }
  const bool pass = ok == trials && max_bits <= 2 * bits;
  std::cout << "paillier bits=" << key.pub.bits << " trials=" << trials << " ok=" << ok
            << " max_ciphertext_bits=" << max_bits << " fingerprint=" << s4::paillier::fingerprint(key.pub.n)
            << " result=" << (pass ? "pass" : "fail") << '\n';
  return pass ? 0 : s4::exit_code(ErrorKind::kInconsistent);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S4 secret splitting: outsourced SUM/COUNT/AVG over a curious store"};
  app.require_subcommand(1);

  KeygenArgs keygen_args;
  auto* keygen = app.add_subcommand("keygen", "Generate a private key file");
  keygen->add_option("--k", keygen_args.k, "Threshold k (>= 2)")->required();
  auto* p_opt = keygen->add_option("--p", keygen_args.p, "Field prime, decimal");
  auto* auto_opt = keygen->add_option("--auto-p", keygen_args.auto_p, "Size p for M rows of values <= MAX")
                       ->expected(2);
  p_opt->excludes(auto_opt);
  keygen->add_option("--decimals", keygen_args.decimals, "Fixed-point decimals assumed by --auto-p");
  keygen->add_option("--out", keygen_args.out, "Key file to write")->required();
  keygen->add_flag("--force", keygen_args.force, "Overwrite an existing key file");

  OutsourceArgs outsource_args;
  auto* outsource = app.add_subcommand("outsource", "Split values and append them to a store table");
  outsource->add_option("--key", outsource_args.key)->required();
  outsource->add_option("--in", outsource_args.in, "One decimal value per line")->required();
  outsource->add_option("--table", outsource_args.table)->required();
  outsource->add_option("--store", outsource_args.store, "Store directory");
  outsource->add_option("--decimals", outsource_args.decimals, "Fixed-point decimals");
  outsource->add_option("--max-value", outsource_args.max_value, "Reject values above this");
  outsource->add_flag("--reconstruct-all", outsource_args.reconstruct_all, "Print every stored row decrypted");

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "Run SUM, COUNT or AVG over a table");
  query->add_option("--key", query_args.key, "Key file (not needed for count)");
  query->add_option("--table", query_args.table)->required();
  query->add_option("--store", query_args.store, "Store directory");
  query->add_option("--op", query_args.op)->check(CLI::IsMember({"sum", "count", "avg"}));
  auto* ids_opt = query->add_option("--ids", query_args.ids, "Record ids");
  auto* all_opt = query->add_flag("--all", query_args.all, "Every row");
  ids_opt->excludes(all_opt);
  query->add_option("--decimals", query_args.decimals, "Fixed-point decimals");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Benchmark S4 against Paillier (results dir: $S4_BENCH_DIR)");
  bench->add_option("--grid", bench_args.grid)->check(CLI::IsMember({"default", "small"}));
  bench->add_option("--out", bench_args.out, "CSV output path");
  bench->add_option("--m", bench_args.m, "Dataset sizes");
  bench->add_option("--k", bench_args.k, "Thresholds");
  bench->add_option("--reps", bench_args.reps, "Timed repetitions");
  bench->add_option("--paillier-max-m", bench_args.paillier_max_m, "Largest m run under Paillier");
  bench->add_option("--paillier-bits", bench_args.paillier_bits, "Paillier key size");
  bench->add_option("--seed", bench_args.seed);
  bench->add_option("--phases", bench_args.phases, "Comma list of split,reconstruct,sum,storage");

  AttackArgs attack_args;
  auto* attack = app.add_subcommand("attack-demo", "Known-plaintext recovery as the store would run it");
  attack->add_option("--table", attack_args.table)->required();
  attack->add_option("--store", attack_args.store, "Store directory");
  attack->add_option("--known", attack_args.known, "Lines of id,secret")->required();
  attack->add_option("--key", attack_args.key, "Key file, enables the scorecard");

  std::size_t selftest_bits = 1024;
  unsigned selftest_trials = 10;
  auto* selftest = app.add_subcommand("paillier-selftest", "Check Paillier round trips and additivity");
  selftest->add_option("--bits", selftest_bits);
  selftest->add_option("--trials", selftest_trials);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*keygen) {
      if (keygen_args.p.empty() && keygen_args.auto_p.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "give --p or --auto-p");
      }
      return run_keygen(keygen_args);
    }
    if (*outsource) return run_outsource(outsource_args);
    if (*query) return run_query(query_args);
    if (*bench) return run_bench(bench_args);
    if (*attack) return run_attack(attack_args);
    if (*selftest) return run_paillier_selftest(selftest_bits, selftest_trials);
  } catch (const Error& e) {
    std::cerr << "error kind=" << s4::error_kind_name(e.kind()) << " message=\"" << e.message() << "\"\n";
    return s4::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error kind=Internal message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 2;
}

#include <fstream>
#include <map>
#include <sstream>

#include "s4/error.hpp"
#include "s4/scheme.hpp"

namespace s4 {

namespace {

constexpr std::string_view kKeyMagic = "s4-key/1";

}  // namespace

std::string format_key(const PrivateKey& key) {
  std::ostringstream out;
  out << kKeyMagic << '\n';
  out << "p=" << to_decimal(key.p()) << '\n';
  out << "k=" << key.k() << '\n';
  for (std::size_t i = 0; i < key.xs().size(); ++i) {
    out << 'x' << (i + 1) << '=' << to_decimal(key.xs()[i]) << '\n';
  }
  out << "anchor_x=" << to_decimal(key.anchor().x) << '\n';
  out << "anchor_v=" << to_decimal(key.anchor().y) << '\n';
  return out.str();
}

PrivateKey parse_key(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kKeyMagic) {
    throw Error(ErrorKind::kFormat, "key file must start with 's4-key/1'");
  }
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kFormat, "bad key line: " + line);
    if (!fields.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
      throw Error(ErrorKind::kFormat, "repeated key field: " + line.substr(0, eq));
    }
  }
  auto take = [&](const std::string& name) {
    auto it = fields.find(name);
    if (it == fields.end()) throw Error(ErrorKind::kFormat, "key file lacks field " + name);
    BigUint value = parse_decimal(it->second);
    fields.erase(it);
    return value;
  };

  BigUint p = take("p");
  const BigUint k = take("k");
  if (k < 2) throw Error(ErrorKind::kInvalidThreshold, "k must be >= 2");
  if (k > 1u << 20) throw Error(ErrorKind::kFormat, "implausible k");
  std::vector<BigUint> xs;
  for (unsigned long i = 1; i < k.get_ui(); ++i) xs.push_back(take("x" + std::to_string(i)));
  FieldPoint anchor{take("anchor_x"), take("anchor_v")};
  if (!fields.empty()) throw Error(ErrorKind::kFormat, "unexpected key field " + fields.begin()->first);
  return PrivateKey::from_parts(std::move(p), std::move(xs), std::move(anchor));
}

void write_key_file(const PrivateKey& key, const std::filesystem::path& path, bool overwrite) {
  namespace fs = std::filesystem;
  if (!overwrite && fs::exists(path)) {
    throw Error(ErrorKind::kIo, "refusing to overwrite existing key file " + path.string());
  }
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    // Restrict before the secret bytes land in the file.
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
    out << format_key(key);
    if (!out.flush()) throw Error(ErrorKind::kIo, "write failed: " + path.string());
  }
}

PrivateKey read_key_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open key file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_key(buffer.str());
}

}  // namespace s4

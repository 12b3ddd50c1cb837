#include "leap/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace leap {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::baseline: return "baseline";
    case Strategy::cbpd: return "cbpd";
    case Strategy::leap: return "leap";
  }
  return "?";
}

std::string to_string(VisibilityMode m) {
  return m == VisibilityMode::augment ? "augment" : "replace";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "baseline") return Strategy::baseline;
  if (s == "cbpd") return Strategy::cbpd;
  if (s == "leap") return Strategy::leap;
  throw DataError("unknown strategy: " + s);
}

VisibilityMode visibility_mode_from_string(const std::string& s) {
  if (s == "augment") return VisibilityMode::augment;
  if (s == "replace") return VisibilityMode::replace;
  throw DataError("unknown visibility mode: " + s);
}

void DecodeConfig::validate() const {
  if (!(phi > 0.0 && phi <= 1.0)) throw DataError("phi must be in (0,1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw DataError("tau must be in (0,1]");
  if (!(eta > 0.0 && eta <= 1.0)) throw DataError("eta must be in (0,1]");
  if (block_size < 1) throw DataError("block_size must be >= 1");
  if (gen_len < 1) throw DataError("gen_len must be >= 1");
  if (gen_len % block_size != 0)
    throw DataError("gen_len must be a multiple of block_size");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

constexpr std::array kKnownKeys = {
    // decoder
    "strategy", "phi", "tau", "eta", "block_size", "visibility_mode",
    "union_cbpd", "gen_len", "seed",
    // harness
    "backend", "weights", "spec", "n", "len", "alpha",
};

}  // namespace

std::string KeyValueFile::get_string(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw DataError("missing config key: " + key);
  return it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw DataError("");
    return d;
  } catch (...) {
    throw DataError("config key " + key + ": not a number: " + v);
  }
}

int KeyValueFile::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    long d = std::stol(v, &used);
    if (used != v.size()) throw DataError("");
    return static_cast<int>(d);
  } catch (...) {
    throw DataError("config key " + key + ": not an integer: " + v);
  }
}

std::uint64_t KeyValueFile::get_u64(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    unsigned long long d = std::stoull(v, &used);
    if (used != v.size()) throw DataError("");
    return d;
  } catch (...) {
    throw DataError("config key " + key + ": not an unsigned integer: " + v);
  }
}

bool KeyValueFile::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config key " + key + ": not a boolean: " + v);
}

KeyValueFile parse_key_value_text(const std::string& text) {
  KeyValueFile out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected `key = value`");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw DataError("config line " + std::to_string(lineno) +
                      ": empty key or value");
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) ==
        kKnownKeys.end())
      throw DataError("config line " + std::to_string(lineno) +
                      ": unknown key: " + key);
    if (out.values.count(key))
      throw DataError("config line " + std::to_string(lineno) +
                      ": duplicate key: " + key);
    out.values[key] = value;
  }
  return out;
}

KeyValueFile load_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_value_text(ss.str());
}

std::optional<std::uint64_t> apply_config_file(DecodeConfig& cfg,
                                               const KeyValueFile& file) {
  if (file.has("strategy"))
    cfg.strategy = strategy_from_string(file.get_string("strategy"));
  if (file.has("phi")) cfg.phi = file.get_double("phi");
  if (file.has("tau")) cfg.tau = file.get_double("tau");
  if (file.has("eta")) cfg.eta = file.get_double("eta");
  if (file.has("block_size")) cfg.block_size = file.get_int("block_size");
  if (file.has("visibility_mode"))
    cfg.visibility_mode =
        visibility_mode_from_string(file.get_string("visibility_mode"));
  if (file.has("union_cbpd")) cfg.union_cbpd = file.get_bool("union_cbpd");
  if (file.has("gen_len")) cfg.gen_len = file.get_int("gen_len");
  std::optional<std::uint64_t> seed;
  if (file.has("seed")) seed = file.get_u64("seed");
  return seed;
}

}  // namespace leap

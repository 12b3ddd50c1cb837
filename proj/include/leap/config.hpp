#pragma once

#include "leap/error.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace leap {

enum class Strategy { baseline, cbpd, leap };
enum class VisibilityMode { augment, replace };

std::string to_string(Strategy s);
std::string to_string(VisibilityMode m);
Strategy strategy_from_string(const std::string& s);
VisibilityMode visibility_mode_from_string(const std::string& s);

/// Decoder configuration shared by every strategy.
///
/// phi is the strict (>) confidence threshold of parallel decoding, tau the
/// inclusive (>=) gate on early decodes, eta the inclusive (>=) candidate
/// pruning threshold. Defaults follow the reference operating point
/// (phi 0.9, tau 0.7, eta 0.2, block size 32).
struct DecodeConfig {
  Strategy strategy = Strategy::cbpd;
  double phi = 0.9;
  double tau = 0.7;
  double eta = 0.2;
  int block_size = 32;
  VisibilityMode visibility_mode = VisibilityMode::augment;
  bool union_cbpd = false;
  int gen_len = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Flat `key = value` configuration file. Blank lines and `#` comments are
/// ignored; unknown keys are rejected. Harness-level keys (backend, weights,
/// spec, n, len, alpha) ride in the same file next to the decoder keys.
struct KeyValueFile {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
};

KeyValueFile load_key_value_file(const std::string& path);
KeyValueFile parse_key_value_text(const std::string& text);

/// Applies file values onto `cfg`. Only decoder keys are consumed; the seed
/// is returned separately so callers can require it explicitly.
std::optional<std::uint64_t> apply_config_file(DecodeConfig& cfg,
                                               const KeyValueFile& file);

}  // namespace leap

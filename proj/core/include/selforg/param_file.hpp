#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "selforg/params.hpp"

namespace selforg {

// Flat `key = value` text (UTF-8, '#' starts a comment). Each key may occur
// once. Consumers take() the keys they understand; whatever is left when
// reject_unconsumed() runs is an unknown key and a hard error.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValues load(const std::filesystem::path& path);

  // `key=value` from the command line; replaces an existing entry.
  void set_override(std::string_view assignment);
  void set(const std::string& key, const std::string& value);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> take(const std::string& key);
  std::optional<double> take_double(const std::string& key);
  std::optional<long long> take_int(const std::string& key);
  std::optional<bool> take_bool(const std::string& key);
  std::optional<std::vector<double>> take_doubles(const std::string& key);
  std::optional<std::vector<unsigned long long>> take_u64s(const std::string& key);

  void reject_unconsumed() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string where(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origin_;
  std::set<std::string> consumed_;
};

double parse_double(const std::string& text, const std::string& context);

// Reads the physical parameter keys (SI units) into an ExperimentParams,
// starting from the defaults. Keys not listed here are left for the caller.
ExperimentParams take_experiment_params(KeyValues& kv);

// Parameter-only file: every key must be a physical parameter.
ExperimentParams load_experiment_params(const std::filesystem::path& path);

// Writes every physical parameter, defaults expanded, as `key = value` lines.
void write_experiment_params(std::ostream& os, const ExperimentParams& p);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace selforg

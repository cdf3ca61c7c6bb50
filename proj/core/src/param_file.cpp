#include "selforg/param_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "selforg/error.hpp"

namespace selforg {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

double parse_double(const std::string& text, const std::string& context) {
  const auto t = trim(text);
  double v = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || t.empty()) {
    throw ConfigError(context + ": expected a number, got '" + t + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

KeyValues KeyValues::parse(std::string_view text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string loc = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(loc + ": expected 'key = value'");
    auto key = trim(std::string_view(body).substr(0, eq));
    auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(loc + ": empty key");
    if (kv.values_.count(key)) throw ConfigError(loc + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
    kv.origin_[key] = loc;
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValues::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const auto key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ConfigError("override with empty key");
  values_[key] = trim(assignment.substr(eq + 1));
  origin_[key] = "--override";
}

void KeyValues::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  origin_[key] = "<set>";
}

std::string KeyValues::where(const std::string& key) const {
  const auto it = origin_.find(key);
  return (it == origin_.end() ? std::string("<unknown>") : it->second) + ": " + key;
}

std::optional<std::string> KeyValues::take(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  consumed_.insert(key);
  return it->second;
}

std::optional<double> KeyValues::take_double(const std::string& key) {
  auto s = take(key);
  if (!s) return std::nullopt;
  return parse_double(*s, where(key));
}

std::optional<long long> KeyValues::take_int(const std::string& key) {
  auto s = take(key);
  if (!s) return std::nullopt;
  long long v = 0;
  const auto t = trim(*s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(where(key) + ": expected an integer, got '" + t + "'");
  }
  return v;
}

std::optional<bool> KeyValues::take_bool(const std::string& key) {
  auto s = take(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
  if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
  throw ConfigError(where(key) + ": expected a boolean, got '" + *s + "'");
}

std::optional<std::vector<double>> KeyValues::take_doubles(const std::string& key) {
  auto s = take(key);
  if (!s) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split_list(*s)) out.push_back(parse_double(item, where(key)));
  return out;
}

std::optional<std::vector<unsigned long long>> KeyValues::take_u64s(const std::string& key) {
  auto s = take(key);
  if (!s) return std::nullopt;
  std::vector<unsigned long long> out;
  for (const auto& item : split_list(*s)) {
    unsigned long long v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw ConfigError(where(key) + ": expected unsigned integers, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

void KeyValues::reject_unconsumed() const {
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) throw ConfigError(where(key) + ": unknown key");
  }
}

ExperimentParams take_experiment_params(KeyValues& kv) {
  ExperimentParams p;
  auto set = [&kv](const char* key, double& field) {
    if (auto v = kv.take_double(key)) field = *v;
  };
  set("atom_number", p.atom_number);
  set("pump_wavelength", p.pump_wavelength);
  set("atom_mass", p.atom_mass);
  set("cavity_decay", p.cavity_decay);
  set("pump_cavity_detuning", p.pump_cavity_detuning);
  set("single_atom_lightshift", p.single_atom_lightshift);
  set("pump_power", p.pump_power);
  set("calibration", p.calibration);
  set("trap_frequency_x", p.trap_frequencies[0]);
  set("trap_frequency_y", p.trap_frequencies[1]);
  set("trap_frequency_z", p.trap_frequencies[2]);
  set("cavity_waist", p.cavity_waist);
  set("pump_waist_x", p.pump_waists[0]);
  set("pump_waist_y", p.pump_waists[1]);
  set("scattering_length", p.scattering_length);
  const bool has_power = kv.contains("pump_power");
  if (auto depth = kv.take_double("pump_depth")) {
    if (has_power) throw ConfigError("pump_depth and pump_power are mutually exclusive");
    p.pump_depth = *depth;
  }
  validate(p);
  return p;
}

ExperimentParams load_experiment_params(const std::filesystem::path& path) {
  auto kv = KeyValues::load(path);
  auto p = take_experiment_params(kv);
  kv.reject_unconsumed();
  return p;
}

void write_experiment_params(std::ostream& os, const ExperimentParams& p) {
  auto line = [&os](const char* key, double v) { os << key << " = " << format_double(v) << '\n'; };
  line("atom_number", p.atom_number);
  line("pump_wavelength", p.pump_wavelength);
  line("atom_mass", p.atom_mass);
  line("cavity_decay", p.cavity_decay);
  line("pump_cavity_detuning", p.pump_cavity_detuning);
  line("single_atom_lightshift", p.single_atom_lightshift);
  if (p.pump_depth) {
    line("pump_depth", *p.pump_depth);
  } else {
    line("pump_power", p.pump_power);
  }
  line("calibration", p.calibration);
  line("trap_frequency_x", p.trap_frequencies[0]);
  line("trap_frequency_y", p.trap_frequencies[1]);
  line("trap_frequency_z", p.trap_frequencies[2]);
  line("cavity_waist", p.cavity_waist);
  line("pump_waist_x", p.pump_waists[0]);
  line("pump_waist_y", p.pump_waists[1]);
  line("scattering_length", p.scattering_length);
}

}  // namespace selforg

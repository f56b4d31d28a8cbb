#include "vibronic/model.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace vibronic {

const char* to_string(ElectronicState z) {
  switch (z) {
    case ElectronicState::G:
      return "g";
    case ElectronicState::E:
      return "e";
    case ElectronicState::CT:
      return "ct";
    case ElectronicState::A:
      return "a";
  }
  return "?";
}

std::optional<ElectronicState> state_from_string(std::string_view s) {
  if (s == "g") return ElectronicState::G;
  if (s == "e") return ElectronicState::E;
  if (s == "ct") return ElectronicState::CT;
  if (s == "a") return ElectronicState::A;
  return std::nullopt;
}

int VibronicBasis::index_of(ElectronicState z, int n1, int n2) const {
  if (n1 < 0 || n1 >= trunc[0] || n2 < 0 || n2 >= trunc[1])
    throw std::out_of_range("quantum number outside truncation: n1=" + std::to_string(n1) +
                            " n2=" + std::to_string(n2));
  return (static_cast<int>(z) * trunc[0] + n1) * trunc[1] + n2;
}

VibronicBasis::Level VibronicBasis::state_of(int index) const {
  if (index < 0 || index >= dim()) throw std::out_of_range("basis index out of range");
  const int n2 = index % trunc[1];
  const int rest = index / trunc[1];
  const int n1 = rest % trunc[0];
  return {static_cast<ElectronicState>(rest / trunc[0]), n1, n2};
}

void ModelParams::validate() const {
  for (int k = 0; k < 2; ++k) {
    if (!(nu[k] > 0.0)) throw ConfigError("frequency must be positive: nu" + std::to_string(k + 1));
    if (gamma_vib[k] < 0.0)
      throw ConfigError("rate must be non-negative: gamma" + std::to_string(k + 1));
    if (trunc[k] < 2)
      throw ConfigError("truncation must be at least 2: trunc" + std::to_string(k + 1));
  }
  if (rate_sep < 0.0) throw ConfigError("rate must be non-negative: Gamma_sep");
  if (rate_rec < 0.0) throw ConfigError("rate must be non-negative: Gamma_rec");
  for (auto z : kStates) {
    if (gamma_deph[static_cast<int>(z)] < 0.0)
      throw ConfigError(std::string("rate must be non-negative: Gamma.") + to_string(z));
  }
  if (gamma_deph[static_cast<int>(ElectronicState::A)] != 0.0)
    throw ConfigError("Gamma.a must be zero (no dephasing channel on the acceptor)");
  if (g < 0.0) throw ConfigError("coupling g must be non-negative");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  const double gap = eps_of(ElectronicState::CT) - eps_of(ElectronicState::E);
  if (std::abs(delta - gap) > 1e-12 * std::max(1.0, std::abs(delta)))
    throw ConfigError("delta inconsistent with eps.ct - eps.e");
  for (int k = 0; k < 2; ++k) {
    if (alpha[k][static_cast<int>(ElectronicState::E)] != 0.0)
      throw ConfigError("alpha." + std::to_string(k + 1) + ".e must be zero by definition");
  }
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw ConfigError("value for key '" + key + "' is not a number: '" + text + "'");
  return v;
}

long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0')
    throw ConfigError("value for key '" + key + "' is not an integer: '" + text + "'");
  return v;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string prefix;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line = trim(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto h = line.find_first_of("#;"); h != std::string::npos) line = trim(line.substr(0, h));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(lineno));
      prefix = trim(line.substr(1, line.size() - 2));
      if (!prefix.empty()) prefix += '.';
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = prefix + trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    if (cfg.kv_.count(key)) throw ConfigError("duplicate key: " + key);
    cfg.kv_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::apply_overrides(const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must have the form key=value: '" + s + "'");
    kv_[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
}

double Config::get_real(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key: " + key);
  return parse_real(key, it->second);
}

double Config::get_real_or(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_real(key, it->second);
}

long Config::get_int(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key: " + key);
  return parse_int(key, it->second);
}

long Config::get_int_or(const std::string& key, long fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_int(key, it->second);
}

std::string Config::get_string_or(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("value for key '" + key + "' is not a boolean");
}

namespace {

const std::set<std::string>& model_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{"delta", "g",         "nu1",      "nu2",    "gamma1",
                            "gamma2", "Gamma_sep", "Gamma_rec", "trunc1", "trunc2"};
    for (const char* z : {"g", "e", "ct", "a"}) {
      for (int mode = 1; mode <= 2; ++mode)
        k.insert("alpha." + std::to_string(mode) + "." + z);
      k.insert(std::string("beta.") + z);
      k.insert(std::string("Gamma.") + z);
      k.insert(std::string("eps.") + z);
    }
    return k;
  }();
  return keys;
}

}  // namespace

bool is_model_key(const std::string& key) { return model_keys().count(key) != 0; }

ModelParams load_model(const Config& cfg, bool reject_unknown) {
  if (reject_unknown) {
    for (const auto& [k, v] : cfg.entries()) {
      if (!is_model_key(k)) throw ConfigError("unknown key: " + k);
    }
  }
  ModelParams p;
  p.delta = cfg.get_real("delta");
  p.g = cfg.get_real("g");
  p.nu = {cfg.get_real("nu1"), cfg.get_real("nu2")};
  p.gamma_vib = {cfg.get_real("gamma1"), cfg.get_real("gamma2")};
  p.rate_sep = cfg.get_real("Gamma_sep");
  p.rate_rec = cfg.get_real("Gamma_rec");
  p.trunc = {static_cast<int>(cfg.get_int("trunc1")), static_cast<int>(cfg.get_int("trunc2"))};

  for (auto z : kStates) {
    const int zi = static_cast<int>(z);
    p.eps[zi] = cfg.get_real_or(std::string("eps.") + to_string(z), 0.0);
    p.beta[zi] = cfg.get_real_or(std::string("beta.") + to_string(z), 0.0);
    p.gamma_deph[zi] = cfg.get_real_or(std::string("Gamma.") + to_string(z), 0.0);
    for (int mode = 0; mode < 2; ++mode) {
      p.alpha[mode][zi] =
          cfg.get_real_or("alpha." + std::to_string(mode + 1) + "." + to_string(z), 0.0);
    }
  }
  // eps.ct defaults to eps.e + delta; the acceptor displacement follows the
  // charge-transfer surface and its intermode coupling defaults to zero.
  if (!cfg.has("eps.ct"))
    p.eps[static_cast<int>(ElectronicState::CT)] = p.eps_of(ElectronicState::E) + p.delta;
  for (int mode = 0; mode < 2; ++mode) {
    if (!cfg.has("alpha." + std::to_string(mode + 1) + ".a"))
      p.alpha[mode][static_cast<int>(ElectronicState::A)] =
          p.alpha[mode][static_cast<int>(ElectronicState::CT)];
  }
  p.validate();
  return p;
}

ModelParams load_config(std::string_view text) { return load_model(Config::parse(text), true); }

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize(const ModelParams& p) {
  std::ostringstream out;
  out << "delta = " << fmt_real(p.delta) << "\n";
  out << "g = " << fmt_real(p.g) << "\n";
  out << "nu1 = " << fmt_real(p.nu[0]) << "\n";
  out << "nu2 = " << fmt_real(p.nu[1]) << "\n";
  out << "gamma1 = " << fmt_real(p.gamma_vib[0]) << "\n";
  out << "gamma2 = " << fmt_real(p.gamma_vib[1]) << "\n";
  out << "Gamma_sep = " << fmt_real(p.rate_sep) << "\n";
  out << "Gamma_rec = " << fmt_real(p.rate_rec) << "\n";
  out << "trunc1 = " << p.trunc[0] << "\n";
  out << "trunc2 = " << p.trunc[1] << "\n";
  for (auto z : kStates) {
    const int zi = static_cast<int>(z);
    out << "eps." << to_string(z) << " = " << fmt_real(p.eps[zi]) << "\n";
    out << "beta." << to_string(z) << " = " << fmt_real(p.beta[zi]) << "\n";
    out << "Gamma." << to_string(z) << " = " << fmt_real(p.gamma_deph[zi]) << "\n";
    for (int mode = 0; mode < 2; ++mode) {
      out << "alpha." << mode + 1 << "." << to_string(z) << " = " << fmt_real(p.alpha[mode][zi])
          << "\n";
    }
  }
  return out.str();
}

}  // namespace vibronic

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vibronic/errors.hpp"

namespace vibronic {

// Electronic labels; the ordering is fixed and used for basis indexing.
enum class ElectronicState : int { G = 0, E = 1, CT = 2, A = 3 };

inline constexpr std::array<ElectronicState, 4> kStates{ElectronicState::G, ElectronicState::E,
                                                        ElectronicState::CT, ElectronicState::A};

const char* to_string(ElectronicState z);
std::optional<ElectronicState> state_from_string(std::string_view s);

// Ordered product basis |z, n1, n2> with per-mode Fock truncation.
struct VibronicBasis {
  std::array<int, 2> trunc{};  // levels per mode, M1 and M2

  int vib_dim() const { return trunc[0] * trunc[1]; }
  int dim() const { return 4 * vib_dim(); }

  int index_of(ElectronicState z, int n1, int n2) const;

  struct Level {
    ElectronicState z;
    int n1;
    int n2;
  };
  Level state_of(int index) const;

  // Vibrational sub-index within one electronic surface.
  int vib_index(int n1, int n2) const { return n1 * trunc[1] + n2; }
};

// All physical control parameters in dimensionless units (hbar = 1, one
// shared inverse-time unit for energies and rates).
struct ModelParams {
  std::array<double, 4> eps{};                      // electronic energies, by state
  double delta = 0.0;                               // eps[CT] - eps[E]
  double g = 0.0;                                   // e<->ct electronic coupling
  std::array<double, 2> nu{};                       // mode frequencies
  std::array<std::array<double, 4>, 2> alpha{};     // [mode][state] displacements
  std::array<double, 4> beta{};                     // intermode coupling per surface
  std::array<double, 2> gamma_vib{};                // vibrational relaxation rates
  std::array<double, 4> gamma_deph{};               // electronic dephasing rates (A unused)
  double rate_sep = 0.0;
  double rate_rec = 0.0;
  std::array<int, 2> trunc{};

  VibronicBasis basis() const { return VibronicBasis{trunc}; }

  double eps_of(ElectronicState z) const { return eps[static_cast<int>(z)]; }
  double alpha_of(int mode, ElectronicState z) const {
    return alpha[mode][static_cast<int>(z)];
  }
  double beta_of(ElectronicState z) const { return beta[static_cast<int>(z)]; }
  double deph_of(ElectronicState z) const { return gamma_deph[static_cast<int>(z)]; }

  void validate() const;  // throws ConfigError on violated invariants
};

// Parsed key = value document. Section headers `[name]` prefix the keys that
// follow with `name.`; fully dotted keys are accepted as-is.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  // Applies `key=value` override strings.
  void apply_overrides(const std::vector<std::string>& sets);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long fallback) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> kv_;
};

// Keys understood by the model group; used by load_model and by the CLI
// schema check.
bool is_model_key(const std::string& key);

// Builds validated ModelParams from a parsed document, applying the
// documented defaults. Keys outside the model schema are rejected when
// `reject_unknown` is set.
ModelParams load_model(const Config& cfg, bool reject_unknown = true);

// Convenience: parse + build from raw text. Rejects unknown keys.
ModelParams load_config(std::string_view text);

// Emits a config document that load_config maps back to `p` exactly.
std::string serialize(const ModelParams& p);

}  // namespace vibronic

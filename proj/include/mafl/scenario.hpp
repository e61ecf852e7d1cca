#pragma once

// Scenario documents (versioned JSON, unknown keys rejected) and the source
// and initial-potential generators they reference.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mafl/flow.hpp"

namespace mafl {

inline constexpr int kScenarioSchemaVersion = 1;

/// One cosine mode a cos(2 pi k.x + phase) over the axes (x1, y1, x2, y2).
struct TrigMode {
  std::array<int, 4> k{};
  double amplitude = 0.0;
  double phase = 0.0;
};

enum class FieldKind { Zero, Constant, Trig, LogPole };

/// Source or initial-data field. Trig: sum of a cos(2 pi k.x + phase).
/// LogPole: -(b/2) log(d^2 + delta^2), d the flat torus distance to center;
/// bounded for delta > 0 but with entropy that stays finite as delta -> 0.
struct FieldSpec {
  FieldKind kind = FieldKind::Zero;
  double c = 0.0;
  std::vector<TrigMode> modes;
  double b = 0.0;
  double delta = 0.0;
  std::array<double, 4> center{};

  static FieldSpec from_json(const nlohmann::json& j, bool allow_log_pole);
  nlohmann::json to_json() const;
};

struct CheckSettings {
  std::vector<std::string> enabled;
  /// Levels as fractions of the window top sup(-phi_tilde).
  std::vector<double> s_fractions{0.1, 0.3, 0.5, 0.7};
  std::vector<double> t0_grid{0.0};
  double k_smoothing = 100.0;
  /// Failed level-set checks are retried once at 2N when 2N <= retry_max_N.
  int retry_max_N = 64;
  /// Samples of the level-mass function used by the De Giorgi check.
  int degiorgi_samples = 200;
  int iteration_levels = 8;

  bool on(const std::string& name) const;
};

struct Scenario {
  std::string name;
  int n = 1;
  int N = 32;
  double T = 1.0;
  double checkpoint_every = 0.125;
  std::vector<ThetaProfile> thetas{ThetaProfile::log()};
  /// (kind, k) pairs; k is ignored for Monge-Ampere.
  std::vector<std::pair<OperatorKind, int>> operators{{OperatorKind::MongeAmpere, 0}};
  FieldSpec F;
  double p = 4.0;
  FieldSpec phi0;
  CheckSettings checks;
  std::uint64_t seed = 1;
  double max_high_freq = 1e-6;
  /// Canonical JSON of the document, hashed for provenance.
  nlohmann::json canonical;

  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::filesystem::path& path);
  std::string hash() const;
  OperatorSpec operator_spec(std::size_t index) const;
};

/// Every check name a scenario may enable.
const std::vector<std::string>& known_checks();
/// Checks enabled when a scenario omits "enabled".
const std::vector<std::string>& default_checks();

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

struct GeneratedSource {
  ScalarField F;
  double ent_p = 0.0;
  double int_nF = 0.0;
  /// max(0, int Theta(e^{-nF})) when a profile is supplied; otherwise max(0, -int nF).
  double K = 0.0;
};

/// Throws NonFinite when the field or its entropy is not finite on the grid.
GeneratedSource generate_F(const FieldSpec& spec, const TorusGrid& grid, double p,
                           const std::optional<ThetaProfile>& theta = std::nullopt);
ScalarField generate_field(const FieldSpec& spec, const TorusGrid& grid);

}  // namespace mafl

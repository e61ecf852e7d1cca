#include "mafl/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "mafl/checkpoint.hpp"
#include "mafl/cutoff.hpp"
#include "mafl/error.hpp"
#include "mafl/functionals.hpp"

namespace mafl {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw Error(ErrorKind::Schema, "unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Schema, std::string("bad type for '") + key + "' in " + where);
  }
}

ThetaProfile theta_from_json(const json& j) {
  only_keys(j, {"kind", "a"}, "theta");
  const auto kind = get_or<std::string>(j, "kind", "log", "theta");
  if (kind == "log") return ThetaProfile::log();
  if (kind == "neg_inverse") return ThetaProfile::neg_inverse();
  if (kind == "linear") return ThetaProfile::linear();
  if (kind == "cube_root") return ThetaProfile::cube_root();
  if (kind == "power") {
    const double a = get_or<double>(j, "a", 1.0, "theta");
    if (!(a > 0.0)) throw Error(ErrorKind::Schema, "power profile needs a > 0");
    return ThetaProfile::power(a);
  }
  throw Error(ErrorKind::Schema, "unknown theta kind '" + kind + "'");
}

std::pair<OperatorKind, int> operator_from_json(const json& j, int n) {
  only_keys(j, {"kind", "k"}, "operator");
  const auto kind = get_or<std::string>(j, "kind", "monge_ampere", "operator");
  if (kind == "monge_ampere") return {OperatorKind::MongeAmpere, 0};
  if (kind == "sigma_k") {
    const int k = get_or<int>(j, "k", 1, "operator");
    if (k < 1 || k > n) throw Error(ErrorKind::Schema, "sigma_k order must lie in [1, n]");
    return {OperatorKind::SigmaK, k};
  }
  throw Error(ErrorKind::Schema, "unknown operator kind '" + kind + "'");
}

template <class Fn>
auto one_or_many(const json& j, Fn&& parse) {
  std::vector<decltype(parse(j))> out;
  if (j.is_array()) {
    if (j.empty()) throw Error(ErrorKind::Schema, "variant lists must be non-empty");
    for (const auto& e : j) out.push_back(parse(e));
  } else {
    out.push_back(parse(j));
  }
  return out;
}

}  // namespace

FieldSpec FieldSpec::from_json(const json& j, bool allow_log_pole) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, "field spec must be an object");
  const auto kind = get_or<std::string>(j, "kind", "", "field spec");
  FieldSpec f;
  if (kind == "zero") {
    only_keys(j, {"kind"}, "zero field");
  } else if (kind == "constant") {
    only_keys(j, {"kind", "c"}, "constant field");
    f.kind = FieldKind::Constant;
    f.c = get_or<double>(j, "c", 0.0, "constant field");
  } else if (kind == "trig") {
    only_keys(j, {"kind", "modes"}, "trig field");
    f.kind = FieldKind::Trig;
    if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
      throw Error(ErrorKind::Schema, "trig field needs a non-empty 'modes' array");
    for (const auto& m : j["modes"]) {
      only_keys(m, {"k", "amplitude", "phase"}, "trig mode");
      TrigMode t;
      const auto k = get_or<std::vector<int>>(m, "k", {}, "trig mode");
      if (k.empty() || k.size() > 4) throw Error(ErrorKind::Schema, "trig mode 'k' needs 1 to 4 integers");
      std::copy(k.begin(), k.end(), t.k.begin());
      t.amplitude = get_or<double>(m, "amplitude", 0.0, "trig mode");
      t.phase = get_or<double>(m, "phase", 0.0, "trig mode");
      f.modes.push_back(t);
    }
  } else if (kind == "log_pole" && allow_log_pole) {
    only_keys(j, {"kind", "b", "delta", "center"}, "log_pole field");
    f.kind = FieldKind::LogPole;
    f.b = get_or<double>(j, "b", 0.3, "log_pole field");
    f.delta = get_or<double>(j, "delta", 1.0 / 32.0, "log_pole field");
    if (!(f.delta > 0.0)) throw Error(ErrorKind::Schema, "log_pole delta must be positive");
    const auto c = get_or<std::vector<double>>(j, "center", {0.5, 0.5, 0.5, 0.5}, "log_pole field");
    if (c.empty() || c.size() > 4) throw Error(ErrorKind::Schema, "log_pole center needs 1 to 4 coordinates");
    std::copy(c.begin(), c.end(), f.center.begin());
  } else {
    throw Error(ErrorKind::Schema, "unknown field kind '" + kind + "'");
  }
  return f;
}

json FieldSpec::to_json() const {
  switch (kind) {
    case FieldKind::Zero: return {{"kind", "zero"}};
    case FieldKind::Constant: return {{"kind", "constant"}, {"c", c}};
    case FieldKind::Trig: {
      json modes = json::array();
      for (const auto& m : this->modes) modes.push_back({{"k", m.k}, {"amplitude", m.amplitude}, {"phase", m.phase}});
      return {{"kind", "trig"}, {"modes", modes}};
    }
    case FieldKind::LogPole: return {{"kind", "log_pole"}, {"b", b}, {"delta", delta}, {"center", center}};
  }
  return nullptr;
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"lemma23", "aux",      "lemma21", "lemma31", "exp_bound",
                                              "iteration", "young",  "degiorgi", "lemma41", "cutoff",
                                              "chain",   "theta"};
  return names;
}

const std::vector<std::string>& default_checks() {
  static const std::vector<std::string> names{"lemma23", "aux",      "lemma21", "lemma31", "exp_bound", "iteration",
                                              "young",   "degiorgi", "lemma41", "chain",   "theta"};
  return names;
}

bool CheckSettings::on(const std::string& name) const {
  return std::find(enabled.begin(), enabled.end(), name) != enabled.end();
}

Scenario Scenario::from_json(const json& j) {
  only_keys(j, {"schema_version", "name", "n", "N", "T", "checkpoint_every", "theta", "operator", "F", "p", "phi0",
                "checks", "seed", "tolerances"},
            "scenario");
  if (get_or<int>(j, "schema_version", -1, "scenario") != kScenarioSchemaVersion)
    throw Error(ErrorKind::Schema, "schema_version must be " + std::to_string(kScenarioSchemaVersion));
  Scenario s;
  s.canonical = j;
  s.name = get_or<std::string>(j, "name", "", "scenario");
  if (s.name.empty()) throw Error(ErrorKind::Schema, "scenario needs a non-empty name");
  s.n = get_or<int>(j, "n", 1, "scenario");
  if (s.n != 1 && s.n != 2) throw Error(ErrorKind::Schema, "n must be 1 or 2");
  s.N = get_or<int>(j, "N", 32, "scenario");
  if (s.N < 8 || (s.N & (s.N - 1)) != 0) throw Error(ErrorKind::Schema, "N must be a power of two >= 8");
  s.T = get_or<double>(j, "T", 1.0, "scenario");
  s.checkpoint_every = get_or<double>(j, "checkpoint_every", 0.125, "scenario");
  if (!(s.T > 0.0) || !(s.checkpoint_every > 0.0) || s.checkpoint_every > s.T)
    throw Error(ErrorKind::Schema, "need 0 < checkpoint_every <= T");
  if (j.contains("theta")) s.thetas = one_or_many(j["theta"], theta_from_json);
  if (j.contains("operator"))
    s.operators = one_or_many(j["operator"], [&](const json& e) { return operator_from_json(e, s.n); });
  if (!j.contains("F")) throw Error(ErrorKind::Schema, "scenario needs an 'F' spec");
  s.F = FieldSpec::from_json(j["F"], true);
  s.p = get_or<double>(j, "p", 4.0, "scenario");
  if (!(s.p > 1.0)) throw Error(ErrorKind::Schema, "p must exceed 1");
  s.phi0 = j.contains("phi0") ? FieldSpec::from_json(j["phi0"], false) : FieldSpec{};
  s.seed = get_or<std::uint64_t>(j, "seed", 1, "scenario");

  if (j.contains("tolerances")) {
    only_keys(j["tolerances"], {"max_high_freq"}, "tolerances");
    s.max_high_freq = get_or<double>(j["tolerances"], "max_high_freq", 1e-6, "tolerances");
  }

  CheckSettings& c = s.checks;
  c.enabled = default_checks();
  if (j.contains("checks")) {
    const json& cj = j["checks"];
    only_keys(cj, {"enabled", "s_fractions", "t0_grid", "k_smoothing", "retry_max_N", "degiorgi_samples",
                   "iteration_levels"},
              "checks");
    c.enabled = get_or<std::vector<std::string>>(cj, "enabled", c.enabled, "checks");
    for (const auto& name : c.enabled)
      if (std::find(known_checks().begin(), known_checks().end(), name) == known_checks().end())
        throw Error(ErrorKind::Schema, "unknown check '" + name + "'");
    c.s_fractions = get_or<std::vector<double>>(cj, "s_fractions", c.s_fractions, "checks");
    c.t0_grid = get_or<std::vector<double>>(cj, "t0_grid", c.t0_grid, "checks");
    c.k_smoothing = get_or<double>(cj, "k_smoothing", c.k_smoothing, "checks");
    c.retry_max_N = get_or<int>(cj, "retry_max_N", c.retry_max_N, "checks");
    c.degiorgi_samples = get_or<int>(cj, "degiorgi_samples", c.degiorgi_samples, "checks");
    c.iteration_levels = get_or<int>(cj, "iteration_levels", c.iteration_levels, "checks");
  }
  if (c.s_fractions.empty() || c.t0_grid.empty()) throw Error(ErrorKind::Schema, "check grids must be non-empty");
  for (double f : c.s_fractions)
    if (!(f >= 0.0 && f < 1.0)) throw Error(ErrorKind::Schema, "s_fractions must lie in [0, 1)");
  for (double t0 : c.t0_grid)
    if (!(t0 >= 0.0 && t0 < s.T)) throw Error(ErrorKind::Schema, "t0_grid entries must lie in [0, T)");
  if (!(c.k_smoothing > 0.0)) throw Error(ErrorKind::Schema, "k_smoothing must be positive");
  if (c.degiorgi_samples < 4 || c.iteration_levels < 1)
    throw Error(ErrorKind::Schema, "degiorgi_samples >= 4 and iteration_levels >= 1 required");
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string Scenario::hash() const { return sha256_hex(canonical.dump()); }

OperatorSpec Scenario::operator_spec(std::size_t index) const {
  const auto& [kind, k] = operators.at(index);
  if (kind == OperatorKind::MongeAmpere) return OperatorSpec::monge_ampere(n);
  return OperatorSpec::sigma_k(n, k, seed);
}

ScalarField generate_field(const FieldSpec& spec, const TorusGrid& grid) {
  const int axes = grid.real_axes();
  switch (spec.kind) {
    case FieldKind::Zero: return ScalarField::constant(grid, 0.0);
    case FieldKind::Constant: return ScalarField::constant(grid, spec.c);
    case FieldKind::Trig:
      for (const auto& m : spec.modes)
        for (int a = axes; a < 4; ++a)
          if (m.k[a] != 0) throw Error(ErrorKind::Schema, "trig mode uses an axis beyond 2n");
      return ScalarField::from_function(grid, [&](const std::array<double, 4>& x) {
        double v = 0.0;
        for (const auto& m : spec.modes) {
          double phase = m.phase;
          for (int a = 0; a < axes; ++a) phase += 2.0 * std::numbers::pi * m.k[a] * x[a];
          v += m.amplitude * std::cos(phase);
        }
        return v;
      });
    case FieldKind::LogPole:
      return ScalarField::from_function(grid, [&](const std::array<double, 4>& x) {
        const double d = torus_distance(x, spec.center, axes);
        return -0.5 * spec.b * std::log(d * d + spec.delta * spec.delta);
      });
  }
  return ScalarField::constant(grid, 0.0);
}

GeneratedSource generate_F(const FieldSpec& spec, const TorusGrid& grid, double p,
                           const std::optional<ThetaProfile>& theta) {
  GeneratedSource g{generate_field(spec, grid)};
  require_finite(g.F, "source F");
  const SourceData src = SourceData::from_field(g.F, p, theta);
  if (!std::isfinite(src.ent_p)) throw Error(ErrorKind::NonFinite, "entropy of F is not finite on the grid");
  g.ent_p = src.ent_p;
  g.int_nF = src.int_nF;
  g.K = src.K;
  return g;
}

}  // namespace mafl

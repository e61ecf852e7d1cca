// Acceptance harness: runs the desk suite and prints one PASS/FAIL line per
// criterion. Exit status is 0 iff the set of failing criteria equals the set
// given with --known-failure (empty by default).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mafl/abp.hpp"
#include "mafl/checkpoint.hpp"
#include "mafl/degiorgi.hpp"
#include "mafl/estimates.hpp"
#include "mafl/pipeline.hpp"
#include "mafl/torus.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mafl;
using std::numbers::pi;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

struct Suite {
  std::map<std::string, EstimateReport> reports;
  std::map<std::string, double> wall;

  const EstimateReport& at(const std::string& name) const {
    auto it = reports.find(name);
    if (it == reports.end()) throw Error(ErrorKind::InvalidArgument, "desk scenario '" + name + "' missing");
    return it->second;
  }
  std::vector<const CheckRecord*> records(const std::string& prefix) const {
    std::vector<const CheckRecord*> out;
    for (const auto& [name, r] : reports)
      for (const auto& c : r.records)
        if (c.check.rfind(prefix, 0) == 0) out.push_back(&c);
    return out;
  }
};

double flow_seconds(const EstimateReport& r) {
  double total = 0.0;
  const nlohmann::json runs = r.timing.value("runs", nlohmann::json::object());
  for (const auto& [label, run] : runs.items())
    for (const auto& [key, v] : run.items())
      if (key.rfind("flow_N", 0) == 0) total += v.get<double>();
  return total;
}

Outcome all_pass(const std::vector<const CheckRecord*>& recs, std::size_t min_count) {
  std::size_t failed = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::string worst_name;
  for (const auto* c : recs) {
    failed += !c->pass;
    const double excess = c->margin - c->tolerance;
    if (excess > worst) worst = excess, worst_name = c->scenario + " " + c->check;
  }
  Outcome o;
  o.pass = failed == 0 && recs.size() >= min_count && !recs.empty();
  o.detail = std::to_string(recs.size() - failed) + "/" + std::to_string(recs.size()) + " records pass";
  if (!recs.empty()) o.detail += ", worst margin-tol " + fmt(worst) + " (" + worst_name + ")";
  return o;
}

// 1. Zero source from zero data stays at zero.
Outcome stationary(const Suite& s) {
  const auto& r = s.at("zero");
  double sup = 0.0;
  for (const auto& row : r.series) sup = std::max({sup, std::abs(row.d.sup_tilde), std::abs(row.d.inf_tilde)});
  const double secs = flow_seconds(r);
  Outcome o;
  o.pass = r.complete && !r.series.empty() && sup <= 1e-10 && secs < 5.0;
  o.detail = "sup|phi~| = " + fmt(sup) + " over " + std::to_string(r.series.size()) + " checkpoints, flow " +
             fmt(secs) + " s";
  return o;
}

// 2. Spectral Hessians of band-limited fields against closed forms.
Outcome spectral() {
  const auto t = Clock::now();
  double err_eig = 0.0, err_det = 0.0;
  {
    const double a = 0.02, b = 0.01;
    auto g = make_grid(1, 32);
    auto phi = ScalarField::from_function(g, [&](auto x) {
      return a * std::cos(2 * pi * x[0]) + b * std::sin(2 * pi * (x[0] + 2 * x[1]));
    });
    auto h = complex_hessian(phi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.coords(i);
      const double w = 4 * pi * pi;
      const double lam = 1.0 + 0.25 * (-w * a * std::cos(2 * pi * x[0]) - 5 * w * b * std::sin(2 * pi * (x[0] + 2 * x[1])));
      err_eig = std::max(err_eig, std::abs(h.eigenvalues[i][0] - lam));
      err_det = std::max(err_det, std::abs(h.matrices[i].det(1) - h.eigenvalues[i][0]));
    }
  }
  {
    // phi = a sin(2 pi (x1 + y2)) + b cos(2 pi (y1 - x2)): the complex Hessian
    // has a = 1 - pi^2 (s + c), d = 1 - pi^2 (c + s), c12 = -i pi^2 (s + c).
    const double a = 0.003, b = 0.002;
    auto g = make_grid(2, 16);
    auto phi = ScalarField::from_function(
        g, [&](auto x) { return a * std::sin(2 * pi * (x[0] + x[3])) + b * std::cos(2 * pi * (x[1] - x[2])); });
    auto h = complex_hessian(phi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.coords(i);
      const double u = pi * pi * (a * std::sin(2 * pi * (x[0] + x[3])) + b * std::cos(2 * pi * (x[1] - x[2])));
      // Matrix [[1-u, -i u], [i u, 1-u]] has eigenvalues 1 - 2u and 1.
      const double lo = std::min(1.0 - 2 * u, 1.0), hi = std::max(1.0 - 2 * u, 1.0);
      err_eig = std::max({err_eig, std::abs(h.eigenvalues[i][0] - lo), std::abs(h.eigenvalues[i][1] - hi)});
      err_det = std::max(err_det, std::abs(h.matrices[i].det(2) - h.eigenvalues[i][0] * h.eigenvalues[i][1]));
    }
  }
  const double secs = seconds_since(t);
  Outcome o;
  o.pass = err_eig <= 1e-10 && err_det <= 1e-10 && secs < 1.0;
  o.detail = "eigenvalue error " + fmt(err_eig) + ", det error " + fmt(err_det) + ", " + fmt(secs) + " s";
  return o;
}

// 3. Normalization bounds on the smooth and log-pole sources.
Outcome lemma23(const Suite& s) {
  std::vector<const CheckRecord*> recs;
  double secs = 0.0;
  for (const char* name : {"trig_n1", "log_pole_n1"}) {
    const auto& r = s.at(name);
    secs += flow_seconds(r);
    for (const auto& c : r.records)
      if (c.check.rfind("lemma23.", 0) == 0) recs.push_back(&c);
  }
  Outcome o = all_pass(recs, 8);
  o.pass = o.pass && secs < 120.0;
  o.detail += ", flows " + fmt(secs) + " s";
  return o;
}

// 4. Auxiliary-flow identities on every auxiliary run.
Outcome aux_identities(const Suite& s) { return all_pass(s.records("aux."), 3); }

// 5. Level-set test function margin.
Outcome lemma31(const Suite& s) {
  std::vector<const CheckRecord*> recs;
  std::size_t failed_initial = 0;
  for (const auto* c : s.records("lemma31")) {
    if (c->params.value("vacuous", false)) continue;
    recs.push_back(c);
    if (!c->pass && c->params.value("max_H_interior", 1.0) <= c->tolerance) ++failed_initial;
  }
  double secs = 0.0;
  for (const auto& [name, r] : s.reports) secs += r.timing.value("total_seconds", 0.0);
  Outcome o = all_pass(recs, 12);
  o.pass = o.pass && secs < 600.0;
  o.detail += ", " + std::to_string(failed_initial) + " failures only at the window's first slice, suite " +
              fmt(secs) + " s";
  return o;
}

// 6. De Giorgi iteration on synthetic profiles against the sequential scan.
Outcome degiorgi() {
  const auto t = Clock::now();
  int ok = 0, cases = 0;
  for (std::uint64_t seed = 1; cases < 50; ++seed) {
    const auto in = testing::synthetic_degiorgi(seed);
    if (degiorgi_hypothesis_scan(in)) continue;
    ++cases;
    const auto r = degiorgi_s_infinity(in);
    const auto scan = testing::sequential_scan(in);
    ok += r.Phi_at_S_infinity == 0.0 && r.within_bound && scan.complete && scan.sequence == r.sequence;
  }
  const double secs = seconds_since(t);
  Outcome o;
  o.pass = ok == 50 && secs < 5.0;
  o.detail = std::to_string(ok) + "/50 agree with the scan, " + fmt(secs) + " s";
  return o;
}

// 7. Iteration inequality: exact lower half, finite B0 with the stated delta0.
Outcome iteration(const Suite& s) {
  const auto lower = s.records("iteration.lower");
  const auto b0 = s.records("iteration.B0");
  Outcome o = all_pass(lower, 1);
  bool finite = !b0.empty();
  bool delta_ok = true;
  double worst_b0 = 0.0;
  for (const auto* c : b0) {
    const double measured = c->params.value("B0_measured", std::numeric_limits<double>::quiet_NaN());
    finite = finite && std::isfinite(measured);
    worst_b0 = std::max(worst_b0, measured);
  }
  for (const auto& c : s.at("trig_n1").records)
    if (c.check == "iteration.B0") delta_ok = delta_ok && std::abs(c.params.at("delta0").get<double>() - 1.25) < 1e-15;
  o.pass = o.pass && finite && delta_ok;
  o.detail = "lower: " + o.detail + "; B0 finite on " + std::to_string(b0.size()) + " windows (max " + fmt(worst_b0) +
             "), delta0 = 1.25 for n=1, p=4: " + (delta_ok ? "yes" : "no");
  return o;
}

// 8. Parabolic ABP on the quadratic example.
Outcome abp() {
  const auto t = Clock::now();
  auto quad = [](const std::vector<double>& x, double tt) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return tt * (1.0 - r2);
  };
  const auto p1 = Patch::sample(2, 33, 33, 1.0, 1.0, true, quad);
  const auto p2 = Patch::sample(2, 33, 33, 1.0, 1.0, true, [&](const auto& x, double tt) { return 2 * quad(x, tt); });
  const double C = abp_default_constant(2);
  const auto r1 = abp_check(p1, C), r2 = abp_check(p2, C);
  const double drift = std::abs(r2.ratio / r1.ratio - 1.0);
  const double secs = seconds_since(t);
  Outcome o;
  o.pass = r1.pass && drift <= 1e-10 && secs < 10.0;
  o.detail = "lhs " + fmt(r1.lhs) + " <= rhs " + fmt(r1.rhs) + ", homogeneity drift " + fmt(drift) + ", " +
             fmt(secs) + " s";
  return o;
}

// 9. Structural bound for sigma_1 and Monge-Ampere, plus the calculus oracles.
Outcome generalized(const Suite& s) {
  std::vector<const CheckRecord*> recs;
  std::set<std::string> ops;
  for (const auto* c : s.records("chain.structural")) {
    recs.push_back(c);
    ops.insert(c->scenario.substr(c->scenario.rfind('-') + 1));
  }
  Outcome o = all_pass(recs, 2);
  // h(x) = (x - r - C3) exp(n x / (r (n+1))) minimized by golden-section search.
  double oracle_err = std::abs(A_max_value(1.0, 1.0) - 0.25);
  for (int n : {1, 2})
    for (double r : {0.5, 1.0, 2.0})
      for (double C3 : {0.2, 1.0}) {
        auto h = [&](double x) { return (x - r - C3) * std::exp(n * x / (r * (n + 1))); };
        double lo = -20.0, hi = 20.0;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 200; ++it) {
          const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
          (h(x1) < h(x2) ? hi : lo) = h(x1) < h(x2) ? x2 : x1;
        }
        oracle_err = std::max(oracle_err, std::abs(h(0.5 * (lo + hi)) - h_chain_minimum(n, r, C3)));
      }
  for (double a : {0.5, 1.0, 3.0})
    for (double l : {0.3, 1.0, 2.0}) {
      const double y = A_max_point(a, l);
      const double direct = y - l * std::pow(y, 1.0 + 1.0 / a);
      // First-order condition 1 = l (1 + 1/a) y^{1/a} solved independently.
      const double y_star = std::pow(1.0 / (l * (1.0 + 1.0 / a)), a);
      const double oracle = y_star - l * std::pow(y_star, 1.0 + 1.0 / a);
      oracle_err = std::max({oracle_err, std::abs(direct - oracle), std::abs(A_max_value(a, l) - oracle)});
    }
  o.pass = o.pass && ops.count("ma") && ops.count("sigma1") && oracle_err <= 1e-12;
  o.detail += ", calculus oracle error " + fmt(oracle_err);
  return o;
}

// 10. Theta-profile monotonicity and K = 0 for the negative profile.
Outcome theta(const Suite& s) {
  const auto& r = s.at("theta_sweep");
  std::vector<const CheckRecord*> recs;
  std::set<std::string> names;
  for (const auto& c : r.records)
    if (c.check.rfind("theta.", 0) == 0) recs.push_back(&c), names.insert(c.check);
  Outcome o = all_pass(recs, 3);
  o.pass = o.pass && names.count("theta.monotone") && names.count("theta.negative_rate") && names.count("theta.K_zero");
  return o;
}

// 11. Byte-identical reports across fresh runs; bit-exact checkpoints.
Outcome determinism(const fs::path& scenarios, const fs::path& out) {
  bool same = true;
  std::string detail;
  for (const char* name : {"constant", "theta_sweep"}) {
    const auto sc = Scenario::load(scenarios / (std::string(name) + ".json"));
    const fs::path again = out / "repeat" / name;
    fs::remove_all(again);
    run_scenario(sc, {.out_dir = again, .resume = false});
    const bool eq = read_text_file(out / name / "report.json") == read_text_file(again / "report.json");
    same = same && eq;
    detail += std::string(name) + (eq ? " identical" : " differs") + ", ";
  }
  std::size_t files = 0;
  bool exact = true;
  for (const auto& e : fs::recursive_directory_iterator(out / "trig_n1" / "runs")) {
    if (e.path().extension() != ".bin") continue;
    const auto cp = read_checkpoint(e.path());
    const fs::path copy = out / "repeat" / "roundtrip.bin";
    write_checkpoint(copy, cp.time, cp.field);
    exact = exact && read_text_file(copy) == read_text_file(e.path());
    const auto back = read_checkpoint(copy);
    exact = exact && back.time == cp.time &&
            std::memcmp(back.field.values.data(), cp.field.values.data(), cp.field.size() * sizeof(double)) == 0;
    ++files;
  }
  Outcome o;
  o.pass = same && exact && files > 0;
  o.detail = detail + std::to_string(files) + " checkpoints " + (exact ? "round-trip bit-exactly" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the desk suite"};
  fs::path scenarios = MAFL_SCENARIO_DIR;
  fs::path out = "acceptance_out";
  std::vector<int> known;
  app.add_option("--scenarios", scenarios, "Directory with the desk-suite scenario files");
  app.add_option("--out", out, "Working directory for runs");
  bool resume = false;
  app.add_option("--known-failure", known, "Criteria expected to fail (exit status only)");
  app.add_flag("--resume", resume, "Reuse main-flow checkpoints already in --out (runtimes then exclude those flows)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> desk{"zero", "constant", "trig_n1", "trig_n2", "log_pole_n1", "theta_sweep"};
  Suite suite;
  for (const auto& name : desk) {
    const auto sc = Scenario::load(scenarios / (name + ".json"));
    const auto t = Clock::now();
    if (!resume) fs::remove_all(out / name);
    suite.reports[name] = run_scenario(sc, {.out_dir = out / name, .resume = resume});
    suite.wall[name] = seconds_since(t);
    const auto& r = suite.reports[name];
    std::cout << "# " << name << ": " << (r.pass() ? "pass" : "fail") << ", " << r.records.size() << " records, "
              << fmt(suite.wall[name]) << " s" << (r.complete ? "" : ", incomplete: " + r.error) << std::endl;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"stationary exactness", [&] { return stationary(suite); }},
      {"spectral fidelity", [] { return spectral(); }},
      {"normalization suite", [&] { return lemma23(suite); }},
      {"auxiliary-flow identities", [&] { return aux_identities(suite); }},
      {"level-set test function margin", [&] { return lemma31(suite); }},
      {"De Giorgi iteration", [] { return degiorgi(); }},
      {"iteration inequality", [&] { return iteration(suite); }},
      {"parabolic ABP", [] { return abp(); }},
      {"generalized operators", [&] { return generalized(suite); }},
      {"Theta-profile monotonicity", [&] { return theta(suite); }},
      {"determinism and formats", [&] { return determinism(scenarios, out); }},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const int id = static_cast<int>(i + 1);
    if (!o.pass) failed.insert(id);
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  const std::set<int> expected(known.begin(), known.end());
  std::cout << (failed.empty() ? "all criteria pass" : std::to_string(failed.size()) + " criteria fail") << std::endl;
  return failed == expected ? 0 : 1;
}

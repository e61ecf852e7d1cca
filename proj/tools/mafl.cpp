// mafl: run scenarios, re-check stored trajectories, and evaluate the
// standalone De Giorgi and ABP checks.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mafl/abp.hpp"
#include "mafl/checkpoint.hpp"
#include "mafl/degiorgi.hpp"
#include "mafl/error.hpp"
#include "mafl/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

unsigned thread_cap() {
  if (const char* env = std::getenv("MAFL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void print_summary(const mafl::EstimateReport& r, std::ostream& out) {
  std::size_t passed = 0;
  for (const auto& c : r.records) passed += c.pass;
  out << r.scenario << ": " << (r.pass() ? "PASS" : "FAIL") << " (" << passed << "/" << r.records.size()
      << " checks" << (r.complete ? "" : ", incomplete: " + r.error) << ")\n";
  for (const auto& c : r.records)
    if (!c.pass)
      out << "  FAIL " << c.scenario << " " << c.check << " margin=" << mafl::format_double(c.margin)
          << " tol=" << mafl::format_double(c.tolerance) << "\n";
}

int cmd_run(const std::vector<std::string>& files, const std::string& out, bool no_resume) {
  std::vector<mafl::Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(mafl::Scenario::load(f));
  std::vector<mafl::EstimateReport> reports(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < scenarios.size();) {
      mafl::PipelineOptions opt;
      opt.resume = !no_resume;
      if (!out.empty()) opt.out_dir = scenarios.size() == 1 ? fs::path(out) : fs::path(out) / scenarios[i].name;
      reports[i] = mafl::run_scenario(scenarios[i], opt);
      std::lock_guard<std::mutex> lock(io);
      print_summary(reports[i], std::cout);
    }
  };
  std::vector<std::thread> pool;
  const unsigned threads = std::min<unsigned>(thread_cap(), static_cast<unsigned>(scenarios.size()));
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); }) ? 0 : 1;
}

int cmd_check(const std::string& dir, const std::string& lemma) {
  static const std::map<std::string, std::vector<std::string>> groups{
      {"23", {"lemma23"}},     {"31", {"lemma31", "exp_bound"}}, {"41", {"lemma41", "cutoff"}},
      {"degiorgi", {"degiorgi"}}, {"iteration", {"iteration"}},  {"young", {"young"}},
      {"chain", {"chain"}},    {"theta", {"theta"}},             {"aux", {"aux", "lemma21"}}};
  if (lemma == "abp") {
    const auto patch = mafl::Patch::from_json({{"example", "quadratic"}});
    const auto r = mafl::abp_check(patch, mafl::abp_default_constant(patch.m));
    std::cout << r.to_json().dump(2) << "\n";
    return r.pass ? 0 : 1;
  }
  const auto it = groups.find(lemma);
  if (it == groups.end()) throw mafl::Error(mafl::ErrorKind::InvalidArgument, "unknown lemma '" + lemma + "'");
  const auto sc = mafl::Scenario::load(fs::path(dir) / "scenario.json");
  mafl::PipelineOptions opt;
  opt.out_dir = dir;
  opt.only_checks = it->second;
  opt.emit = false;
  const auto r = mafl::run_scenario(sc, opt);
  json recs = json::array();
  for (const auto& c : r.records) recs.push_back(c.to_json());
  std::cout << json{{"complete", r.complete}, {"pass", r.pass()}, {"records", recs}}.dump(2) << "\n";
  return r.pass() ? 0 : 1;
}

int cmd_degiorgi(const std::string& csv, double b0, double delta0, double r_max, std::optional<double> E) {
  std::istringstream in(mafl::read_text_file(csv));
  mafl::DeGiorgiInput input;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double s, phi;
    if (!(row >> s >> phi)) {
      if (input.s.empty()) continue;  // header
      throw mafl::Error(mafl::ErrorKind::InvalidArgument, "bad row in " + csv + ": " + line);
    }
    input.s.push_back(s);
    input.Phi.push_back(phi);
  }
  input.B0 = b0;
  input.delta0 = delta0;
  input.r_max = r_max > 0.0 ? r_max : (input.s.empty() ? 1.0 : input.s.back() - input.s.front());
  input.E = E;
  const auto r = mafl::degiorgi_s_infinity(input);
  std::cout << r.to_json().dump(2) << "\n";
  return r.pass ? 0 : 1;
}

int cmd_abp(const std::string& file, double c_dim) {
  const auto patch = mafl::Patch::from_json(json::parse(mafl::read_text_file(file)));
  const auto r = mafl::abp_check(patch, c_dim > 0.0 ? c_dim : mafl::abp_default_constant(patch.m));
  std::cout << r.to_json().dump(2) << "\n";
  return r.pass ? 0 : 1;
}

int cmd_report(const std::string& dir) {
  const json j = json::parse(mafl::read_text_file(fs::path(dir) / "report.json"));
  std::cout << j.at("scenario").get<std::string>() << " " << j.at("scenario_hash").get<std::string>() << "\n";
  for (const auto& c : j.at("records"))
    std::cout << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("scenario").get<std::string>() << " "
              << c.at("check").get<std::string>() << " margin=" << c.at("margin").dump() << "\n";
  const bool pass = j.at("pass").get<bool>();
  std::cout << (pass ? "overall PASS" : "overall FAIL") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for parabolic complex Monge-Ampere flows on flat tori"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string out;
  bool no_resume = false;
  auto* run = app.add_subcommand("run", "Run scenarios and write their reports");
  run->add_option("scenario", files, "Scenario JSON files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (one sub-directory per scenario when several are given)");
  run->add_flag("--no-resume", no_resume, "Ignore existing checkpoints");

  std::string dir, lemma;
  auto* check = app.add_subcommand("check", "Re-run checks on a stored trajectory directory");
  check->add_option("dir", dir, "Directory written by 'run'")->required();
  check->add_option("--lemma", lemma, "23, 31, 41, degiorgi, abp, iteration, young, chain, theta or aux")
      ->required();

  std::string csv;
  double b0 = 1.0, delta0 = 1.0, r_max = 0.0;
  std::optional<double> E;
  auto* dg = app.add_subcommand("degiorgi", "De Giorgi iteration on sampled (s, Phi) pairs");
  dg->add_option("samples", csv, "CSV with columns s,phi")->required()->check(CLI::ExistingFile);
  dg->add_option("--b0", b0, "B0 > 0")->required();
  dg->add_option("--delta0", delta0, "delta0 > 0")->required();
  dg->add_option("--r-max", r_max, "Largest r in the hypothesis (default: sample range)");
  dg->add_option("--E", E, "Energy bound for the Chebyshev start s0");

  std::string patch;
  double c_dim = 0.0;
  auto* abp = app.add_subcommand("abp", "Parabolic ABP estimate on a patch file");
  abp->add_option("patch", patch, "Patch JSON")->required()->check(CLI::ExistingFile);
  abp->add_option("--c-dim", c_dim, "Dimensional constant (default: frozen value)");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Summarize a report directory");
  rep->add_option("dir", report_dir, "Directory with report.json")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(files, out, no_resume);
    if (*check) return cmd_check(dir, lemma);
    if (*dg) return cmd_degiorgi(csv, b0, delta0, r_max, E);
    if (*abp) return cmd_abp(patch, c_dim);
    if (*rep) return cmd_report(report_dir);
  } catch (const mafl::Error& e) {
    std::cerr << "mafl: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mafl: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

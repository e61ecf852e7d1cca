#include "mafl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "mafl/abp.hpp"
#include "mafl/aux_flow.hpp"
#include "mafl/checkpoint.hpp"
#include "mafl/cutoff.hpp"
#include "mafl/degiorgi.hpp"
#include "mafl/error.hpp"

namespace mafl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slice_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "phi_%04zu.bin", j);
  return buf;
}

fs::path run_directory(const PipelineOptions& opt, const std::string& label, int N) {
  return opt.out_dir / "runs" / label / ("N" + std::to_string(N));
}

struct Variant {
  std::string label;
  ThetaProfile theta;
  OperatorSpec op;
};

// Per-variant state shared by the checks; trajectories are cached per resolution.
class VariantRun {
 public:
  VariantRun(const Scenario& sc, const PipelineOptions& opt, Variant v, EstimateReport& report)
      : sc_(sc), opt_(opt), v_(std::move(v)), report_(report) {}

  const Variant& variant() const { return v_; }
  bool is_log() const { return v_.theta.kind == ThetaKind::Log; }
  bool is_ma() const { return v_.op.kind == OperatorKind::MongeAmpere; }

  FlowProblem problem(int N) const {
    const TorusGrid grid = make_grid(sc_.n, N);
    const ScalarField F = generate_F(sc_.F, grid, sc_.p, v_.theta).F;
    return {SourceData::from_field(F, sc_.p, v_.theta), v_.op, v_.theta};
  }

  const FlowTrajectory& trajectory(int N) {
    auto it = cache_.find(N);
    if (it != cache_.end()) return it->second;
    const auto t0 = Clock::now();
    const FlowProblem prob = problem(N);
    std::optional<FlowTrajectory> traj;
    const fs::path dir = opt_.out_dir.empty() ? fs::path() : run_directory(opt_, v_.label, N);
    if (!dir.empty() && opt_.resume) traj = load_trajectory(dir, prob, report_.scenario_hash);
    bool resumed = traj.has_value();
    if (!traj) {
      RunOptions ro;
      ro.T = sc_.T;
      ro.checkpoint_every = sc_.checkpoint_every;
      ro.max_high_freq = sc_.max_high_freq;
      std::size_t index = 0;
      if (!dir.empty()) {
        fs::remove_all(dir);
        ro.on_checkpoint = [&](const FlowState& s) {
          const fs::path file = dir / slice_name(index++);
          write_checkpoint(file, s.t, s.phi);
          write_sidecar(file, {{"scenario_hash", report_.scenario_hash}, {"run", v_.label}, {"N", N}});
        };
      }
      const ScalarField phi0 = generate_field(sc_.phi0, prob.source.F.grid);
      traj = run_flow(phi0, prob, ro);
      if (!dir.empty())
        write_text_file(dir / "complete.json",
                        json{{"scenario_hash", report_.scenario_hash},
                             {"run", v_.label},
                             {"N", N},
                             {"count", traj->phi.size()},
                             {"steps", traj->steps},
                             {"rejections", traj->rejections},
                             {"min_structural_all_steps", traj->min_structural_all_steps}}
                                .dump(2) +
                            "\n");
    }
    report_.timing["runs"][v_.label]["flow_N" + std::to_string(N)] = seconds_since(t0);
    report_.timing["runs"][v_.label]["resumed_N" + std::to_string(N)] = resumed;
    return cache_.emplace(N, std::move(*traj)).first->second;
  }

 private:
  const Scenario& sc_;
  const PipelineOptions& opt_;
  Variant v_;
  EstimateReport& report_;
  std::map<int, FlowTrajectory> cache_;
};

std::string scenario_tag(const std::string& name, const std::string& label) { return name + "/" + label; }

double window_top(const SpaceTimeField& phi_tilde, const Window& w) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t idx : w.indices) top = std::max(top, -phi_tilde.slices[idx].min());
  return top;
}

class Checker {
 public:
  Checker(const Scenario& sc, const PipelineOptions& opt, EstimateReport& report)
      : sc_(sc), opt_(opt), report_(report) {}

  bool on(const std::string& name) const {
    if (!sc_.checks.on(name)) return false;
    if (!opt_.only_checks) return true;
    const auto& only = *opt_.only_checks;
    return std::find(only.begin(), only.end(), name) != only.end();
  }

  void add(CheckRecord r, const std::string& label) {
    r.scenario = scenario_tag(sc_.name, label);
    report_.records.push_back(std::move(r));
  }

  void run_variant(VariantRun& vr);

 private:
  void aux_records(const AuxTrajectory& aux, const AuxWeight& weight, const ScalarField& F, const json& params,
                   const std::string& label);
  void chain_record(const FlowTrajectory& traj, const FlowProblem& prob, const AuxWeight& weight,
                    const AuxTrajectory& aux, const json& params, const std::string& label);
  void level_checks(VariantRun& vr, ConstantsLedger& ledger, json& run_info);
  void theta_checks(VariantRun& vr, const FlowTrajectory& traj, const SourceData& src);

  const Scenario& sc_;
  const PipelineOptions& opt_;
  EstimateReport& report_;
};

void Checker::aux_records(const AuxTrajectory& aux, const AuxWeight& weight, const ScalarField& F,
                          const json& params, const std::string& label) {
  if (!on("aux") && !on("lemma21")) return;
  if (on("aux")) {
    add(CheckRecord::make("aux.rate_sign", aux.max_rate_all_steps, 0.0, 1e-12, params), label);
    double worst = 0.0, scale = 1.0, gap = std::numeric_limits<double>::infinity();
    for (const auto& c : aux.checkpoints) {
      worst = std::max(worst, std::abs(c.dI_dt - c.dI_dt_expected));
      scale = std::max(scale, std::abs(c.dI_dt_expected));
      gap = std::min(gap, c.int_psi - c.I);
    }
    add(CheckRecord::make("aux.dI_dt", worst, 0.0, 1e-6 * scale, params), label);
    add(CheckRecord::make("aux.I_gap", -gap, 0.0, 1e-10, params), label);
  }
  if (on("lemma21")) {
    const auto l = lemma21_check(weight, aux, F);
    json p = params;
    p["C1"] = l.C1;
    add(CheckRecord::make("lemma21", l.sup_abs_psi, l.bound, 1e-10 * (1.0 + l.bound), p), label);
  }
}

void Checker::chain_record(const FlowTrajectory& traj, const FlowProblem& prob, const AuxWeight& weight,
                           const AuxTrajectory& aux, const json& params, const std::string& label) {
  const ChainResult c = check_generalized_chain(traj, prob, weight, aux);
  json p = params;
  p["step_slack"] = c.min_step_slack;
  p["points"] = c.points;
  p["structural_margin_checkpoints"] = c.min_structural_margin;
  const double worst = std::min({c.min_step_slack[0], c.min_step_slack[1], c.min_step_slack[2]});
  auto r = CheckRecord::make("chain.pointwise", -worst, 0.0, 1e-10, p);
  r.pass = c.pass;
  add(std::move(r), label);
}

void Checker::theta_checks(VariantRun& vr, const FlowTrajectory& traj, const SourceData& src) {
  const std::string& label = vr.variant().label;
  const ThetaProfile& th = vr.variant().theta;
  const json params{{"theta", th.name()}, {"a", th.exponent}};
  if (th.kind == ThetaKind::Power || th.kind == ThetaKind::Linear) {
    double rise = -std::numeric_limits<double>::infinity(), scale = 1.0;
    for (std::size_t j = 0; j < traj.diagnostics.size(); ++j) {
      scale = std::max(scale, std::abs(traj.diagnostics[j].rate_mass));
      if (j > 0) rise = std::max(rise, traj.diagnostics[j].rate_mass - traj.diagnostics[j - 1].rate_mass);
    }
    if (traj.diagnostics.size() < 2) rise = 0.0;
    add(CheckRecord::make("theta.monotone", rise, 0.0, 1e-8 * scale, params), label);
  }
  if (th.kind == ThetaKind::NegInverse) {
    double max_rate = -std::numeric_limits<double>::infinity();
    for (const auto& d : traj.diagnostics) max_rate = std::max(max_rate, d.max_rate);
    auto r = CheckRecord::make("theta.negative_rate", max_rate, 0.0, 0.0, params);
    r.pass = max_rate < 0.0;
    add(std::move(r), label);
    add(CheckRecord::make("theta.K_zero", src.K, 0.0, 0.0, params), label);
  }
}

void Checker::level_checks(VariantRun& vr, ConstantsLedger& ledger, json& run_info) {
  const std::string& label = vr.variant().label;
  const int n = sc_.n;
  const int N = sc_.N;
  const FlowTrajectory& traj = vr.trajectory(N);
  const FlowProblem prob = vr.problem(N);
  const ScalarField& F = prob.source.F;
  const auto& times = traj.phi_tilde.times;
  const CheckSettings& cs = sc_.checks;
  const double alpha = ledger.alpha;
  const double C_dim = abp_default_constant(2 * n);
  json retries = json::array();
  bool first_pair = true;
  bool chain_done = false;

  for (double t0 : cs.t0_grid) {
    const Window w = make_window(times, t0);
    const double top = window_top(traj.phi_tilde, w);
    for (double frac : cs.s_fractions) {
      const double s = frac * top;
      json params{{"t0", t0}, {"s", s}, {"s_fraction", frac}, {"N", N}};
      if (!(top > 0.0)) {
        params["vacuous"] = true;
        if (on("lemma31")) add(CheckRecord::make("lemma31", 0.0, 0.0, 0.0, params), label);
        continue;
      }
      const auto t_aux = Clock::now();
      const AuxWeight weight = build_level_weight(traj.phi_tilde, F, s, t0, cs.k_smoothing);
      const AuxTrajectory aux = run_aux(weight, F);
      report_.timing["runs"][label]["aux_seconds"] =
          report_.timing["runs"][label].value("aux_seconds", 0.0) + seconds_since(t_aux);
      params["A"] = weight.A;
      params["A_raw"] = weight.A_raw;
      aux_records(aux, weight, F, params, label);
      for (const auto& slice : aux.psi.slices) ledger.C2 = std::max(ledger.C2, exp_integral(slice, alpha));

      const KeyConstants31 k = constants31(n, weight.A, ledger.C4);
      if (first_pair) {
        ledger.beta31 = k.beta, ledger.eps31 = k.epsilon, ledger.Lambda31 = k.Lambda, ledger.c31 = k.c;
        first_pair = false;
      }
      if (on("lemma31")) {
        Lemma31Result r = check_lemma31(aux.psi, traj.phi_tilde, s, k);
        json p = params;
        p["max_H_initial"] = r.max_H_initial;
        p["max_H_interior"] = r.max_H_interior;
        p["argmax_time"] = r.argmax_time;
        p["retried"] = false;
        const int N2 = 2 * N;
        if (!r.pass && N2 <= cs.retry_max_N) {
          const FlowTrajectory& fine = vr.trajectory(N2);
          const FlowProblem fine_prob = vr.problem(N2);
          const Window w2 = make_window(fine.phi_tilde.times, t0);
          const double s2 = frac * window_top(fine.phi_tilde, w2);
          const AuxWeight fw = build_level_weight(fine.phi_tilde, fine_prob.source.F, s2, t0, cs.k_smoothing);
          const AuxTrajectory faux = run_aux(fw, fine_prob.source.F);
          const KeyConstants31 k2 = constants31(n, fw.A, ledger.C4);
          const Lemma31Result r2 = check_lemma31(faux.psi, fine.phi_tilde, s2, k2);
          retries.push_back({{"t0", t0}, {"s_fraction", frac}, {"coarse_margin", r.max_H}, {"fine_margin", r2.max_H}});
          p["retried"] = true;
          p["coarse_max_H"] = r.max_H;
          p["N"] = N2;
          p["s"] = s2;
          p["max_H_initial"] = r2.max_H_initial;
          p["max_H_interior"] = r2.max_H_interior;
          p["argmax_time"] = r2.argmax_time;
          r = r2;
        }
        add(CheckRecord::make("lemma31", r.max_H, 0.0, r.tolerance, p), label);
      }
      if (on("exp_bound")) {
        const ExpBoundResult e = check_exp_bound(aux.psi, traj.phi_tilde, s, k, alpha);
        json p = params;
        p["lambda"] = e.lambda;
        p["alpha"] = alpha;
        add(CheckRecord::make("exp_bound", e.lhs, e.rhs, 1e-6 * std::abs(e.rhs), p), label);
      }
      if (on("young")) {
        const double lambda = alpha / k.c;
        const SpaceTimeField v = young_test_function(traj.phi_tilde, s, w, weight.A, lambda);
        const YoungResult y = check_young(v, traj.phi_tilde, F, s, w, sc_.p, young_constant_default(sc_.p));
        json p = params;
        p["C_p"] = y.C_p;
        p["orlicz_norm"] = y.orlicz_norm;
        add(CheckRecord::make("young", y.lhs, y.rhs, 0.0, p), label);
      }
      if (on("chain") && !chain_done) {
        chain_done = true;
        chain_record(traj, prob, weight, aux, params, label);
      }
    }

    const bool entropy_ok = sc_.p > n + 1.0;
    if (on("iteration") && entropy_ok) {
      const IterationResult it = check_iteration(traj.phi_tilde, F, t0, sc_.p, cs.iteration_levels);
      json p{{"t0", t0},
             {"N", N},
             {"delta0", it.delta0},
             {"hoelder_exponent", hoelder_exponent(n, sc_.p)},
             {"B0_measured", it.B0_measured},
             {"B0_measured_hoelder", it.B0_measured_hoelder},
             {"B0_predicted", it.B0_predicted},
             {"rows", it.rows.size()},
             {"vacuous", it.vacuous}};
      add(CheckRecord::make("iteration.lower", it.vacuous ? 0.0 : -it.lower_min_slack, 0.0, 1e-12, p), label);
      auto b0 = CheckRecord::make("iteration.B0", it.B0_measured_hoelder, it.B0_predicted,
                                  1e-9 * std::abs(it.B0_predicted), p);
      b0.pass = b0.pass && std::isfinite(it.B0_measured);
      add(std::move(b0), label);
    }
    {
      const int M = cs.degiorgi_samples;
      const double s_end = 1.05 * std::max(top, 1e-12);
      DeGiorgiInput in;
      for (int i = 0; i < M; ++i) {
        const double s = s_end * i / (M - 1);
        in.s.push_back(s);
        in.Phi.push_back(level_mass(traj.phi_tilde, F, s, w));
        report_.levels.push_back({label, t0, s, in.Phi.back()});
      }
      if (on("degiorgi") && entropy_ok) {
        in.delta0 = hoelder_exponent(n, sc_.p) - 1.0;
        in.r_max = s_end;
        in.B0 = std::max(degiorgi_minimal_B0(in.s, in.Phi, in.delta0, in.r_max), 1e-300) * (1.0 + 1e-9);
        const DeGiorgiResult d = degiorgi_s_infinity(in);
        json p = d.to_json();
        p["t0"] = t0;
        p["B0"] = in.B0;
        p["delta0"] = in.delta0;
        p["top"] = top;
        auto r = CheckRecord::make("degiorgi", d.S_infinity, d.bound, 0.0, p);
        r.pass = d.pass;
        add(std::move(r), label);
      }
    }
    if (on("lemma41") || on("cutoff")) {
      const AuxWeight ew = build_entropy_weight(times, F, sc_.p, t0);
      const AuxTrajectory eaux = run_aux(ew, F);
      json params{{"t0", t0}, {"N", N}, {"weight", "entropy"}};
      aux_records(eaux, ew, F, params, label);
      const KeyConstants41 k41 = constants41(n, sc_.p, ledger.Ent_p, ledger.C5);
      const double target = lemma41_default_target(eaux.psi, traj.phi_tilde, k41, alpha, C_dim);
      const Lemma41Result l = check_lemma41(eaux.psi, traj.phi_tilde, k41, target);
      ledger.beta41 = k41.beta, ledger.eps41 = k41.epsilon, ledger.Lambda41 = k41.Lambda, ledger.b = k41.b;
      ledger.r_inj = k41.r_inj;
      ledger.theta = cutoff_theta(k41, l.M_val);
      if (on("lemma41")) {
        json p = params;
        p["h_errors"] = l.h_errors;
        p["s_values"] = l.s_values;
        p["M"] = l.M_val;
        p["C_dim"] = C_dim;
        auto r = CheckRecord::make("lemma41", l.max_rho, l.C_target, 0.0, p);
        r.pass = l.pass;
        add(std::move(r), label);
      }
      if (on("cutoff")) {
        const CutoffResult c = build_cutoff(F.grid, 0, k41, l.M_val);
        json p = c.to_json();
        p["t0"] = t0;
        add(CheckRecord::make("cutoff.gradient", c.grad_ratio, 10.0, 0.0, p), label);
        add(CheckRecord::make("cutoff.hessian", c.hess_ratio, 10.0, 0.0, p), label);
        add(CheckRecord::make("cutoff.range", 0.9 - c.eta_min, 0.0, 0.0, p), label);
      }
    }
  }
  if (!retries.empty()) run_info["retries"] = retries;
}

void Checker::run_variant(VariantRun& vr) {
  const Variant& v = vr.variant();
  const int n = sc_.n;
  const FlowTrajectory& traj = vr.trajectory(sc_.N);
  const FlowProblem prob = vr.problem(sc_.N);
  const SourceData& src = prob.source;

  for (const auto& d : traj.diagnostics) report_.series.push_back({v.label, d});

  ConstantsLedger ledger;
  ledger.Ent_p = src.ent_p;
  ledger.K = src.K;
  ledger.C1 = 1.0;
  ledger.C3_green = n * green_kernel(src.F.grid).l1_norm;
  ledger.C3 = std::max(ledger.C3_green, src.K);
  ledger.C4 = C4_from_C3(n, ledger.C3);
  ledger.C7 = C7_constant(n, v.op.gamma);
  ledger.E = energy_sup(traj.phi_tilde, src.F).E;

  json info{{"label", v.label},
            {"theta", v.theta.name()},
            {"theta_a", v.theta.exponent},
            {"operator", v.op.name()},
            {"gamma", v.op.gamma},
            {"N", sc_.N},
            {"checkpoints", traj.phi.size()},
            {"steps", traj.steps},
            {"rejections", traj.rejections},
            {"int_nF", src.int_nF}};

  if (vr.is_log() && vr.is_ma() && on("lemma23")) {
    const Lemma23Result r = lemma23_checks(traj, src);
    const json p{{"N", sc_.N}, {"C3", r.C3}};
    add(CheckRecord::make("lemma23.mean_rate", r.mean_rate_sup, r.K, 1e-6, p), v.label);
    add(CheckRecord::make("lemma23.jensen", r.jensen_lhs, r.jensen_rhs, 1e-6, p), v.label);
    add(CheckRecord::make("lemma23.green", r.sup_tilde, r.C3, 0.0, p), v.label);
    add(CheckRecord::make("lemma23.l1", r.l1_tilde, r.l1_bound, 0.0, p), v.label);
  }
  if (vr.is_log() && on("chain")) {
    double min_s = traj.min_structural_all_steps;
    add(CheckRecord::make("chain.structural", v.op.gamma, min_s, 1e-8, {{"N", sc_.N}, {"gamma", v.op.gamma}}),
        v.label);
  }
  if (!vr.is_log() && on("theta")) theta_checks(vr, traj, src);

  if (vr.is_log()) {
    ledger.alpha = calibrate_alpha({&traj.phi_tilde});
    if (vr.is_ma()) {
      level_checks(vr, ledger, info);
    } else if (on("chain")) {
      // Generalized operators: only the structural chain, on one level-set aux run.
      const Window w = make_window(traj.phi_tilde.times, sc_.checks.t0_grid.front());
      const double top = window_top(traj.phi_tilde, w);
      if (top > 0.0) {
        const double s = sc_.checks.s_fractions.front() * top;
        const AuxWeight weight = build_level_weight(traj.phi_tilde, src.F, s, w.t0, sc_.checks.k_smoothing);
        const AuxTrajectory aux = run_aux(weight, src.F);
        const json params{{"t0", w.t0}, {"s", s}, {"N", sc_.N}};
        aux_records(aux, weight, src.F, params, v.label);
        chain_record(traj, prob, weight, aux, params, v.label);
      }
    }
  }
  info["constants"] = ledger.to_json();
  report_.runs.push_back(info);
}

}  // namespace

std::string variant_label(const ThetaProfile& theta, const OperatorSpec& op) {
  std::string t = theta.name();
  if (theta.kind == ThetaKind::Power) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", theta.exponent);
    t += buf;
  }
  const std::string o = op.kind == OperatorKind::MongeAmpere ? "ma" : "sigma" + std::to_string(op.k);
  return t + "-" + o;
}

std::optional<FlowTrajectory> load_trajectory(const fs::path& run_dir, const FlowProblem& problem,
                                              const std::string& scenario_hash) {
  const fs::path manifest = run_dir / "complete.json";
  if (!fs::exists(manifest)) return std::nullopt;
  json m;
  try {
    m = json::parse(read_text_file(manifest));
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
  if (m.value("scenario_hash", "") != scenario_hash) return std::nullopt;
  const auto count = m.at("count").get<std::size_t>();
  SpaceTimeField phi(problem.source.F.grid);
  for (std::size_t j = 0; j < count; ++j) {
    Checkpoint c = read_checkpoint(run_dir / slice_name(j));
    if (!(c.field.grid == phi.grid)) throw Error(ErrorKind::GridMismatch, "checkpoint grid differs from scenario");
    phi.push_back(c.time, std::move(c.field));
  }
  FlowTrajectory traj = trajectory_from_slices(phi, problem);
  traj.steps = m.value("steps", std::size_t{0});
  traj.rejections = m.value("rejections", std::size_t{0});
  traj.min_structural_all_steps = m.value("min_structural_all_steps", traj.min_structural_all_steps);
  return traj;
}

EstimateReport run_scenario(const Scenario& sc, const PipelineOptions& opt) {
  EstimateReport report;
  report.scenario = sc.name;
  report.scenario_hash = sc.hash();
  report.timing = {{"scenario", sc.name}, {"runs", json::object()}};
  const auto t0 = Clock::now();
  if (!opt.out_dir.empty() && opt.emit) write_text_file(opt.out_dir / "scenario.json", sc.canonical.dump(2) + "\n");

  Checker checker(sc, opt, report);
  try {
    for (const auto& theta : sc.thetas) {
      for (std::size_t oi = 0; oi < sc.operators.size(); ++oi) {
        const OperatorSpec op = sc.operator_spec(oi);
        VariantRun vr(sc, opt, {variant_label(theta, op), theta, op}, report);
        checker.run_variant(vr);
      }
    }
  } catch (const Error& e) {
    report.complete = false;
    report.error = e.what();
  }
  report.timing["total_seconds"] = seconds_since(t0);
  if (!opt.out_dir.empty() && opt.emit) emit_report(report, opt.out_dir);
  return report;
}

}  // namespace mafl

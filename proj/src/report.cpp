#include "mafl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mafl/checkpoint.hpp"

namespace mafl {

bool EstimateReport::pass() const {
  return complete && std::all_of(records.begin(), records.end(), [](const CheckRecord& c) { return c.pass; });
}

namespace {

// JSON has no infinities; they are spelled as strings.
nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

nlohmann::json sanitize(const nlohmann::json& j) {
  if (j.is_number_float()) return num(j.get<double>());
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : j.items()) out[k] = sanitize(v);
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(sanitize(v));
    return out;
  }
  return j;
}

}  // namespace

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) recs.push_back(r.to_json());
  nlohmann::json j{{"schema_version", kReportSchemaVersion},
                   {"scenario", scenario},
                   {"scenario_hash", scenario_hash},
                   {"complete", complete},
                   {"error", error.empty() ? nlohmann::json(nullptr) : nlohmann::json(error)},
                   {"pass", pass()},
                   {"runs", runs},
                   {"records", recs}};
  return sanitize(j);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string series_csv(const EstimateReport& r) {
  std::ostringstream out;
  out << "run,t,sup_tilde,inf_tilde,sup_abs_tilde,mean_rate,rate_mass,int_abs_tilde,min_eigen,max_rate,"
         "min_structural,high_freq\n";
  for (const auto& row : r.series) {
    const auto& d = row.d;
    out << row.run;
    for (double v : {d.time, d.sup_tilde, d.inf_tilde, std::max(d.sup_tilde, -d.inf_tilde), d.mean_rate,
                     d.rate_mass, d.int_abs_tilde, d.min_eigen, d.max_rate, d.min_structural, d.high_freq})
      out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::string levels_csv(const EstimateReport& r) {
  std::ostringstream out;
  out << "run,t0,s,phi\n";
  for (const auto& row : r.levels)
    out << row.run << ',' << format_double(row.t0) << ',' << format_double(row.s) << ',' << format_double(row.phi)
        << '\n';
  return out.str();
}

std::string sup_abs_csv(const EstimateReport& r) {
  std::ostringstream out;
  out << "run,t,sup_abs_tilde\n";
  for (const auto& row : r.series)
    out << row.run << ',' << format_double(row.d.time) << ','
        << format_double(std::max(row.d.sup_tilde, -row.d.inf_tilde)) << '\n';
  return out.str();
}

void emit_report(const EstimateReport& r, const std::filesystem::path& dir) {
  write_text_file(dir / "report.json", r.to_json().dump(2) + "\n");
  write_text_file(dir / "series.csv", series_csv(r));
  write_text_file(dir / "levels.csv", levels_csv(r));
  write_text_file(dir / "sup_abs.csv", sup_abs_csv(r));
  write_text_file(dir / "timing.json", sanitize(r.timing).dump(2) + "\n");
}

}  // namespace mafl

#include <filesystem>

#include "doctest.h"
#include "mafl/checkpoint.hpp"
#include "mafl/error.hpp"
#include "mafl/pipeline.hpp"

using namespace mafl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
json zero_scenario() {
  return {{"schema_version", 1}, {"name", "zero"}, {"n", 1}, {"N", 16}, {"T", 0.5}, {"checkpoint_every", 0.125},
          {"F", {{"kind", "zero"}}}};
}
}  // namespace

TEST_CASE("scenario validation") {
  CHECK_NOTHROW(Scenario::from_json(zero_scenario()));
  auto bad = zero_scenario();
  bad["colour"] = "red";
  CHECK_THROWS_AS(Scenario::from_json(bad), Error);
  bad = zero_scenario();
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(Scenario::from_json(bad), Error);
  bad = zero_scenario();
  bad["N"] = 24;
  CHECK_THROWS_AS(Scenario::from_json(bad), Error);
  bad = zero_scenario();
  bad["checks"] = {{"enabled", {"lemma99"}}};
  CHECK_THROWS_AS(Scenario::from_json(bad), Error);
  bad = zero_scenario();
  bad["phi0"] = {{"kind", "log_pole"}};
  CHECK_THROWS_AS(Scenario::from_json(bad), Error);
  bad = zero_scenario();
  bad["F"] = {{"kind", "trig"}, {"modes", {{{"k", {0, 0, 1}}, {"amplitude", 0.1}}}}};
  const auto sc = Scenario::from_json(bad);
  CHECK_THROWS_AS(generate_field(sc.F, make_grid(1, 16)), Error);
}

TEST_CASE("scenario hash depends on content only") {
  const auto a = Scenario::from_json(zero_scenario());
  const auto b = Scenario::from_json(json::parse(zero_scenario().dump(4)));
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  auto j = zero_scenario();
  j["T"] = 0.75;
  CHECK(Scenario::from_json(j).hash() != a.hash());
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("zero scenario passes trivially") {
  const auto r = run_scenario(Scenario::from_json(zero_scenario()));
  CHECK(r.complete);
  CHECK(r.pass());
  CHECK_FALSE(r.records.empty());
  for (const auto& row : r.series) {
    CHECK(row.d.sup_tilde == 0.0);
    CHECK(row.d.inf_tilde == 0.0);
    CHECK(row.d.mean_rate == 0.0);
  }
}

TEST_CASE("resume reuses checkpoints and reproduces the report") {
  const fs::path dir = fs::temp_directory_path() / "mafl_pipeline_resume";
  fs::remove_all(dir);
  auto j = zero_scenario();
  j["name"] = "const";
  j["F"] = {{"kind", "constant"}, {"c", 0.25}};
  const auto sc = Scenario::from_json(j);
  const auto first = run_scenario(sc, {.out_dir = dir, .resume = true});
  const std::string report = read_text_file(dir / "report.json");
  const auto second = run_scenario(sc, {.out_dir = dir, .resume = true});
  CHECK(second.timing["runs"]["log-ma"]["resumed_N16"] == true);
  CHECK(read_text_file(dir / "report.json") == report);
  CHECK(first.scenario_hash == second.scenario_hash);

  // A different scenario in the same directory must not pick up the old run.
  j["F"]["c"] = 0.5;
  const auto third = run_scenario(Scenario::from_json(j), {.out_dir = dir, .resume = true});
  CHECK(third.timing["runs"]["log-ma"]["resumed_N16"] == false);
  fs::remove_all(dir);
}

TEST_CASE("solver failures end the run as incomplete") {
  auto j = zero_scenario();
  j["phi0"] = {{"kind", "trig"}, {"modes", {{{"k", {1, 0}}, {"amplitude", 1.0}}}}};
  const auto r = run_scenario(Scenario::from_json(j));
  CHECK_FALSE(r.complete);
  CHECK_FALSE(r.pass());
  CHECK_FALSE(r.error.empty());
}

#include <doctest.h>

#include <optional>
#include <string>

#include "ctlab/error.hpp"
#include "ctlab/report.hpp"
#include "ctlab/scenario.hpp"

using namespace ctlab;

namespace {

// A 1D scenario small enough to run in well under a second.
Json small_scalar() {
  return Json::parse(R"({
    "name": "small",
    "seed": 5,
    "grid": {"dim": 1, "points": 128, "half_length": 30},
    "potentials": [{"amplitude": -0.6, "width": 1.0}],
    "data": [{"recipe": "random_band_limited", "envelope": 2.0, "band_pass": 0.5, "band_stop": 1.0, "count": 2}],
    "window": {"start": 0, "end": 4},
    "stepper": {"dt": 0.05, "snapshot_every": 4, "boundary_mass_guard": 1.0},
    "wave_operator": {"horizon": 6},
    "estimators": [{"kind": "norm_drift"}, {"kind": "strichartz"}]
  })");
}

std::optional<ErrorCode> code_of(const Json& j) {
  try {
    (void)parse_scenario(j);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

std::string message_of(const Json& j) {
  try {
    (void)parse_scenario(j);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("grid is required; everything else has echoed defaults") {
  CHECK(code_of(Json::object()) == ErrorCode::validation);
  const Scenario s = parse_scenario(Json::parse(R"({"grid": {}})"));
  CHECK(s.name == "scenario");
  CHECK(s.dim == 3);
  CHECK(s.points == 32);
  CHECK(s.stepper.dt == 0.1);
  CHECK(s.stepper.snapshot_every == 5);
  CHECK(s.wave_operator.horizon == 40.0);
  CHECK(s.estimators.empty());
  CHECK(s.resolved["grid"]["points"] == 32);
  CHECK(s.resolved["stepper"]["dt"] == 0.1);
  CHECK(s.resolved.contains("window"));
  // The resolved form parses back to the same scenario.
  const Scenario again = parse_scenario(s.resolved);
  CHECK(again.resolved == s.resolved);
}

TEST_CASE("unknown keys are rejected by name at every level") {
  Json j = small_scalar();
  j["grdi"] = 1;
  CHECK(code_of(j) == ErrorCode::validation);
  CHECK(message_of(j).find("grdi") != std::string::npos);

  j = small_scalar();
  j["grid"]["point"] = 64;
  CHECK(message_of(j).find("scenario.grid.point") != std::string::npos);

  j = small_scalar();
  j["estimators"][1]["params"] = Json::object();
  CHECK(message_of(j).find("scenario.estimators[1].params") != std::string::npos);

  j = small_scalar();
  j["potentials"][0]["famly"] = "gaussian";
  CHECK(message_of(j).find("famly") != std::string::npos);
}

TEST_CASE("invalid values are validation errors") {
  Json j = small_scalar();
  j["grid"]["points"] = 100;
  CHECK(code_of(j) == ErrorCode::validation);
  j = small_scalar();
  j["stepper"]["dt"] = -0.1;
  CHECK(code_of(j) == ErrorCode::validation);
  j = small_scalar();
  j["estimators"][0]["kind"] = "admissibility";  // matrix-only estimator
  CHECK(code_of(j) == ErrorCode::validation);
  j = small_scalar();
  j["data"][0]["recipe"] = "plane_wave";
  CHECK(code_of(j) == ErrorCode::validation);
  j = small_scalar();
  j["estimators"][1]["inverse_p"] = Json::array({Json::array({3, 4})});
  CHECK(code_of(j) == ErrorCode::validation);
  CHECK_THROWS_AS(parse_config("{not json"), Error);
}

TEST_CASE("multi-scenario files and estimator parameter resolution") {
  Json file;
  file["scenarios"] = Json::array({small_scalar(), small_scalar()});
  file["scenarios"][1]["name"] = "second";
  const auto all = parse_config(file.dump());
  REQUIRE(all.size() == 2);
  CHECK(all[1].name == "second");
  const EstimatorRequest& st = all[0].estimators[1];
  CHECK(st.kind == "strichartz");
  CHECK(st.params.contains("inverse_p"));
  CHECK(st.params["inverse_p"].size() == 3);
  CHECK(st.params["projected"] == false);
}

TEST_CASE("presets fill an empty estimator list only") {
  Json j = small_scalar();
  j.erase("estimators");
  Scenario s = parse_scenario(j);
  apply_preset(s, "verify-strichartz");
  REQUIRE(!s.estimators.empty());
  bool has_strichartz = false;
  for (const auto& e : s.estimators) has_strichartz |= e.kind == "strichartz";
  CHECK(has_strichartz);

  Scenario kept = parse_scenario(small_scalar());
  apply_preset(kept, "verify-decay");
  CHECK(kept.estimators.size() == 2);
  CHECK_THROWS_AS(apply_preset(kept, "no-such-preset"), Error);
  Scenario scalar = parse_scenario(Json::parse(R"({"grid": {}})"));
  CHECK_THROWS_AS(apply_preset(scalar, "matrix-diagnose"), Error);
  CHECK(preset_estimators("matrix-diagnose", true) ==
        std::vector<std::string>{"admissibility", "stability", "kernel_growth"});
}

TEST_CASE("runs are deterministic in the seed") {
  const Scenario s = parse_scenario(small_scalar());
  const std::string a = report_csv(run_scenario(s));
  const std::string b = report_csv(run_scenario(s));
  CHECK(parse_csv(a).size() >= 3);
  CHECK(a == b);
  Scenario other = s;
  override_seed(other, 6);
  CHECK(report_csv(run_scenario(other)) != a);
}

TEST_CASE("expect bounds become assertions") {
  Json j = small_scalar();
  j["estimators"][0]["expect"] = {{"max", 1e-10}};
  j["estimators"][1]["expect"] = {{"min", 1e6}};
  const RunReport r = run_scenario(parse_scenario(j));
  REQUIRE(r.assertions.size() >= 2);
  bool drift_pass = false, strichartz_fail = false;
  for (const auto& a : r.assertions) {
    if (a.name.find("norm_drift") != std::string::npos) drift_pass = a.pass;
    if (a.name.find("strichartz") != std::string::npos && !a.pass) strichartz_fail = true;
  }
  CHECK(drift_pass);
  CHECK(strichartz_fail);
}

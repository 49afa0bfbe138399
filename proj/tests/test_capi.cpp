#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "ctlab/ctlab.h"

namespace {

const char* kConfig = R"({
  "name": "capi",
  "grid": {"dim": 1, "points": 128, "half_length": 30},
  "potentials": [{"amplitude": -0.6, "width": 1.0}],
  "datum": {"recipe": "gaussian", "width": 2.0, "momentum": [0.4]},
  "window": {"start": 0, "end": 3},
  "stepper": {"dt": 0.05, "snapshot_every": 4, "boundary_mass_guard": 1.0},
  "wave_operator": {"horizon": 6},
  "estimators": [{"kind": "norm_drift", "expect": {"max": 1e-9}}, {"kind": "bound_states"}]
})";

ctlab_potential well(double amplitude, double width) {
  ctlab_potential p{};
  p.family = CTLAB_GAUSSIAN;
  p.amplitude = amplitude;
  p.width = width;
  return p;
}

}  // namespace

TEST_CASE("C API: version, status names and error reporting") {
  CHECK(std::strlen(ctlab_version()) > 0);
  CHECK(std::string(ctlab_status_name(CTLAB_OK)) == "ok");
  ctlab_grid* g = nullptr;
  CHECK(ctlab_grid_create(1, 100, 5.0, &g) == CTLAB_INVALID_PARAMETER);
  CHECK(g == nullptr);
  CHECK(std::strlen(ctlab_last_error()) > 0);
  CHECK(ctlab_grid_create(1, 64, 5.0, nullptr) == CTLAB_INVALID_PARAMETER);
  // Destroying null handles is a no-op.
  ctlab_grid_destroy(nullptr);
  ctlab_field_destroy(nullptr);
  ctlab_report_destroy(nullptr);
  ctlab_config_destroy(nullptr);
  ctlab_bound_states_destroy(nullptr);
}

TEST_CASE("C API: fields, norms and free propagation") {
  ctlab_grid* g = nullptr;
  REQUIRE(ctlab_grid_create(1, 256, 20.0, &g) == CTLAB_OK);
  CHECK(ctlab_grid_size(g) == 256);
  CHECK(ctlab_grid_spacing(g) == doctest::Approx(40.0 / 256));

  const double c[3] = {0.0, 0.0, 0.0}, k[3] = {0.5, 0.0, 0.0};
  ctlab_field* f = nullptr;
  REQUIRE(ctlab_field_gaussian(g, c, 1.5, k, &f) == CTLAB_OK);
  double n2 = 0.0, ninf = 0.0;
  REQUIRE(ctlab_field_lp_norm(f, 2.0, &n2) == CTLAB_OK);
  REQUIRE(ctlab_field_lp_norm(f, INFINITY, &ninf) == CTLAB_OK);
  CHECK(n2 > 0.0);
  CHECK(ninf > 0.0);

  ctlab_field* out = nullptr;
  REQUIRE(ctlab_propagate(nullptr, 0, f, 0.0, 2.0, 0.1, &out) == CTLAB_OK);
  double m2 = 0.0;
  ctlab_field_lp_norm(out, 2.0, &m2);
  CHECK(m2 == doctest::Approx(n2).epsilon(1e-12));
  double mi = 0.0;
  ctlab_field_lp_norm(out, INFINITY, &mi);
  CHECK(mi < ninf);

  // Round trip through raw values.
  std::vector<double> raw(2 * 256);
  REQUIRE(ctlab_field_values(out, raw.data(), raw.size()) == CTLAB_OK);
  CHECK(ctlab_field_values(out, raw.data(), 10) == CTLAB_INVALID_PARAMETER);
  ctlab_field* copy = nullptr;
  REQUIRE(ctlab_field_create(g, raw.data(), raw.size(), &copy) == CTLAB_OK);
  double c2 = 0.0;
  ctlab_field_lp_norm(copy, 2.0, &c2);
  CHECK(c2 == m2);

  const ctlab_potential v = well(-1.0, 1.0);
  ctlab_field* w = nullptr;
  REQUIRE(ctlab_propagate(&v, 1, f, 0.0, 1.0, 0.01, &w) == CTLAB_OK);
  double w2 = 0.0;
  ctlab_field_lp_norm(w, 2.0, &w2);
  CHECK(w2 == doctest::Approx(n2).epsilon(1e-12));

  ctlab_field_destroy(w);
  ctlab_field_destroy(copy);
  ctlab_field_destroy(out);
  ctlab_field_destroy(f);
  ctlab_grid_destroy(g);
}

TEST_CASE("C API: bound states of a sech^2 well") {
  ctlab_grid* g = nullptr;
  REQUIRE(ctlab_grid_create(1, 256, 24.0, &g) == CTLAB_OK);
  ctlab_potential p = well(-3.0, 1.0);  // l(l+1)/2 = 3 with l = 2: E = -2, -1/2
  p.family = CTLAB_SECH_SQUARED;
  ctlab_bound_states* b = nullptr;
  REQUIRE(ctlab_bound_states_compute(&p, g, 5, 1e-9, &b) == CTLAB_OK);
  REQUIRE(ctlab_bound_states_count(b) == 2);
  double e0 = 0.0, e1 = 0.0;
  ctlab_bound_states_eigenvalue(b, 0, &e0);
  ctlab_bound_states_eigenvalue(b, 1, &e1);
  CHECK(e0 == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(e1 == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(ctlab_bound_states_eigenvalue(b, 2, &e0) == CTLAB_INVALID_PARAMETER);
  ctlab_field* u = nullptr;
  REQUIRE(ctlab_bound_states_eigenfunction(b, 0, &u) == CTLAB_OK);
  double n = 0.0;
  ctlab_field_lp_norm(u, 2.0, &n);
  CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
  ctlab_field_destroy(u);
  ctlab_bound_states_destroy(b);
  ctlab_grid_destroy(g);
}

TEST_CASE("C API: config, run and report") {
  ctlab_config* bad = nullptr;
  CHECK(ctlab_config_parse(R"({"grid": {}, "colour": 1})", &bad) == CTLAB_VALIDATION);
  CHECK(std::string(ctlab_last_error()).find("colour") != std::string::npos);
  CHECK(ctlab_config_load("/nonexistent/ctlab.json", &bad) == CTLAB_IO);

  ctlab_config* cfg = nullptr;
  REQUIRE(ctlab_config_parse(kConfig, &cfg) == CTLAB_OK);
  REQUIRE(ctlab_config_count(cfg) == 1);
  const char* name = nullptr;
  ctlab_config_name(cfg, 0, &name);
  CHECK(std::string(name) == "capi");
  CHECK(ctlab_config_apply_preset(cfg, "bogus") == CTLAB_VALIDATION);
  CHECK(ctlab_config_set_seed(cfg, 9) == CTLAB_OK);

  ctlab_report* r = nullptr;
  REQUIRE(ctlab_run(cfg, 0, &r) == CTLAB_OK);
  CHECK(ctlab_run(cfg, 1, &r) == CTLAB_INVALID_PARAMETER);
  CHECK(ctlab_report_valid(r) == 1);
  CHECK(ctlab_report_row_count(r) >= 2);
  CHECK(ctlab_report_error_count(r) == 0);
  CHECK(ctlab_report_failed_assertions(r) == 0);
  double drift = 1.0;
  REQUIRE(ctlab_report_find(r, "norm_drift", &drift) == CTLAB_OK);
  CHECK(drift < 1e-9);
  // Rows of the bound-state estimator carry eigenvalues.
  double e0 = 0.0;
  REQUIRE(ctlab_report_find(r, "bound_states", &e0) == CTLAB_OK);
  CHECK(e0 < 0.0);
  CHECK(e0 > -0.6);
  CHECK(ctlab_report_find(r, "nothing", &e0) == CTLAB_INVALID_PARAMETER);
  const char* est = nullptr;
  double val = 0.0;
  REQUIRE(ctlab_report_row(r, 0, &est, &val) == CTLAB_OK);
  CHECK(std::strlen(est) > 0);
  const char* csv = nullptr;
  REQUIRE(ctlab_report_csv(r, &csv) == CTLAB_OK);
  CHECK(std::string(csv).rfind("scenario,estimator,param_json,value,diag_json", 0) == 0);
  const char* json = nullptr;
  REQUIRE(ctlab_report_json(r, &json) == CTLAB_OK);
  CHECK(std::string(json).find("\"capi\"") != std::string::npos);
  CHECK(ctlab_report_emit(r, CTLAB_TEST_TMP "/capi_out", "csv,bogus") == CTLAB_VALIDATION);
  CHECK(ctlab_report_emit(r, CTLAB_TEST_TMP "/capi_out", "csv") == CTLAB_OK);
  ctlab_report_destroy(r);
  ctlab_config_destroy(cfg);
}

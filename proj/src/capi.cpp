#include "ctlab/ctlab.h"

#include <cmath>
#include <memory>
#include <string>

#include "ctlab/datum.hpp"
#include "ctlab/error.hpp"
#include "ctlab/report.hpp"
#include "ctlab/scenario.hpp"
#include "ctlab/spectrum.hpp"

using namespace ctlab;

struct ctlab_grid {
  Grid grid;
};
struct ctlab_field {
  ScalarField field;
};
struct ctlab_bound_states {
  BoundStateSet set;
};
struct ctlab_config {
  std::vector<Scenario> scenarios;
};
struct ctlab_report {
  RunReport report;
  mutable std::string json;
  mutable std::string csv;
};

namespace {

thread_local std::string last_error;

ctlab_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_parameter: return CTLAB_INVALID_PARAMETER;
    case ErrorCode::invalid_input: return CTLAB_INVALID_INPUT;
    case ErrorCode::solver_failure: return CTLAB_SOLVER_FAILURE;
    case ErrorCode::grid_too_large: return CTLAB_GRID_TOO_LARGE;
    case ErrorCode::horizon_too_small: return CTLAB_HORIZON_TOO_SMALL;
    case ErrorCode::degenerate_ratio: return CTLAB_DEGENERATE_RATIO;
    case ErrorCode::validation: return CTLAB_VALIDATION;
    case ErrorCode::io: return CTLAB_IO;
  }
  return CTLAB_INTERNAL;
}

template <class F>
ctlab_status guarded(F&& body) {
  try {
    body();
    return CTLAB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CTLAB_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CTLAB_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_parameter, std::string(what) + " must not be null");
}

Vec3 vec(const double v[3]) { return {v[0], v[1], v[2]}; }

MovingPotential convert(const ctlab_potential& p) {
  MovingPotential mp;
  require(p.family == CTLAB_GAUSSIAN || p.family == CTLAB_SECH_SQUARED, ErrorCode::invalid_parameter,
          "unknown potential profile");
  mp.spec.family = p.family == CTLAB_GAUSSIAN ? PotentialFamily::gaussian : PotentialFamily::sech_squared;
  mp.spec.amplitude = p.amplitude;
  mp.spec.width = p.width;
  mp.spec.center = vec(p.center);
  mp.velocity = vec(p.velocity);
  mp.offset = vec(p.offset);
  mp.validate();
  return mp;
}

}  // namespace

extern "C" {

const char* ctlab_version(void) { return "1.0.0"; }

const char* ctlab_status_name(ctlab_status s) {
  switch (s) {
    case CTLAB_OK: return "ok";
    case CTLAB_INTERNAL: return "internal";
    default: return to_string(static_cast<ErrorCode>(s));
  }
}

const char* ctlab_last_error(void) { return last_error.c_str(); }

ctlab_status ctlab_grid_create(int dim, int points_per_axis, double half_length, ctlab_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ctlab_grid{Grid(dim, points_per_axis, half_length)};
  });
}

void ctlab_grid_destroy(ctlab_grid* g) { delete g; }
size_t ctlab_grid_size(const ctlab_grid* g) { return g ? g->grid.size() : 0; }
double ctlab_grid_spacing(const ctlab_grid* g) { return g ? g->grid.spacing() : 0.0; }

ctlab_status ctlab_field_create(const ctlab_grid* g, const double* values, size_t count, ctlab_field** out) {
  return guarded([&] {
    need(g, "grid");
    need(values, "values");
    need(out, "out");
    require(count == 2 * g->grid.size(), ErrorCode::invalid_parameter, "values must hold 2 * grid size doubles");
    ScalarField f(g->grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(values[2 * i], values[2 * i + 1]);
    *out = new ctlab_field{std::move(f)};
  });
}

ctlab_status ctlab_field_gaussian(const ctlab_grid* g, const double center[3], double width,
                                  const double momentum[3], ctlab_field** out) {
  return guarded([&] {
    need(g, "grid");
    need(center, "center");
    need(momentum, "momentum");
    need(out, "out");
    *out = new ctlab_field{gaussian_packet(g->grid, vec(center), width, vec(momentum))};
  });
}

void ctlab_field_destroy(ctlab_field* f) { delete f; }

ctlab_status ctlab_field_values(const ctlab_field* f, double* values, size_t count) {
  return guarded([&] {
    need(f, "field");
    need(values, "values");
    require(count == 2 * f->field.size(), ErrorCode::invalid_parameter, "values must hold 2 * grid size doubles");
    for (std::size_t i = 0; i < f->field.size(); ++i) {
      values[2 * i] = f->field[i].real();
      values[2 * i + 1] = f->field[i].imag();
    }
  });
}

ctlab_status ctlab_field_lp_norm(const ctlab_field* f, double p, double* out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = lp_norm(f->field, p);
  });
}

ctlab_status ctlab_propagate(const ctlab_potential* potentials, size_t count, const ctlab_field* initial, double s,
                             double t, double dt, ctlab_field** out) {
  return guarded([&] {
    need(initial, "initial");
    need(out, "out");
    if (count > 0) need(potentials, "potentials");
    ScalarHamiltonian h;
    for (size_t i = 0; i < count; ++i) h.potentials.push_back(convert(potentials[i]));
    StepperConfig cfg;
    cfg.dt = dt;
    cfg.keep_fields = false;
    cfg.boundary_mass_guard = 1.0;
    cfg.validate();
    *out = new ctlab_field{propagate(h, initial->field, s, t, cfg).final_state};
  });
}

ctlab_status ctlab_bound_states_compute(const ctlab_potential* potential, const ctlab_grid* g, int k_max,
                                        double tolerance, ctlab_bound_states** out) {
  return guarded([&] {
    need(potential, "potential");
    need(g, "grid");
    need(out, "out");
    const MovingPotential mp = convert(*potential);
    *out = new ctlab_bound_states{bound_states(mp.spec, g->grid, k_max, tolerance)};
  });
}

void ctlab_bound_states_destroy(ctlab_bound_states* b) { delete b; }
size_t ctlab_bound_states_count(const ctlab_bound_states* b) { return b ? b->set.size() : 0; }

ctlab_status ctlab_bound_states_eigenvalue(const ctlab_bound_states* b, size_t index, double* out) {
  return guarded([&] {
    need(b, "bound states");
    need(out, "out");
    require(index < b->set.size(), ErrorCode::invalid_parameter, "bound-state index out of range");
    *out = b->set.eigenvalues[index];
  });
}

ctlab_status ctlab_bound_states_eigenfunction(const ctlab_bound_states* b, size_t index, ctlab_field** out) {
  return guarded([&] {
    need(b, "bound states");
    need(out, "out");
    require(index < b->set.size(), ErrorCode::invalid_parameter, "bound-state index out of range");
    *out = new ctlab_field{b->set.eigenfunctions[index]};
  });
}

ctlab_status ctlab_config_parse(const char* text, ctlab_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new ctlab_config{parse_config(text)};
  });
}

ctlab_status ctlab_config_load(const char* path, ctlab_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new ctlab_config{load_config(path)};
  });
}

void ctlab_config_destroy(ctlab_config* c) { delete c; }
size_t ctlab_config_count(const ctlab_config* c) { return c ? c->scenarios.size() : 0; }

ctlab_status ctlab_config_name(const ctlab_config* c, size_t index, const char** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    require(index < c->scenarios.size(), ErrorCode::invalid_parameter, "scenario index out of range");
    *out = c->scenarios[index].name.c_str();
  });
}

ctlab_status ctlab_config_apply_preset(ctlab_config* c, const char* preset) {
  return guarded([&] {
    need(c, "config");
    need(preset, "preset");
    for (auto& s : c->scenarios) apply_preset(s, preset);
  });
}

ctlab_status ctlab_config_set_seed(ctlab_config* c, uint64_t seed) {
  return guarded([&] {
    need(c, "config");
    for (auto& s : c->scenarios) override_seed(s, seed);
  });
}

ctlab_status ctlab_run(const ctlab_config* c, size_t index, ctlab_report** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    require(index < c->scenarios.size(), ErrorCode::invalid_parameter, "scenario index out of range");
    *out = new ctlab_report{run_scenario(c->scenarios[index]), {}, {}};
  });
}

void ctlab_report_destroy(ctlab_report* r) { delete r; }
int ctlab_report_valid(const ctlab_report* r) { return r && r->report.valid ? 1 : 0; }
size_t ctlab_report_row_count(const ctlab_report* r) { return r ? r->report.rows.size() : 0; }

ctlab_status ctlab_report_row(const ctlab_report* r, size_t index, const char** estimator, double* value) {
  return guarded([&] {
    need(r, "report");
    require(index < r->report.rows.size(), ErrorCode::invalid_parameter, "row index out of range");
    if (estimator) *estimator = r->report.rows[index].estimator.c_str();
    if (value) *value = r->report.rows[index].value;
  });
}

ctlab_status ctlab_report_find(const ctlab_report* r, const char* estimator, double* value) {
  return guarded([&] {
    need(r, "report");
    need(estimator, "estimator");
    need(value, "value");
    const ResultRow* row = r->report.find(estimator);
    require(row != nullptr, ErrorCode::invalid_parameter, std::string("no row for estimator '") + estimator + "'");
    *value = row->value;
  });
}

size_t ctlab_report_error_count(const ctlab_report* r) { return r ? r->report.errors.size() : 0; }

size_t ctlab_report_failed_assertions(const ctlab_report* r) {
  if (!r) return 0;
  size_t n = 0;
  for (const auto& a : r->report.assertions) n += a.pass ? 0 : 1;
  return n;
}

ctlab_status ctlab_report_json(const ctlab_report* r, const char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    if (r->json.empty()) r->json = report_json(r->report).dump(2);
    *out = r->json.c_str();
  });
}

ctlab_status ctlab_report_csv(const ctlab_report* r, const char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    if (r->csv.empty()) r->csv = report_csv(r->report);
    *out = r->csv.c_str();
  });
}

ctlab_status ctlab_report_emit(const ctlab_report* r, const char* directory, const char* formats) {
  return guarded([&] {
    need(r, "report");
    need(directory, "directory");
    emit_report(r->report, directory, ReportFormats::parse(formats ? formats : "json,csv,svg"));
  });
}

}  // extern "C"

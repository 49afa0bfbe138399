#include "ctlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ctlab/error.hpp"

namespace ctlab {

namespace {

[[noreturn]] void invalid(const std::string& message) { fail(ErrorCode::validation, message); }

// Reads keys of one JSON object, records every resolved value (defaults
// included) and rejects keys nobody asked for.
class Section {
 public:
  Section(const Json& in, std::string path, Json& out) : in_(in), path_(std::move(path)), out_(out) {
    if (!in_.is_object()) invalid(path_ + " must be an object");
    out_ = Json::object();
  }

  bool has(const std::string& key) const { return in_.contains(key); }
  std::string where(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    double v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_number()) invalid(where(key) + " must be a number");
      v = j->get<double>();
    }
    if (!std::isfinite(v)) invalid(where(key) + " must be finite");
    out_[key] = v;
    return v;
  }

  double required_number(const std::string& key) {
    if (!has(key)) invalid("missing required key '" + where(key) + "'");
    return number(key, 0.0);
  }

  long long integer(const std::string& key, long long fallback) {
    long long v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_number_integer()) invalid(where(key) + " must be an integer");
      v = j->get<long long>();
    }
    out_[key] = v;
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    std::uint64_t v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_number_unsigned()) invalid(where(key) + " must be a nonnegative integer");
      v = j->get<std::uint64_t>();
    }
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    bool v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_boolean()) invalid(where(key) + " must be true or false");
      v = j->get<bool>();
    }
    out_[key] = v;
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed = {}) {
    std::string v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_string()) invalid(where(key) + " must be a string");
      v = j->get<std::string>();
    }
    if (!allowed.empty()) {
      bool ok = false;
      std::string list;
      for (const auto& a : allowed) {
        ok = ok || a == v;
        list += (list.empty() ? "" : ", ") + a;
      }
      if (!ok) invalid(where(key) + " must be one of: " + list + " (got '" + v + "')");
    }
    out_[key] = v;
    return v;
  }

  Vec3 vec(const std::string& key, const Vec3& fallback, int dim) {
    Vec3 v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_array() || j->size() != static_cast<std::size_t>(dim))
        invalid(where(key) + " must be an array of " + std::to_string(dim) + " numbers");
      v = {0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a) {
        if (!(*j)[a].is_number()) invalid(where(key) + " must contain numbers");
        v[a] = (*j)[a].get<double>();
        if (!std::isfinite(v[a])) invalid(where(key) + " must be finite");
      }
    }
    Json arr = Json::array();
    for (int a = 0; a < dim; ++a) arr.push_back(v[a]);
    out_[key] = arr;
    return v;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> v = fallback;
    if (const Json* j = take(key)) {
      if (!j->is_array()) invalid(where(key) + " must be an array of numbers");
      v.clear();
      for (const auto& x : *j) {
        if (!x.is_number()) invalid(where(key) + " must contain numbers");
        v.push_back(x.get<double>());
      }
    }
    out_[key] = v;
    return v;
  }

  // Raw access for nested structures; the caller resolves into out(key).
  const Json* child(const std::string& key) { return take(key); }
  Json& out(const std::string& key) { return out_[key]; }

  void done() const {
    for (const auto& item : in_.items())
      if (!seen_.count(item.key())) invalid("unknown key '" + where(item.key()) + "'");
  }

 private:
  const Json* take(const std::string& key) {
    seen_.insert(key);
    return in_.contains(key) ? &in_.at(key) : nullptr;
  }

  const Json& in_;
  std::string path_;
  Json& out_;
  std::set<std::string> seen_;
};

Rational parse_rational(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    invalid(where + " must be a [numerator, denominator] pair of integers");
  if (j[1].get<long long>() == 0) invalid(where + " has a zero denominator");
  return Rational::make(j[0].get<long long>(), j[1].get<long long>());
}

Json rational_json(const Rational& r) { return Json::array({r.num, r.den}); }

PotentialSpec parse_profile(Section& sec, int dim) {
  PotentialSpec p;
  const std::string fam = sec.text("family", "gaussian", {"gaussian", "sech_squared"});
  p.family = fam == "gaussian" ? PotentialFamily::gaussian : PotentialFamily::sech_squared;
  p.amplitude = sec.required_number("amplitude");
  p.width = sec.number("width", 1.0);
  p.center = sec.vec("center", {0.0, 0.0, 0.0}, dim);
  if (!(p.width > 0.0)) invalid(sec.where("width") + " must be positive");
  return p;
}

MovingPotential parse_potential(const Json& j, const std::string& path, Json& out, int dim) {
  Section sec(j, path, out);
  MovingPotential mp;
  mp.spec = parse_profile(sec, dim);
  mp.velocity = sec.vec("velocity", {0.0, 0.0, 0.0}, dim);
  mp.offset = sec.vec("offset", {0.0, 0.0, 0.0}, dim);
  sec.done();
  return mp;
}

MatrixPotentialSpec parse_matrix_potential(const Json& j, const std::string& path, Json& out, int dim) {
  Section sec(j, path, out);
  MatrixPotentialSpec ms;
  for (const char* key : {"u", "w"}) {
    const Json* c = sec.child(key);
    if (!c) invalid("missing required key '" + sec.where(key) + "'");
    Section p(*c, sec.where(key), sec.out(key));
    (std::string(key) == "u" ? ms.u_profile : ms.w_profile) = parse_profile(p, dim);
    p.done();
  }
  ms.alpha = sec.number("alpha", 1.0);
  ms.gamma = sec.number("gamma", 0.0);
  ms.velocity = sec.vec("velocity", {0.0, 0.0, 0.0}, dim);
  sec.done();
  return ms;
}

DatumRecipe parse_datum(const Json& j, const std::string& path, Json& out, int dim, bool matrix) {
  Section sec(j, path, out);
  DatumRecipe d;
  const std::string recipe =
      sec.text("recipe", "gaussian", {"gaussian", "random_band_limited", "bound_state_mixture", "zero"});
  if (recipe == "gaussian") {
    d.kind = DatumRecipe::Kind::gaussian;
    d.center = sec.vec("center", d.center, dim);
    d.width = sec.number("width", d.width);
    d.momentum = sec.vec("momentum", d.momentum, dim);
    if (!(d.width > 0.0)) invalid(sec.where("width") + " must be positive");
  } else if (recipe == "random_band_limited") {
    d.kind = DatumRecipe::Kind::random_band_limited;
    d.center = sec.vec("center", d.center, dim);
    d.envelope = sec.number("envelope", d.envelope);
    d.band.pass = sec.number("band_pass", d.band.pass);
    d.band.stop = sec.number("band_stop", d.band.stop);
    d.seed_offset = sec.unsigned_integer("seed_offset", 0);
    d.count = static_cast<int>(sec.integer("count", 1));
    if (!(d.envelope > 0.0)) invalid(sec.where("envelope") + " must be positive");
    if (!(d.band.pass > 0.0 && d.band.pass < d.band.stop && d.band.stop <= 1.0))
      invalid(path + " needs 0 < band_pass < band_stop <= 1");
    if (d.count < 1 || d.count > 1000) invalid(sec.where("count") + " must be between 1 and 1000");
  } else if (recipe == "bound_state_mixture") {
    d.kind = DatumRecipe::Kind::bound_state_mixture;
    d.potential = static_cast<std::size_t>(sec.integer("potential", 0));
    const Json* c = sec.child("coefficients");
    if (!c || !c->is_array() || c->empty())
      invalid(sec.where("coefficients") + " must be a nonempty array of [re, im] pairs");
    Json resolved = Json::array();
    for (const auto& z : *c) {
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        invalid(sec.where("coefficients") + " entries must be [re, im] pairs");
      d.coefficients.emplace_back(z[0].get<double>(), z[1].get<double>());
      resolved.push_back(Json::array({z[0].get<double>(), z[1].get<double>()}));
    }
    sec.out("coefficients") = resolved;
  } else {
    d.kind = DatumRecipe::Kind::zero;
  }
  if (d.kind != DatumRecipe::Kind::zero) {
    const std::string norm = sec.text("normalization", "l2", {"none", "l2", "l1_cap_l2"});
    d.normalization = norm == "none" ? Normalization::none
                      : norm == "l2" ? Normalization::l2
                                     : Normalization::l1_cap_l2;
    d.dilation = sec.number("dilation", 1.0);
    d.boost = sec.vec("boost", d.boost, dim);
    d.scattering_projected = sec.boolean("scattering_projected", false);
    if (!(d.dilation > 0.0)) invalid(sec.where("dilation") + " must be positive");
    if (matrix) d.second_component = sec.number("second_component", 0.0);
  }
  sec.done();
  return d;
}

SourceRecipe parse_source(const Json& j, const std::string& path, Json& out, int dim) {
  Section sec(j, path, out);
  SourceRecipe src;
  src.center = sec.vec("center", src.center, dim);
  src.width = sec.number("width", src.width);
  src.time_center = sec.number("time_center", src.time_center);
  src.duration = sec.number("duration", src.duration);
  src.amplitude = sec.number("amplitude", src.amplitude);
  if (const Json* r = sec.child("dual_inverse_p")) src.dual_inverse_p = parse_rational(*r, sec.where("dual_inverse_p"));
  sec.out("dual_inverse_p") = rational_json(src.dual_inverse_p);
  if (!(src.width > 0.0) || !(src.duration > 0.0)) invalid(path + " width and duration must be positive");
  sec.done();
  return src;
}

const std::set<std::string>& scalar_kinds() {
  static const std::set<std::string> k{"bound_states", "norm_drift",  "strichartz",      "inhomogeneous_strichartz",
                                       "decay",        "local_decay", "kato_jensen",     "ac_residual",
                                       "intertwining", "channel_overlap", "oracle_compare"};
  return k;
}

const std::set<std::string>& matrix_kinds() {
  static const std::set<std::string> k{"admissibility", "stability",  "kernel_growth", "frame_reduction",
                                       "charge_drift",  "norm_drift", "kato_jensen",   "oracle_compare"};
  return k;
}

// The full line from (inf, 2) to the endpoint, three pairs.
std::vector<Json> default_inverse_p(int dim) {
  std::vector<Json> out;
  for (const auto& pair : admissible_pairs(dim, 3)) out.push_back(Json::array({pair.inv_p.num, pair.inv_p.den}));
  return out;
}

EstimatorRequest parse_estimator(const Json& j, const std::string& path, Json& out, const Scenario& s) {
  Section sec(j, path, out);
  EstimatorRequest req;
  const auto& kinds = s.matrix ? matrix_kinds() : scalar_kinds();
  std::vector<std::string> allowed(kinds.begin(), kinds.end());
  req.kind = sec.text("kind", "", allowed);
  Json params = Json::object();
  Section p(j, path, params);  // second reader over the same object for the parameters
  p.text("kind", "");
  if (const Json* e = sec.child("expect")) {
    Section ex(*e, sec.where("expect"), sec.out("expect"));
    if (ex.has("min")) req.expect_min = ex.number("min", 0.0);
    if (ex.has("max")) req.expect_max = ex.number("max", 0.0);
    ex.done();
  }
  p.child("expect");
  const double half_dim = 0.5 * s.dim;
  const auto& k = req.kind;
  if (k == "strichartz" || k == "inhomogeneous_strichartz") {
    const Json* r = p.child("inverse_p");
    Json resolved = Json::array();
    std::vector<Json> list = default_inverse_p(s.dim);
    if (r) {
      if (!r->is_array() || r->empty()) invalid(p.where("inverse_p") + " must be a nonempty array of pairs");
      list.assign(r->begin(), r->end());
    }
    for (const auto& x : list) {
      const Rational inv = parse_rational(x, p.where("inverse_p"));
      try {
        AdmissiblePair::from_inverse(inv, s.dim);
      } catch (const Error& e) {
        invalid(p.where("inverse_p") + ": " + e.what());
      }
      resolved.push_back(rational_json(inv));
    }
    params["inverse_p"] = resolved;
    if (k == "strichartz") p.boolean("projected", false);
    if (k == "inhomogeneous_strichartz" && !s.source) invalid(path + " needs a source section");
  } else if (k == "decay") {
    const std::string norm = p.text("norm", "l2_plus_linf", {"l2_plus_linf", "linf", "lq"});
    if (norm == "lq") {
      const double q = p.required_number("q");
      if (!(q >= 1.0)) invalid(p.where("q") + " must be >= 1");
    }
    const double t_min = p.number("t_min", s.start + std::min(5.0, 0.5 * (s.end - s.start)));
    const double t_max = p.number("t_max", s.end);
    if (!(t_min < t_max) || t_min <= 0.0) invalid(path + " needs 0 < t_min < t_max");
    if (t_max > s.end || t_min < s.start) invalid(path + " fit window must lie inside the run window");
  } else if (k == "local_decay" || k == "kato_jensen") {
    const double sigma = p.number("sigma", 2.0);
    if (!(sigma > half_dim))
      invalid(p.where("sigma") + " must exceed n/2 = " + std::to_string(half_dim) + " for the weighted estimates");
    p.text("center_path", "fixed", {"fixed", "moving_e1"});
    if (k == "kato_jensen") {
      const double t0 = p.number("t0", s.start);
      std::vector<double> fallback;
      const double span = s.end - t0;
      for (int i = 0; i < 8; ++i) fallback.push_back(t0 + span * std::pow(0.2, (7 - i) / 7.0));
      const std::vector<double> tl = p.numbers("t_list", fallback);
      if (tl.size() < 8) invalid(p.where("t_list") + " needs at least 8 times for the decay fit");
      for (std::size_t i = 0; i < tl.size(); ++i) {
        if (!(tl[i] > t0)) invalid(p.where("t_list") + " times must exceed t0");
        if (i > 0 && !(tl[i] > tl[i - 1])) invalid(p.where("t_list") + " must be increasing");
      }
      const long long it = p.integer("iterations", 10);
      if (it < 1) invalid(p.where("iterations") + " must be positive");
      if (s.matrix) {
        const long long pr = p.integer("probes", 4);
        if (pr < 1) invalid(p.where("probes") + " must be positive");
      }
    }
  } else if (k == "intertwining") {
    const long long n = p.integer("samples", 10);
    if (n < 1) invalid(p.where("samples") + " must be positive");
    const Json* t = p.child("times");
    Json resolved = Json::array();
    if (t) {
      if (!t->is_array() || t->empty()) invalid(p.where("times") + " must be a nonempty array of [s, t] pairs");
      for (const auto& st : *t) {
        if (!st.is_array() || st.size() != 2 || !st[0].is_number() || !st[1].is_number())
          invalid(p.where("times") + " entries must be [s, t] pairs");
        const double a = st[0].get<double>(), b = st[1].get<double>();
        if (!(a <= b) || b > s.wave_operator.horizon)
          invalid(p.where("times") + " needs s <= t <= the wave-operator horizon");
        resolved.push_back(Json::array({a, b}));
      }
    } else {
      resolved.push_back(Json::array({s.start, s.end}));
    }
    params["times"] = resolved;
  } else if (k == "stability" || k == "kernel_growth") {
    const double horizon = p.number("horizon", 100.0);
    if (!(horizon > 0.0)) invalid(p.where("horizon") + " must be positive");
    p.number("dt", 0.05);
    if (k == "stability") {
      const long long pr = p.integer("probes", 4);
      if (pr < 1) invalid(p.where("probes") + " must be positive");
    }
  } else if (k == "oracle_compare") {
    const double dto = p.number("dt_oracle", 1e-3);
    if (!(dto > 0.0)) invalid(p.where("dt_oracle") + " must be positive");
    p.text("kinetic", "fourier_collocation", {"fourier_collocation", "finite_difference"});
  }
  // The parameter reader saw every key it resolved; the main reader must not
  // flag them again.
  for (const auto& item : j.items()) {
    if (params.contains(item.key()) || item.key() == "kind" || item.key() == "expect") sec.child(item.key());
  }
  sec.done();
  params.erase("kind");
  for (const auto& item : params.items()) out[item.key()] = item.value();
  req.params = params;
  return req;
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  Scenario s;
  Json out;
  Section sec(j, "scenario", out);
  s.name = sec.text("name", "scenario");
  if (s.name.empty() || s.name.find_first_of("/\\\"\n") != std::string::npos)
    invalid("scenario.name must be a nonempty file-name-safe string");
  s.matrix = sec.text("kind", "scalar", {"scalar", "matrix"}) == "matrix";
  s.seed = sec.unsigned_integer("seed", 1);

  const Json* g = sec.child("grid");
  if (!g) invalid("missing required section 'scenario.grid'");
  {
    Section gs(*g, "scenario.grid", sec.out("grid"));
    s.dim = static_cast<int>(gs.integer("dim", 3));
    s.points = static_cast<int>(gs.integer("points", 32));
    s.half_length = gs.number("half_length", 20.0);
    gs.done();
    if (s.dim < 1 || s.dim > 3) invalid("scenario.grid.dim must be 1, 2 or 3");
    try {
      (void)s.grid();
    } catch (const Error& e) {
      invalid(std::string("scenario.grid: ") + e.what());
    }
  }

  if (const Json* ps = sec.child(s.matrix ? "matrix_potentials" : "potentials")) {
    const std::string key = s.matrix ? "matrix_potentials" : "potentials";
    if (!ps->is_array()) invalid("scenario." + key + " must be an array");
    Json arr = Json::array();
    for (std::size_t i = 0; i < ps->size(); ++i) {
      Json o;
      const std::string path = "scenario." + key + "[" + std::to_string(i) + "]";
      if (s.matrix)
        s.matrix_potentials.push_back(parse_matrix_potential((*ps)[i], path, o, s.dim));
      else
        s.potentials.push_back(parse_potential((*ps)[i], path, o, s.dim));
      arr.push_back(o);
    }
    sec.out(key) = arr;
  } else {
    sec.out(s.matrix ? "matrix_potentials" : "potentials") = Json::array();
  }
  if (!s.matrix && s.potentials.size() > 2) invalid("scenario.potentials: at most two potentials are supported");
  if (s.matrix && s.matrix_potentials.empty()) invalid("scenario.matrix_potentials must not be empty");

  const Json* datum = sec.child("datum");
  const Json* data = sec.child("data");
  if (datum && data) invalid("scenario: give either 'datum' or 'data', not both");
  Json data_out = Json::array();
  if (datum) {
    Json o;
    s.data.push_back(parse_datum(*datum, "scenario.datum", o, s.dim, s.matrix));
    data_out.push_back(o);
  } else if (data) {
    if (!data->is_array() || data->empty()) invalid("scenario.data must be a nonempty array");
    for (std::size_t i = 0; i < data->size(); ++i) {
      Json o;
      s.data.push_back(parse_datum((*data)[i], "scenario.data[" + std::to_string(i) + "]", o, s.dim, s.matrix));
      data_out.push_back(o);
    }
  } else {
    Json o;
    s.data.push_back(parse_datum(Json::object(), "scenario.datum", o, s.dim, s.matrix));
    data_out.push_back(o);
  }
  sec.out("data") = data_out;
  for (const auto& d : s.data) {
    if (d.kind == DatumRecipe::Kind::bound_state_mixture && d.potential >= s.potentials.size())
      invalid("scenario.data: bound_state_mixture refers to a missing potential");
    if (s.matrix && d.kind == DatumRecipe::Kind::bound_state_mixture)
      invalid("scenario.data: bound_state_mixture is a scalar recipe");
    if (s.matrix && d.scattering_projected)
      invalid("scenario.data: scattering_projected is a scalar recipe");
  }

  if (const Json* src = sec.child("source")) {
    if (s.matrix) invalid("scenario.source: sources are supported for scalar runs only");
    s.source = parse_source(*src, "scenario.source", sec.out("source"), s.dim);
  }

  {
    const Json* w = sec.child("window");
    const Json empty = Json::object();
    Section ws(w ? *w : empty, "scenario.window", sec.out("window"));
    s.start = ws.number("start", 0.0);
    s.end = ws.number("end", 10.0);
    ws.done();
    if (!(s.end > s.start)) invalid("scenario.window needs end > start");
  }
  {
    const Json* st = sec.child("stepper");
    const Json empty = Json::object();
    Section ss(st ? *st : empty, "scenario.stepper", sec.out("stepper"));
    s.stepper.dt = ss.number("dt", 0.1);
    s.stepper.snapshot_every = static_cast<int>(ss.integer("snapshot_every", 5));
    s.stepper.boundary_mass_guard = ss.number("boundary_mass_guard", 1e-6);
    s.stepper.growth.constant = ss.number("growth_constant", 10.0);
    s.stepper.growth.power = ss.number("growth_power", 1.0);
    ss.done();
    try {
      s.stepper.validate();
    } catch (const Error& e) {
      invalid(std::string("scenario.stepper: ") + e.what());
    }
    s.stepper.keep_fields = false;
  }
  {
    const Json* wo = sec.child("wave_operator");
    const Json empty = Json::object();
    Section ws(wo ? *wo : empty, "scenario.wave_operator", sec.out("wave_operator"));
    s.wave_operator.horizon = ws.number("horizon", std::max(40.0, s.end));
    s.wave_operator.tail_tolerance = ws.number("tail_tolerance", 1e-3);
    ws.done();
    s.wave_operator.stepper = s.stepper;
    s.wave_operator.stepper.boundary_mass_guard = 1.0;  // channel states ride the wells, wrap-around is harmless
    if (!(s.wave_operator.horizon > 0.0 && s.wave_operator.tail_tolerance > 0.0))
      invalid("scenario.wave_operator needs positive horizon and tail_tolerance");
  }
  {
    const Json* sp = sec.child("spectrum");
    const Json empty = Json::object();
    Section ss(sp ? *sp : empty, "scenario.spectrum", sec.out("spectrum"));
    s.k_max = static_cast<int>(ss.integer("k_max", 8));
    s.bound_tolerance = ss.number("tolerance", 1e-8);
    ss.done();
    if (s.k_max < 1 || !(s.bound_tolerance > 0.0)) invalid("scenario.spectrum needs k_max >= 1 and tolerance > 0");
  }

  Json est_out = Json::array();
  if (const Json* es = sec.child("estimators")) {
    if (!es->is_array()) invalid("scenario.estimators must be an array");
    for (std::size_t i = 0; i < es->size(); ++i) {
      Json o;
      s.estimators.push_back(parse_estimator((*es)[i], "scenario.estimators[" + std::to_string(i) + "]", o, s));
      est_out.push_back(o);
    }
  }
  sec.out("estimators") = est_out;
  sec.done();
  s.resolved = out;
  return s;
}

std::vector<Scenario> parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<Scenario> out;
  if (j.is_object() && j.contains("scenarios")) {
    if (j.size() != 1) {
      for (const auto& item : j.items())
        if (item.key() != "scenarios") invalid("unknown key '" + item.key() + "' next to 'scenarios'");
    }
    const Json& arr = j.at("scenarios");
    if (!arr.is_array() || arr.empty()) invalid("'scenarios' must be a nonempty array");
    std::set<std::string> names;
    for (const auto& sj : arr) {
      out.push_back(parse_scenario(sj));
      if (!names.insert(out.back().name).second) invalid("duplicate scenario name '" + out.back().name + "'");
    }
  } else {
    out.push_back(parse_scenario(j));
  }
  return out;
}

std::vector<Scenario> load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> preset_estimators(const std::string& preset, bool matrix) {
  if (matrix) {
    if (preset == "propagate") return {"norm_drift", "charge_drift"};
    if (preset == "matrix-diagnose") return {"admissibility", "stability", "kernel_growth"};
    if (preset == "oracle-compare") return {"oracle_compare"};
    if (preset == "verify-decay") return {"kato_jensen"};
    invalid("preset '" + preset + "' does not apply to matrix scenarios");
  }
  if (preset == "bound-states") return {"bound_states"};
  if (preset == "propagate") return {"norm_drift"};
  if (preset == "verify-decay") return {"decay", "local_decay"};
  if (preset == "verify-strichartz") return {"strichartz"};
  if (preset == "verify-ac") return {"channel_overlap", "ac_residual", "intertwining"};
  if (preset == "oracle-compare") return {"oracle_compare"};
  if (preset == "matrix-diagnose") invalid("preset 'matrix-diagnose' needs a matrix scenario");
  invalid("unknown preset '" + preset + "'");
}

void apply_preset(Scenario& s, const std::string& preset) {
  static const std::set<std::string> known{"bound-states",      "propagate",       "verify-decay",  "verify-strichartz",
                                           "verify-ac",         "matrix-diagnose", "oracle-compare"};
  if (!known.count(preset)) invalid("unknown preset '" + preset + "'");
  if (!s.estimators.empty()) return;
  const auto kinds = preset_estimators(preset, s.matrix);
  Json j = s.resolved;
  j["estimators"] = Json::array();
  for (const auto& k : kinds) j["estimators"].push_back(Json{{"kind", k}});
  s = parse_scenario(j);
}

void override_seed(Scenario& s, std::uint64_t seed) {
  s.seed = seed;
  s.resolved["seed"] = seed;
}

const ResultRow* RunReport::find(const std::string& estimator) const noexcept {
  for (const auto& r : rows)
    if (r.estimator == estimator) return &r;
  return nullptr;
}

std::vector<const ResultRow*> RunReport::find_all(const std::string& estimator) const {
  std::vector<const ResultRow*> out;
  for (const auto& r : rows)
    if (r.estimator == estimator) out.push_back(&r);
  return out;
}

}  // namespace ctlab

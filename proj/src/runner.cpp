#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "ctlab/error.hpp"
#include "ctlab/oracle.hpp"
#include "ctlab/scenario.hpp"
#include "ctlab/symmetries.hpp"

namespace ctlab {

namespace {

Json series_json(const MixedNormSeries& s) { return Json{{"t", s.times}, {"value", s.values}}; }

MixedNormSeries truncate(const MixedNormSeries& s, double t_max) {
  MixedNormSeries out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.times[i] > t_max + 1e-9) break;
    out.times.push_back(s.times[i]);
    out.values.push_back(s.values[i]);
  }
  return out;
}

double relative_change(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

WeightProfile weight_of(const Json& params) {
  WeightProfile w;
  w.sigma = params.at("sigma").get<double>();
  w.center_path = params.at("center_path").get<std::string>() == "moving_e1" ? CenterPath::moving_e1 : CenterPath::fixed;
  return w;
}

std::vector<AdmissiblePair> pairs_of(const Json& params, int dim) {
  std::vector<AdmissiblePair> out;
  for (const auto& r : params.at("inverse_p"))
    out.push_back(AdmissiblePair::from_inverse(Rational::make(r[0].get<long long>(), r[1].get<long long>()), dim));
  return out;
}

Json pair_json(const AdmissiblePair& a) {
  return Json{{"p", std::isinf(a.p()) ? Json("inf") : Json(a.p())},
              {"q", std::isinf(a.q()) ? Json("inf") : Json(a.q())},
              {"inverse_p", Json::array({a.inv_p.num, a.inv_p.den})}};
}

double loglog_slope(const MixedNormSeries& s, double t_from) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.times[i] < t_from || s.values[i] <= 0.0) continue;
    x.push_back(s.times[i]);
    y.push_back(std::log(s.values[i]));
  }
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

// Series collected during the main propagation, per datum.
struct DatumSeries {
  std::map<double, MixedNormSeries> lq;            // keyed by q (raw)
  std::map<double, MixedNormSeries> lq_projected;  // keyed by q, P_c(t) psi(t)
  std::map<std::string, MixedNormSeries> decay;    // keyed by norm label
  std::map<std::string, MixedNormSeries> weighted; // keyed by weight label
  MixedNormSeries ac;
  double initial_l2 = 0.0;
  double max_boundary_mass = 0.0;
  double max_norm_drift = 0.0;
};

std::string weight_label(const WeightProfile& w) {
  return std::to_string(w.sigma) + (w.center_path == CenterPath::moving_e1 ? "/e1" : "/0");
}

class ScalarRun {
 public:
  ScalarRun(const Scenario& s, RunReport& r) : s_(s), r_(r), grid_(s.grid()) {
    h_.potentials = s.potentials;
    for (auto& p : h_.potentials) p.validate();
  }

  void run() {
    plan();
    if (needs_bound_) solve_bound_states();
    if (!anchors_.empty() && !h_.is_free()) build_bases();
    build_data();
    if (needs_main_) main_propagation();
    for (const auto& req : s_.estimators) {
      try {
        estimator(req);
      } catch (const HorizonTooSmall&) {
        throw;
      } catch (const SolverFailure&) {
        throw;
      } catch (const Error& e) {
        r_.errors.push_back({req.kind, e.what()});
      }
    }
    r_.diagnostics["boundary_mass_max"] = max_boundary_;
    r_.diagnostics["norm_drift_max"] = max_drift_;
    r_.diagnostics["flags"] = flags_;
    r_.diagnostics["wave_operator_tails"] = tails_;
  }

 private:
  bool has(const std::string& kind) const {
    for (const auto& e : s_.estimators)
      if (e.kind == kind) return true;
    return false;
  }

  void plan() {
    static const std::set<std::string> main_kinds{"norm_drift", "strichartz", "inhomogeneous_strichartz",
                                                  "decay",      "local_decay", "ac_residual"};
    static const std::set<std::string> channel_kinds{"kato_jensen", "intertwining", "channel_overlap",
                                                     "inhomogeneous_strichartz"};
    for (const auto& e : s_.estimators) {
      needs_main_ = needs_main_ || main_kinds.count(e.kind);
      if (e.kind == "bound_states" || e.kind == "ac_residual" || channel_kinds.count(e.kind)) needs_bound_ = true;
      if (e.kind == "strichartz" && e.params.at("projected").get<bool>()) {
        needs_bound_ = true;
        coevolve_ = true;
        anchors_.insert(s_.start);
      }
      if (e.kind == "inhomogeneous_strichartz") {
        coevolve_ = true;
        anchors_.insert(s_.start);
      }
      if (e.kind == "kato_jensen") anchors_.insert(e.params.at("t0").get<double>());
      if (e.kind == "intertwining") {
        for (const auto& st : e.params.at("times")) {
          anchors_.insert(st[0].get<double>());
        }
      }
      if (e.kind == "channel_overlap") anchors_.insert(s_.start);
    }
    for (const auto& d : s_.data) {
      if (d.scattering_projected) {
        needs_bound_ = true;
        anchors_.insert(s_.start);
      }
      if (d.kind == DatumRecipe::Kind::bound_state_mixture) needs_bound_ = true;
    }
    if (h_.is_free()) coevolve_ = false;
  }

  void solve_bound_states() {
    for (const auto& p : h_.potentials) {
      if (p.spec.vanishes()) {
        bound_.emplace_back();
        continue;
      }
      BoundStateSet bs = bound_states(p.spec, grid_, s_.k_max, s_.bound_tolerance);
      if (!bs.near_threshold.empty())
        fail(ErrorCode::validation, "a localized eigenvalue (" + std::to_string(bs.near_threshold.front()) +
                                        ") lies within the threshold guard; change the well or the grid");
      bound_.push_back(std::move(bs));
    }
    r_.diagnostics["bound_state_counts"] = Json::array();
    for (const auto& b : bound_) r_.diagnostics["bound_state_counts"].push_back(b.size());
  }

  bool has_bound_states() const {
    for (const auto& b : bound_)
      if (!b.empty()) return true;
    return false;
  }

  void build_bases() {
    if (!has_bound_states()) return;
    std::vector<double> anchors(anchors_.begin(), anchors_.end());
    auto bases = channel_bases(anchors, h_, bound_, s_.wave_operator);
    for (std::size_t i = 0; i < anchors.size(); ++i) bases_.emplace(anchors[i], std::move(bases[i]));
    const ChannelBasis& any = bases_.begin()->second;
    tails_ = any.tails;
    for (const auto& f : any.flags) flag(f);
  }

  const ChannelBasis* basis_at(double t) const {
    auto it = bases_.find(t);
    return it == bases_.end() ? nullptr : &it->second;
  }

  ScalarField apply_pc(const ScalarField& f, double t) const {
    const ChannelBasis* b = basis_at(t);
    return b ? project_scattering(f, *b) : f;
  }

  void flag(const std::string& f) {
    if (std::find(flags_.begin(), flags_.end(), f) == flags_.end()) flags_.push_back(f);
    r_.valid = false;
  }

  void build_data() {
    std::uint64_t index = 0;
    for (const auto& d : s_.data) {
      for (int c = 0; c < d.count; ++c, ++index) {
        ScalarField f(grid_);
        switch (d.kind) {
          case DatumRecipe::Kind::gaussian:
            f = gaussian_packet(grid_, d.center, d.width, d.momentum, Normalization::none);
            break;
          case DatumRecipe::Kind::random_band_limited:
            f = random_band_limited(grid_, s_.seed + d.seed_offset + static_cast<std::uint64_t>(c), d.center,
                                    d.envelope, d.band, Normalization::none);
            break;
          case DatumRecipe::Kind::bound_state_mixture:
            require(d.coefficients.size() <= bound_[d.potential].size(), ErrorCode::validation,
                    "bound_state_mixture asks for more bound states than the well has");
            f = bound_state_mixture(bound_[d.potential], d.coefficients, Normalization::none);
            break;
          case DatumRecipe::Kind::zero:
            break;
        }
        if (d.kind != DatumRecipe::Kind::zero) {
          if (d.dilation != 1.0) f = dilate(f, d.dilation, d.center);
          if (norm2(d.boost) > 0.0) galilei_inverse_in_place(f, {d.boost, {0.0, 0.0, 0.0}, 0.0});
          if (d.scattering_projected) f = apply_pc(f, s_.start);
          normalize(f, d.normalization);
        }
        data_.push_back(std::move(f));
      }
    }
  }

  SourceTerm source_term() const {
    const SourceRecipe src = *s_.source;
    const ScalarField phi = gaussian_packet(grid_, src.center, src.width, {0.0, 0.0, 0.0}, Normalization::l2);
    SourceTerm st;
    st.evaluator = [phi, src](double t, const Grid&) {
      ScalarField f = phi;
      const double z = (t - src.time_center) / src.duration;
      f *= src.amplitude * std::exp(-0.5 * z * z);
      return f;
    };
    const AdmissiblePair dual = AdmissiblePair::from_inverse(src.dual_inverse_p, s_.dim);
    st.time_exponent = conjugate_exponent(dual.p());
    st.space_exponent = conjugate_exponent(dual.q());
    return st;
  }

  // ||F(t)||_{L^{q~'}_x} sampled at the step size on [start, t_max].
  MixedNormSeries source_dual_series(double t_max) const {
    const SourceTerm st = source_term();
    const SourceRecipe src = *s_.source;
    const ScalarField phi = gaussian_packet(grid_, src.center, src.width, {0.0, 0.0, 0.0}, Normalization::l2);
    const double space = lp_norm(phi, st.space_exponent);
    MixedNormSeries series;
    const double dt = s_.stepper.dt;
    const int n = static_cast<int>(std::ceil((t_max - s_.start) / dt - 1e-9));
    for (int i = 0; i <= n; ++i) {
      const double t = std::min(s_.start + i * dt, t_max);
      if (!series.times.empty() && t <= series.times.back()) break;
      const double z = (t - src.time_center) / src.duration;
      series.times.push_back(t);
      series.values.push_back(std::abs(src.amplitude) * std::exp(-0.5 * z * z) * space);
    }
    return series;
  }

  void main_propagation() {
    // Which series to collect.
    std::set<double> qs, qs_projected;
    std::map<std::string, std::pair<std::string, double>> decay_norms;
    std::map<std::string, WeightProfile> weights;
    bool ac = false;
    for (const auto& e : s_.estimators) {
      if (e.kind == "strichartz") {
        for (const auto& pr : pairs_of(e.params, s_.dim))
          (e.params.at("projected").get<bool>() && coevolve_ ? qs_projected : qs).insert(pr.q());
      } else if (e.kind == "inhomogeneous_strichartz") {
        for (const auto& pr : pairs_of(e.params, s_.dim)) (coevolve_ ? qs_projected : qs).insert(pr.q());
      } else if (e.kind == "decay") {
        const std::string norm = e.params.at("norm").get<std::string>();
        const double q = norm == "lq" ? e.params.at("q").get<double>() : 0.0;
        decay_norms[decay_label(e.params)] = {norm, q};
      } else if (e.kind == "local_decay") {
        const WeightProfile w = weight_of(e.params);
        weights[weight_label(w)] = w;
      } else if (e.kind == "ac_residual") {
        ac = true;
      }
    }

    const std::size_t n_data = data_.size();
    series_.assign(n_data, DatumSeries{});
    std::vector<ScalarField> batch = data_;
    std::size_t n_basis = 0;
    if (coevolve_) {
      if (const ChannelBasis* b = basis_at(s_.start)) {
        for (const auto& u : b->u_tilde) batch.push_back(u);
        for (const auto& w : b->w_tilde) batch.push_back(w);
        n_basis = b->u_tilde.size() + b->w_tilde.size();
      }
    }
    for (std::size_t i = 0; i < n_data; ++i) series_[i].initial_l2 = l2_norm(data_[i]);

    auto observer = [&](double t, std::span<const ScalarField> states) {
      for (std::size_t i = 0; i < n_data; ++i) {
        const ScalarField& f = states[i];
        DatumSeries& ds = series_[i];
        const double bm = boundary_mass(f);
        ds.max_boundary_mass = std::max(ds.max_boundary_mass, bm);
        ds.max_norm_drift = std::max(ds.max_norm_drift, std::abs(l2_norm(f) - ds.initial_l2));
        for (double q : qs) {
          ds.lq[q].times.push_back(t);
          ds.lq[q].values.push_back(lp_norm(f, q));
        }
        if (!qs_projected.empty()) {
          ScalarField pc = f;
          for (std::size_t j = 0; j < n_basis; ++j) {
            const ScalarField& b = states[n_data + j];
            pc.axpy(-inner(pc, b), b);
          }
          for (double q : qs_projected) {
            ds.lq_projected[q].times.push_back(t);
            ds.lq_projected[q].values.push_back(lp_norm(pc, q));
          }
        }
        for (const auto& [label, nq] : decay_norms) {
          double v = 0.0;
          if (nq.first == "linf")
            v = lp_norm(f, std::numeric_limits<double>::infinity());
          else if (nq.first == "lq")
            v = lp_norm(f, nq.second);
          else
            v = pair_norms(f).l2_plus_linf_upper;
          ds.decay[label].times.push_back(t);
          ds.decay[label].values.push_back(v);
        }
        for (const auto& [label, w] : weights) {
          ds.weighted[label].times.push_back(t);
          ds.weighted[label].values.push_back(l2_norm(weighted_multiply(f, w, t)));
        }
        if (ac) {
          double total = 0.0;
          for (double c : transported_bound_content(f, t, h_, bound_)) total += c;
          ds.ac.times.push_back(t);
          ds.ac.values.push_back(total);
        }
      }
    };

    std::optional<SourceTerm> src;
    if (s_.source) src = source_term();
    const PropagatorTrace tr =
        propagate_batch(h_, batch, s_.start, s_.end, s_.stepper, observer, src ? &*src : nullptr, nullptr);
    for (const auto& f : tr.flags) flag(f);
    for (const auto& ds : series_) {
      max_boundary_ = std::max(max_boundary_, ds.max_boundary_mass);
      max_drift_ = std::max(max_drift_, ds.initial_l2 > 0.0 ? ds.max_norm_drift / ds.initial_l2 : ds.max_norm_drift);
      if (ds.max_boundary_mass > s_.stepper.boundary_mass_guard) flag("boundary-mass");
    }
  }

  static std::string decay_label(const Json& params) {
    std::string norm = params.at("norm").get<std::string>();
    if (norm == "lq") norm += std::to_string(params.at("q").get<double>());
    return norm;
  }

  void row(const EstimatorRequest& req, Json params, double value, Json diag) {
    r_.rows.push_back({req.kind, std::move(params), value, std::move(diag)});
  }

  double half_time() const { return s_.start + 0.5 * (s_.end - s_.start); }

  void estimator(const EstimatorRequest& req) {
    const std::string& k = req.kind;
    if (k == "bound_states") {
      for (std::size_t p = 0; p < bound_.size(); ++p) {
        for (std::size_t j = 0; j < bound_[p].size(); ++j) {
          row(req, Json{{"potential", p}, {"index", j}}, bound_[p].eigenvalues[j],
              Json{{"residual", bound_[p].residuals[j]}, {"discarded_box_modes", bound_[p].discarded_delocalized}});
        }
      }
      if (!has_bound_states()) row(req, Json{{"count", 0}}, 0.0, Json{{"note", "no bound states"}});
    } else if (k == "norm_drift") {
      row(req, Json::object(), max_drift_, Json{{"boundary_mass_max", max_boundary_}, {"flags", flags_}});
    } else if (k == "strichartz") {
      strichartz(req);
    } else if (k == "inhomogeneous_strichartz") {
      inhomogeneous(req);
    } else if (k == "decay") {
      const std::string label = decay_label(req.params);
      const double t_min = req.params.at("t_min").get<double>();
      const double t_max = req.params.at("t_max").get<double>();
      for (std::size_t i = 0; i < series_.size(); ++i) {
        const MixedNormSeries& s = series_[i].decay.at(label);
        const DecayFit fit = decay_fit(s, t_min, t_max);
        Json params = req.params;
        params["datum"] = i;
        row(req, params, fit.exponent,
            Json{{"intercept", fit.intercept}, {"residual", fit.residual}, {"samples", fit.samples},
                 {"boundary_mass_max", series_[i].max_boundary_mass}});
        r_.plots.push_back({"decay " + label + " datum " + std::to_string(i), s, fit});
      }
    } else if (k == "local_decay") {
      const WeightProfile w = weight_of(req.params);
      std::vector<double> values, changes;
      for (std::size_t i = 0; i < series_.size(); ++i) {
        const MixedNormSeries& s = series_[i].weighted.at(weight_label(w));
        const double full = local_decay_norm(s, series_[i].initial_l2);
        const double half = local_decay_norm(truncate(s, half_time()), series_[i].initial_l2);
        Json params = req.params;
        params["datum"] = i;
        row(req, params, full, Json{{"half_window_value", half}, {"window_change", relative_change(half, full)}});
        if (series_[i].initial_l2 > 0.0) {
          values.push_back(full);
          changes.push_back(relative_change(half, full));
        }
      }
      spread_row(req, "local_decay_spread", values, changes);
    } else if (k == "kato_jensen") {
      kato_jensen(req);
    } else if (k == "ac_residual") {
      for (std::size_t i = 0; i < series_.size(); ++i) {
        const MixedNormSeries& s = series_[i].ac;
        Json params = Json{{"datum", i}};
        row(req, params, s.values.back(),
            Json{{"initial", s.values.front()},
                 {"max_second_half", *std::max_element(s.values.begin() + static_cast<long>(s.size() / 2), s.values.end())},
                 {"log_slope", loglog_slope(s, s_.start)}});
        r_.plots.push_back({"ac residual datum " + std::to_string(i), s, std::nullopt});
      }
    } else if (k == "intertwining") {
      intertwining(req);
    } else if (k == "channel_overlap") {
      const ChannelBasis* b = basis_at(s_.start);
      if (!b) {
        row(req, Json::object(), 0.0, Json{{"note", "no bound channels"}});
        return;
      }
      const double worst_tail = tails_.empty() ? 0.0 : *std::max_element(tails_.begin(), tails_.end());
      row(req, Json{{"anchor", s_.start}}, b->max_raw_overlap(),
          Json{{"gram_defect", b->gram_defect()}, {"channel_1", b->u_tilde.size()},
               {"channel_2", b->w_tilde.size()}, {"max_tail", worst_tail}});
    } else if (k == "oracle_compare") {
      oracle_compare(req);
    }
  }

  void spread_row(const EstimatorRequest& req, const std::string& name, const std::vector<double>& values,
                  const std::vector<double>& changes, Json params = Json::object()) {
    if (values.empty()) return;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    r_.rows.push_back({name, std::move(params), spread,
                       Json{{"min", *lo}, {"max", *hi}, {"count", values.size()},
                            {"max_window_change", *std::max_element(changes.begin(), changes.end())}}});
    (void)req;
  }

  void strichartz(const EstimatorRequest& req) {
    const bool projected = req.params.at("projected").get<bool>() && coevolve_;
    for (const auto& pair : pairs_of(req.params, s_.dim)) {
      std::vector<double> values, changes;
      for (std::size_t i = 0; i < series_.size(); ++i) {
        const DatumSeries& ds = series_[i];
        if (ds.initial_l2 == 0.0) continue;
        const MixedNormSeries& s = projected ? ds.lq_projected.at(pair.q()) : ds.lq.at(pair.q());
        const double full = strichartz_ratio(s, pair.p(), ds.initial_l2);
        const double half = strichartz_ratio(truncate(s, half_time()), pair.p(), ds.initial_l2);
        Json params = pair_json(pair);
        params["datum"] = i;
        params["projected"] = projected;
        row(req, params, full,
            Json{{"half_window_value", half}, {"window_change", relative_change(half, full)},
                 {"outside_hypothesis", pair.outside_hypothesis}});
        values.push_back(full);
        changes.push_back(relative_change(half, full));
      }
      spread_row(req, "strichartz_spread", values, changes, pair_json(pair));
    }
  }

  void inhomogeneous(const EstimatorRequest& req) {
    const SourceTerm st = source_term();
    const DatumSeries& ds = series_.front();
    for (const auto& pair : pairs_of(req.params, s_.dim)) {
      const MixedNormSeries& s = coevolve_ ? ds.lq_projected.at(pair.q()) : ds.lq.at(pair.q());
      const MixedNormSeries dual_full = source_dual_series(s_.end);
      const MixedNormSeries dual_half = source_dual_series(half_time());
      const double value = inhomogeneous_ratio(s, pair.p(), ds.initial_l2, dual_full, st.time_exponent);
      const double half =
          inhomogeneous_ratio(truncate(s, half_time()), pair.p(), ds.initial_l2, dual_half, st.time_exponent);
      Json params = pair_json(pair);
      params["dual_p"] = conjugate_exponent(st.time_exponent);
      params["dual_q"] = conjugate_exponent(st.space_exponent);
      params["projected"] = coevolve_;
      row(req, params, value,
          Json{{"half_window_value", half}, {"window_change", relative_change(half, value)},
               {"source_norm", mixed_norm(source_dual_series(s_.end), st.time_exponent)}, {"initial_l2", ds.initial_l2}});
    }
  }

  void kato_jensen(const EstimatorRequest& req) {
    const WeightProfile w = weight_of(req.params);
    const double t0 = req.params.at("t0").get<double>();
    const std::vector<double> t_list = req.params.at("t_list").get<std::vector<double>>();
    StepperConfig step = s_.stepper;
    step.keep_fields = false;
    step.snapshot_every = 1 << 30;
    step.boundary_mass_guard = 1.0;
    SandwichedPropagator op;
    op.apply = [&](const ScalarField& x, double t) {
      ScalarField y = apply_pc(weighted_multiply(x, w, t0), t0);
      y = propagate(h_, y, t0, t, step).final_state;
      weighted_multiply_in_place(y, w, t);
      return y;
    };
    op.apply_adjoint = [&](const ScalarField& y, double t) {
      ScalarField z = weighted_multiply(y, w, t);
      z = propagate(h_, z, t, t0, step).final_state;
      z = apply_pc(z, t0);
      weighted_multiply_in_place(z, w, t0);
      return z;
    };
    KatoJensenOptions opt;
    opt.iterations = static_cast<int>(req.params.at("iterations").get<long long>());
    const ScalarField start = random_band_limited(grid_, s_.seed + 977, w.center(t0), 2.0);
    const KatoJensenResult kj = kato_jensen_probe(op, start, t_list, opt);
    MixedNormSeries shifted;
    for (std::size_t i = 0; i < t_list.size(); ++i) {
      shifted.times.push_back(t_list[i] - t0);
      shifted.values.push_back(kj.estimates.values[i]);
    }
    const DecayFit fit = decay_fit(shifted, shifted.times.front(), shifted.times.back());
    row(req, req.params, fit.exponent,
        Json{{"estimates", series_json(kj.estimates)}, {"last_change", kj.last_change}, {"warnings", kj.warnings},
             {"fit_residual", fit.residual}, {"method", "power_iteration"}});
    r_.plots.push_back({"kato-jensen", shifted, fit});
  }

  void intertwining(const EstimatorRequest& req) {
    const int samples = static_cast<int>(req.params.at("samples").get<long long>());
    double worst = 0.0;
    Json per = Json::array();
    for (const auto& st : req.params.at("times")) {
      const double s = st[0].get<double>(), t = st[1].get<double>();
      std::vector<ScalarField> batch;
      for (int i = 0; i < samples; ++i) {
        ScalarField f = random_band_limited(grid_, s_.seed + 5000 + static_cast<std::uint64_t>(i), {0.0, 0.0, 0.0}, 3.0);
        batch.push_back(apply_pc(f, s));
        batch.push_back(std::move(f));
      }
      StepperConfig step = s_.stepper;
      step.snapshot_every = 1 << 30;
      std::vector<ScalarField> finals;
      const PropagatorTrace tr = propagate_batch(h_, batch, s, t, step, {}, nullptr, &finals);
      for (const auto& fl : tr.flags) flag(fl);
      // P_c(t) from its own backward sweep, independent of the one that built P_c(s).
      const ChannelBasis* bs = basis_at(s);
      std::optional<ChannelBasis> bt;
      if (bs) bt = channel_basis(t, h_, bound_, s_.wave_operator);
      for (int i = 0; i < samples; ++i) {
        const ScalarField lhs = bt ? project_scattering(finals[2 * i + 1], *bt) : finals[2 * i + 1];
        const double err = l2_norm(lhs - finals[2 * i]) / l2_norm(batch[2 * i + 1]);
        worst = std::max(worst, err);
        per.push_back(Json{{"s", s}, {"t", t}, {"sample", i}, {"error", err}});
      }
    }
    row(req, Json{{"samples", samples}, {"times", req.params.at("times")}}, worst, Json{{"cases", per}});
  }

  void oracle_compare(const EstimatorRequest& req) {
    require(grid_.size() <= kOracleMaxPoints, ErrorCode::grid_too_large,
            "oracle comparison needs a grid of at most 4096 points");
    const double dt_oracle = req.params.at("dt_oracle").get<double>();
    const OracleKinetic kind = req.params.at("kinetic").get<std::string>() == "finite_difference"
                                   ? OracleKinetic::finite_difference
                                   : OracleKinetic::fourier_collocation;
    const ScalarField& f0 = data_.front();
    const ScalarField ref = oracle_propagate(h_, f0, s_.start, s_.end, dt_oracle, kind);
    StepperConfig step = s_.stepper;
    step.snapshot_every = 1 << 30;
    auto err_at = [&](double dt) {
      step.dt = dt;
      const ScalarField got = propagate(h_, f0, s_.start, s_.end, step).final_state;
      return l2_norm(got - ref) / l2_norm(ref);
    };
    const double e1 = err_at(s_.stepper.dt);
    const double e2 = err_at(0.5 * s_.stepper.dt);
    row(req, req.params, e1, Json{{"error_half_dt", e2}, {"halving_ratio", e1 / e2}, {"dt", s_.stepper.dt}});
  }

  const Scenario& s_;
  RunReport& r_;
  Grid grid_;
  ScalarHamiltonian h_;
  bool needs_bound_ = false;
  bool needs_main_ = false;
  bool coevolve_ = false;
  std::set<double> anchors_;
  std::vector<BoundStateSet> bound_;
  std::map<double, ChannelBasis> bases_;
  std::vector<ScalarField> data_;
  std::vector<DatumSeries> series_;
  std::vector<double> tails_;
  std::vector<std::string> flags_;
  double max_boundary_ = 0.0;
  double max_drift_ = 0.0;
};

// ---------------------------------------------------------------------------

class MatrixRun {
 public:
  MatrixRun(const Scenario& s, RunReport& r) : s_(s), r_(r), grid_(s.grid()) {
    h_.potentials = s.matrix_potentials;
    h_.validate();
  }

  void run() {
    build_data();
    for (const auto& req : s_.estimators) {
      try {
        estimator(req);
      } catch (const SolverFailure&) {
        throw;
      } catch (const Error& e) {
        r_.errors.push_back({req.kind, e.what()});
      }
    }
    r_.diagnostics["flags"] = flags_;
  }

 private:
  void flag(const std::string& f) {
    if (std::find(flags_.begin(), flags_.end(), f) == flags_.end()) flags_.push_back(f);
    r_.valid = false;
  }

  void build_data() {
    std::uint64_t index = 0;
    for (const auto& d : s_.data) {
      for (int c = 0; c < d.count; ++c, ++index) {
        ScalarField f(grid_);
        if (d.kind == DatumRecipe::Kind::gaussian)
          f = gaussian_packet(grid_, d.center, d.width, d.momentum, Normalization::none);
        else if (d.kind == DatumRecipe::Kind::random_band_limited)
          f = random_band_limited(grid_, s_.seed + d.seed_offset + static_cast<std::uint64_t>(c), d.center,
                                  d.envelope, d.band, Normalization::none);
        if (d.kind != DatumRecipe::Kind::zero) {
          if (d.dilation != 1.0) f = dilate(f, d.dilation, d.center);
          if (norm2(d.boost) > 0.0) galilei_inverse_in_place(f, {d.boost, {0.0, 0.0, 0.0}, 0.0});
        }
        ScalarField second = f;
        for (auto& z : second.values()) z = d.second_component * std::conj(z);
        SpinorField psi(std::move(f), std::move(second));
        if (d.kind != DatumRecipe::Kind::zero && d.normalization != Normalization::none) {
          const double n = l2_norm(psi);
          require(n > 0.0, ErrorCode::invalid_input, "cannot normalize a zero datum");
          psi.first *= 1.0 / n;
          psi.second *= 1.0 / n;
        }
        data_.push_back(std::move(psi));
      }
    }
  }

  void row(const EstimatorRequest& req, Json params, double value, Json diag) {
    r_.rows.push_back({req.kind, std::move(params), value, std::move(diag)});
  }

  const MatrixPotentialSpec& single() const {
    require(h_.potentials.size() == 1, ErrorCode::invalid_input, "this estimator needs exactly one matrix potential");
    return h_.potentials.front();
  }

  void estimator(const EstimatorRequest& req) {
    const std::string& k = req.kind;
    if (k == "admissibility") {
      for (std::size_t p = 0; p < h_.potentials.size(); ++p) {
        const AdmissibilityReport rep = admissibility_report(h_.potentials[p], grid_);
        int failed = 0;
        for (const auto& c : rep.conditions) failed += c.verdict == Verdict::fail;
        double max_imag = 0.0;
        for (const auto& z : rep.gap_eigenvalues) max_imag = std::max(max_imag, std::abs(z.imag()));
        row(req, Json{{"potential", p}}, failed,
            Json{{"max_gap_imag", max_imag}, {"report", Json::parse(rep.to_json())}});
      }
    } else if (k == "stability") {
      StabilityOptions opt;
      opt.dt = req.params.at("dt").get<double>();
      const GrowthSeries g = stability_probe(single(), grid_, req.params.at("horizon").get<double>(),
                                             static_cast<int>(req.params.at("probes").get<long long>()), opt);
      MixedNormSeries s{g.times, g.max_norms};
      row(req, req.params, g.slope, Json{{"intercept", g.intercept}, {"max_norm", *std::max_element(g.max_norms.begin(), g.max_norms.end())}});
      r_.plots.push_back({"stability probe", s, std::nullopt});
    } else if (k == "kernel_growth") {
      const Eigen::MatrixXcd a = dense_matrix_operator(single(), grid_);
      const Eigen::VectorXcd seed = generalized_kernel_seed(a);
      require(seed.size() > 0, ErrorCode::invalid_input, "the operator has no generalized kernel beyond ker A");
      StabilityOptions opt;
      opt.dt = req.params.at("dt").get<double>();
      const double horizon = req.params.at("horizon").get<double>();
      const GrowthSeries g = track_norm(a, seed, horizon, opt);
      MixedNormSeries s;
      for (std::size_t i = 0; i < g.times.size(); ++i) {
        if (g.times[i] <= 0.0) continue;
        s.times.push_back(g.times[i]);
        s.values.push_back(g.max_norms[i]);
      }
      const DecayFit fit = decay_fit(s, 0.1 * horizon, horizon);
      row(req, req.params, fit.exponent, Json{{"residual", fit.residual}, {"final_norm", s.values.back()}});
      r_.plots.push_back({"generalized kernel growth", s, fit});
    } else if (k == "frame_reduction") {
      frame_reduction(req);
    } else if (k == "charge_drift" || k == "norm_drift") {
      StepperConfig step = s_.stepper;
      for (std::size_t i = 0; i < data_.size(); ++i) {
        const SpinorTrace tr = matrix_propagate(h_, data_[i], s_.start, s_.end, step);
        for (const auto& f : tr.flags) flag(f);
        const double duration = s_.end - s_.start;
        double growth = 1.0;
        for (const auto& d : tr.diagnostics) growth = std::max(growth, d.growth_ratio);
        if (k == "charge_drift")
          row(req, Json{{"datum", i}}, tr.max_charge_drift / duration, Json{{"max_growth_ratio", growth}});
        else
          row(req, Json{{"datum", i}}, tr.max_norm_drift, Json{{"max_growth_ratio", growth}});
      }
    } else if (k == "kato_jensen") {
      kato_jensen(req);
    } else if (k == "oracle_compare") {
      const double dt_oracle = req.params.at("dt_oracle").get<double>();
      const OracleKinetic kind = req.params.at("kinetic").get<std::string>() == "finite_difference"
                                     ? OracleKinetic::finite_difference
                                     : OracleKinetic::fourier_collocation;
      const SpinorField ref = oracle_propagate(h_, data_.front(), s_.start, s_.end, dt_oracle, kind);
      const SpinorField got = matrix_propagate(h_, data_.front(), s_.start, s_.end, s_.stepper).final_state;
      SpinorField diff = got;
      diff.first -= ref.first;
      diff.second -= ref.second;
      row(req, req.params, l2_norm(diff) / l2_norm(ref), Json{{"dt", s_.stepper.dt}});
    }
  }

  // Lab propagation against M(t)^{-1} G(t)^{-1} e^{-itA} G(0) M(0) with the dense exponential.
  void frame_reduction(const EstimatorRequest& req) {
    const MatrixPotentialSpec& ms = single();
    require(grid_.size() <= 1024, ErrorCode::grid_too_large, "frame_reduction needs a grid of at most 1024 points");
    const Eigen::MatrixXcd a = dense_matrix_operator(ms, grid_);
    const SpinorField& psi0 = data_.front();
    const SpinorTrace tr = matrix_propagate(h_, psi0, s_.start, s_.end, s_.stepper);
    for (const auto& f : tr.flags) flag(f);
    const Eigen::VectorXcd v0 = to_vector(lab_to_stationary(psi0, ms, s_.start));
    const Eigen::MatrixXcd e = (Complex(0.0, -(s_.end - s_.start)) * a).exp();
    const SpinorField exact = stationary_to_lab(spinor_from_vector(grid_, e * v0), ms, s_.end);
    SpinorField diff = tr.final_state;
    diff.first -= exact.first;
    diff.second -= exact.second;
    const double duration = s_.end - s_.start;
    row(req, Json::object(), l2_norm(diff) / l2_norm(exact),
        Json{{"charge_drift_per_time", tr.max_charge_drift / duration}, {"dt", s_.stepper.dt}});
  }

  // Lower estimate: random probes, matrix P_c from the oblique channel projection.
  void kato_jensen(const EstimatorRequest& req) {
    const WeightProfile w = weight_of(req.params);
    const double t0 = req.params.at("t0").get<double>();
    const std::vector<double> t_list = req.params.at("t_list").get<std::vector<double>>();
    const int probes = static_cast<int>(req.params.at("probes").get<long long>());
    std::vector<MatrixSpectralData> spectra;
    for (const auto& p : h_.potentials) spectra.push_back(matrix_spectrum(p, grid_));
    const SpinorChannelBasis basis = matrix_channel_basis(t0, h_, spectra, grid_, s_.wave_operator);
    for (const auto& f : basis.flags) flag(f);
    StepperConfig step = s_.stepper;
    step.boundary_mass_guard = 1.0;
    MixedNormSeries best;
    best.times = t_list;
    best.values.assign(t_list.size(), 0.0);
    auto weigh = [&](SpinorField f, double t) {
      weighted_multiply_in_place(f.first, w, t);
      weighted_multiply_in_place(f.second, w, t);
      return f;
    };
    for (int p = 0; p < probes; ++p) {
      SpinorField x(random_band_limited(grid_, s_.seed + 300 + 2 * p, w.center(t0), 2.0),
                    random_band_limited(grid_, s_.seed + 301 + 2 * p, w.center(t0), 2.0));
      const double nx = l2_norm(x);
      SpinorField y = project_matrix_scattering(weigh(x, t0), basis);
      std::size_t next = 0;
      auto observer = [&](double t, std::span<const SpinorField> st) {
        while (next < t_list.size() && std::abs(t - t_list[next]) < 1e-9) {
          best.values[next] = std::max(best.values[next], l2_norm(weigh(st.front(), t)) / nx);
          ++next;
        }
      };
      // Step so that every requested time is a snapshot.
      double t_prev = t0;
      for (std::size_t i = 0; i < t_list.size(); ++i) {
        const SpinorTrace tr = matrix_propagate(h_, y, t_prev, t_list[i], step);
        for (const auto& f : tr.flags) flag(f);
        y = tr.final_state;
        observer(t_list[i], std::span<const SpinorField>(&y, 1));
        t_prev = t_list[i];
      }
    }
    MixedNormSeries shifted;
    for (std::size_t i = 0; i < t_list.size(); ++i) {
      shifted.times.push_back(t_list[i] - t0);
      shifted.values.push_back(best.values[i]);
    }
    const DecayFit fit = decay_fit(shifted, shifted.times.front(), shifted.times.back());
    row(req, req.params, fit.exponent,
        Json{{"estimates", series_json(best)}, {"method", "random_rayleigh_lower_bound"},
             {"biorthogonality_defect", basis.biorthogonality_defect}});
    r_.plots.push_back({"kato-jensen (matrix, lower bound)", shifted, fit});
  }

  const Scenario& s_;
  RunReport& r_;
  Grid grid_;
  MatrixHamiltonian h_;
  std::vector<SpinorField> data_;
  std::vector<std::string> flags_;
};

void evaluate_assertions(const Scenario& s, RunReport& r) {
  for (const auto& req : s.estimators) {
    if (!req.expect_min && !req.expect_max) continue;
    bool any = false;
    for (const auto& row : r.rows) {
      if (row.estimator != req.kind) continue;
      any = true;
      Assertion a;
      a.name = req.kind + " " + row.params.dump();
      a.value = row.value;
      a.min = req.expect_min;
      a.max = req.expect_max;
      a.pass = std::isfinite(a.value) && (!a.min || a.value >= *a.min) && (!a.max || a.value <= *a.max);
      r.assertions.push_back(a);
    }
    if (!any) r.assertions.push_back({req.kind + " (no result)", 0.0, req.expect_min, req.expect_max, false});
  }
}

}  // namespace

RunReport run_scenario(const Scenario& s) {
  RunReport r;
  r.scenario = s.name;
  r.config = s.resolved;
  if (s.matrix) {
    MatrixRun(s, r).run();
  } else {
    ScalarRun(s, r).run();
  }
  evaluate_assertions(s, r);
  r.diagnostics["valid"] = r.valid;
  return r;
}

}  // namespace ctlab

#include "ctlab/propagator.hpp"

#include <cmath>
#include <map>

#include "ctlab/error.hpp"
#include "ctlab/fft.hpp"

namespace ctlab {

double GrowthEnvelope::bound(double elapsed) const noexcept {
  return constant * std::pow(1.0 + elapsed * elapsed, 0.5 * power);
}

void StepperConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::invalid_parameter, "time step must be positive");
  require(snapshot_every >= 1, ErrorCode::invalid_parameter, "snapshot_every must be at least 1");
  require(boundary_mass_guard > 0.0, ErrorCode::invalid_parameter,
          "boundary-mass guard must be positive");
}

bool ScalarHamiltonian::is_free() const noexcept {
  for (const auto& p : potentials)
    if (!p.spec.vanishes()) return false;
  return true;
}

void MatrixHamiltonian::validate() const {
  for (const auto& p : potentials) p.validate();
  require(!stationary_frame || potentials.size() == 1, ErrorCode::invalid_parameter,
          "the stationary frame is defined for exactly one matrix potential");
}

namespace {

struct Schedule {
  std::vector<double> tau;    // signed step lengths
  std::vector<double> start;  // start time of each step
  std::vector<bool> snapshot_after;

  std::size_t size() const noexcept { return tau.size(); }
  double end_time(std::size_t i) const noexcept { return start[i] + tau[i]; }
};

Schedule make_schedule(double s, double t, const StepperConfig& cfg) {
  Schedule sch;
  const double span = t - s;
  if (span == 0.0) return sch;
  const double sign = span > 0 ? 1.0 : -1.0;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / cfg.dt - 1e-9));
  for (std::size_t i = 0; i < n; ++i) {
    double start = s + sign * cfg.dt * static_cast<double>(i);
    double tau = (i + 1 == n) ? (t - start) : sign * cfg.dt;
    sch.start.push_back(start);
    sch.tau.push_back(tau);
    sch.snapshot_after.push_back((i + 1) % static_cast<std::size_t>(cfg.snapshot_every) == 0 ||
                                 i + 1 == n);
  }
  return sch;
}

// e^{-i sign (symbol + shift) tau} multipliers, cached per tau.
class KineticMultipliers {
 public:
  KineticMultipliers(const Grid& g, double shift, double sign)
      : symbol_(kinetic_symbol(g)), shift_(shift), sign_(sign) {}

  const ComplexBuffer& get(double tau) {
    auto it = cache_.find(tau);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 8) cache_.clear();
    ComplexBuffer m(symbol_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::polar(1.0, -sign_ * (symbol_[i] + shift_) * tau);
    return cache_.emplace(tau, std::move(m)).first->second;
  }

 private:
  const RealBuffer& symbol_;
  double shift_;
  double sign_;
  std::map<double, ComplexBuffer> cache_;
};

void multiply(std::span<Complex> a, const ComplexBuffer& m) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= m[i];
}

class ScalarPotentialSampler {
 public:
  ScalarPotentialSampler(const ScalarHamiltonian& h, const Grid& g) : grid_(g), values_(g.size(), 0.0) {
    static_.assign(g.size(), 0.0);
    for (const auto& p : h.potentials) {
      p.validate();
      if (p.spec.vanishes()) continue;
      active_ = true;
      if (norm2(p.velocity) == 0.0) {
        accumulate_potential(p, 0.0, g, static_);
      } else {
        moving_.push_back(p);
      }
    }
  }

  bool active() const noexcept { return active_; }

  const RealBuffer& at(double t) {
    if (moving_.empty()) return static_;
    values_ = static_;
    for (const auto& p : moving_) accumulate_potential(p, t, grid_, values_);
    return values_;
  }

 private:
  Grid grid_;
  RealBuffer static_;
  RealBuffer values_;
  std::vector<MovingPotential> moving_;
  bool active_ = false;
};

void record_scalar(PropagatorTrace& trace, double time, const ScalarField& state,
                   const StepperConfig& cfg, double initial_norm) {
  SnapshotDiagnostics d;
  d.time = time;
  d.l2_norm = l2_norm(state);
  d.boundary_mass = boundary_mass(state);
  trace.times.push_back(time);
  trace.diagnostics.push_back(d);
  trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(d.l2_norm - initial_norm));
  if (d.boundary_mass > cfg.boundary_mass_guard) {
    trace.valid = false;
    trace.flag("boundary-mass");
  }
  if (cfg.keep_fields) trace.fields.push_back(state);
}

PropagatorTrace exact_free_batch(std::vector<ScalarField> states, const Schedule& sch, double s,
                                 const StepperConfig& cfg, const ScalarObserver& observer,
                                 std::vector<ScalarField>* finals) {
  const Grid& g = states.front().grid();
  auto fft = fourier_for(g);
  const RealBuffer& symbol = kinetic_symbol(g);
  PropagatorTrace trace(states.front());
  const double n0 = l2_norm(states.front());
  if (observer) observer(s, states);
  record_scalar(trace, s, states.front(), cfg, n0);

  std::vector<ScalarField> spectra = states;
  for (auto& f : spectra) fft->forward(f);
  for (std::size_t i = 0; i < sch.size(); ++i) {
    if (!sch.snapshot_after[i]) continue;
    const double time = sch.end_time(i);
    ComplexBuffer m(symbol.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::polar(1.0, -symbol[k] * (time - s));
    for (std::size_t j = 0; j < states.size(); ++j) {
      states[j] = spectra[j];
      multiply(states[j].values(), m);
      fft->inverse(states[j]);
    }
    if (observer) observer(time, states);
    record_scalar(trace, time, states.front(), cfg, n0);
  }
  trace.final_state = states.front();
  if (finals) *finals = std::move(states);
  return trace;
}

}  // namespace

void free_propagate_in_place(ScalarField& f, double tau) {
  if (tau == 0.0) return;
  const Grid& g = f.grid();
  auto fft = fourier_for(g);
  const RealBuffer& symbol = kinetic_symbol(g);
  fft->forward(f);
  for (std::size_t k = 0; k < g.size(); ++k) f[k] *= std::polar(1.0, -symbol[k] * tau);
  fft->inverse(f);
}

ScalarField free_propagate(const ScalarField& f, double tau) {
  ScalarField out = f;
  free_propagate_in_place(out, tau);
  return out;
}

PropagatorTrace propagate_batch(const ScalarHamiltonian& h, std::vector<ScalarField> states,
                                double s, double t, const StepperConfig& cfg,
                                const ScalarObserver& observer, const SourceTerm* source,
                                std::vector<ScalarField>* finals) {
  cfg.validate();
  require(!states.empty(), ErrorCode::invalid_input, "nothing to propagate");
  require(std::isfinite(s) && std::isfinite(t), ErrorCode::invalid_parameter,
          "propagation times must be finite");
  const Grid g = states.front().grid();
  for (const auto& f : states)
    require(f.grid() == g, ErrorCode::invalid_input, "batch states live on different grids");
  for (const auto& p : h.potentials) {
    for (int a = g.dim(); a < 3; ++a) {
      require(p.spec.center[a] == 0.0 && p.velocity[a] == 0.0 && p.offset[a] == 0.0,
              ErrorCode::invalid_parameter, "potential uses more dimensions than the grid");
    }
  }

  const Schedule sch = make_schedule(s, t, cfg);
  const bool with_source = source && source->evaluator;
  if (h.is_free() && !with_source) {
    return exact_free_batch(std::move(states), sch, s, cfg, observer, finals);
  }

  auto fft = fourier_for(g);
  ScalarPotentialSampler sampler(h, g);
  KineticMultipliers kinetic(g, 0.0, 1.0);
  PropagatorTrace trace(states.front());
  const double n0 = l2_norm(states.front());
  if (observer) observer(s, states);
  record_scalar(trace, s, states.front(), cfg, n0);

  if (sch.size() == 0) {
    if (finals) *finals = std::move(states);
    return trace;
  }

  for (auto& f : states) {
    fft->forward(f);
    multiply(f.values(), kinetic.get(0.5 * sch.tau[0]));
  }
  ComplexBuffer phase(g.size(), Complex(1.0, 0.0));
  ComplexBuffer half_phase(g.size(), Complex(1.0, 0.0));
  std::vector<ScalarField> snaps;

  for (std::size_t i = 0; i < sch.size(); ++i) {
    const double tau = sch.tau[i];
    const double mid = sch.start[i] + 0.5 * tau;
    if (sampler.active()) {
      const RealBuffer& v = sampler.at(mid);
      for (std::size_t k = 0; k < g.size(); ++k) {
        phase[k] = std::polar(1.0, -tau * v[k]);
        if (with_source) half_phase[k] = std::polar(1.0, -0.5 * tau * v[k]);
      }
    }
    for (std::size_t j = 0; j < states.size(); ++j) {
      ScalarField& f = states[j];
      fft->inverse(f);
      if (j == 0 && with_source) {
        ScalarField force = source->evaluator(mid, g);
        require(force.grid() == g, ErrorCode::invalid_input, "source evaluated on the wrong grid");
        multiply(f.values(), half_phase);
        f.axpy(Complex(0.0, -tau), force);
        multiply(f.values(), half_phase);
      } else if (sampler.active()) {
        multiply(f.values(), phase);
      }
      fft->forward(f);
    }
    const bool last = i + 1 == sch.size();
    if (sch.snapshot_after[i]) {
      snaps = states;
      for (auto& f : snaps) {
        multiply(f.values(), kinetic.get(0.5 * tau));
        fft->inverse(f);
      }
      const double time = sch.end_time(i);
      if (observer) observer(time, snaps);
      record_scalar(trace, time, snaps.front(), cfg, n0);
      if (last) break;
    }
    const double next = 0.5 * (tau + sch.tau[i + 1]);
    for (auto& f : states) multiply(f.values(), kinetic.get(next));
  }
  trace.final_state = snaps.front();
  if (finals) *finals = std::move(snaps);
  return trace;
}

PropagatorTrace propagate(const ScalarHamiltonian& h, const ScalarField& initial, double s,
                          double t, const StepperConfig& cfg, const ScalarObserver& observer) {
  return propagate_batch(h, {initial}, s, t, cfg, observer, nullptr, nullptr);
}

PropagatorTrace propagate_with_source(const ScalarHamiltonian& h, const ScalarField& initial,
                                      const SourceTerm& source, double s, double t,
                                      const StepperConfig& cfg, const ScalarObserver& observer) {
  return propagate_batch(h, {initial}, s, t, cfg, observer, &source, nullptr);
}

// ---------------------------------------------------------------------------
// Matrix model

void matrix_exponential_2x2(const Complex m[4], double tau, Complex out[4]) {
  // M = c I + N with N traceless, N^2 = d I.
  const Complex c = 0.5 * (m[0] + m[3]);
  const Complex n11 = m[0] - c;
  const Complex d = n11 * n11 + m[1] * m[2];
  const Complex z = tau * tau * d;
  Complex cosine, sinc;  // cos(sqrt z), sin(sqrt z)/sqrt z
  if (std::abs(z) < 1e-6) {
    cosine = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
    sinc = 1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0;
  } else {
    const Complex r = std::sqrt(z);
    cosine = std::cos(r);
    sinc = std::sin(r) / r;
  }
  const Complex global = std::exp(Complex(0.0, -tau) * c);
  const Complex k = Complex(0.0, -tau) * sinc;
  out[0] = global * (cosine + k * n11);
  out[1] = global * (k * m[1]);
  out[2] = global * (k * m[2]);
  out[3] = global * (cosine - k * n11);
}

namespace {

class MatrixPotentialSampler {
 public:
  MatrixPotentialSampler(const MatrixHamiltonian& h, const Grid& g) : h_(h), field_(g) {
    h.validate();
    for (const auto& p : h.potentials) {
      for (int a = g.dim(); a < 3; ++a) {
        require(p.u_profile.center[a] == 0.0 && p.w_profile.center[a] == 0.0 && p.velocity[a] == 0.0,
                ErrorCode::invalid_parameter, "matrix potential uses more dimensions than the grid");
      }
    }
    if (h.stationary_frame) accumulate_stationary_matrix_potential(h.potentials.front(), g, field_);
  }

  bool active() const noexcept { return !h_.potentials.empty(); }

  const MatrixField& at(double t) {
    if (h_.stationary_frame) return field_;
    for (auto* buf : {&field_.a11, &field_.a12, &field_.a21, &field_.a22})
      std::fill(buf->begin(), buf->end(), Complex(0.0, 0.0));
    for (const auto& p : h_.potentials) accumulate_matrix_potential(p, t, field_.grid, field_);
    return field_;
  }

 private:
  const MatrixHamiltonian& h_;
  MatrixField field_;
};

void record_spinor(SpinorTrace& trace, double time, const SpinorField& state,
                   const StepperConfig& cfg, double initial_norm, double initial_charge,
                   double start) {
  SnapshotDiagnostics d;
  d.time = time;
  d.l2_norm = l2_norm(state);
  d.boundary_mass = boundary_mass(state);
  d.charge = charge(state);
  d.growth_ratio = initial_norm > 0.0 ? d.l2_norm / initial_norm : 1.0;
  trace.times.push_back(time);
  trace.diagnostics.push_back(d);
  trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(d.l2_norm - initial_norm));
  trace.max_charge_drift = std::max(trace.max_charge_drift, std::abs(d.charge - initial_charge));
  if (d.boundary_mass > cfg.boundary_mass_guard) {
    trace.valid = false;
    trace.flag("boundary-mass");
  }
  if (d.growth_ratio > cfg.growth.bound(time - start)) {
    trace.valid = false;
    trace.flag("growth-envelope");
  }
  if (cfg.keep_fields) trace.fields.push_back(state);
}

}  // namespace

SpinorTrace matrix_propagate(const MatrixHamiltonian& h, const SpinorField& initial, double s,
                             double t, const StepperConfig& cfg, const SpinorObserver& observer) {
  cfg.validate();
  require(std::isfinite(s) && std::isfinite(t), ErrorCode::invalid_parameter,
          "propagation times must be finite");
  const Grid g = initial.grid();
  auto fft = fourier_for(g);
  MatrixPotentialSampler sampler(h, g);
  const double shift = h.stationary_frame ? h.potentials.front().mu() : 0.0;
  KineticMultipliers upper(g, shift, 1.0);   // -Delta/2 (+ alpha^2/2)
  KineticMultipliers lower(g, shift, -1.0);  // +Delta/2 (- alpha^2/2)
  const Schedule sch = make_schedule(s, t, cfg);

  SpinorTrace trace(initial);
  const double n0 = l2_norm(initial);
  const double q0 = charge(initial);
  SpinorField state = initial;
  if (observer) observer(s, std::span<const SpinorField>(&state, 1));
  record_spinor(trace, s, state, cfg, n0, q0, s);
  if (sch.size() == 0) return trace;

  auto half_kinetic = [&](SpinorField& f, double tau) {
    multiply(f.first.values(), upper.get(tau));
    multiply(f.second.values(), lower.get(tau));
  };

  fft->forward(state.first);
  fft->forward(state.second);
  half_kinetic(state, 0.5 * sch.tau[0]);
  Complex m[4], e[4];
  for (std::size_t i = 0; i < sch.size(); ++i) {
    const double tau = sch.tau[i];
    fft->inverse(state.first);
    fft->inverse(state.second);
    if (sampler.active()) {
      const MatrixField& v = sampler.at(sch.start[i] + 0.5 * tau);
      for (std::size_t k = 0; k < g.size(); ++k) {
        m[0] = v.a11[k];
        m[1] = v.a12[k];
        m[2] = v.a21[k];
        m[3] = v.a22[k];
        matrix_exponential_2x2(m, tau, e);
        const Complex a = state.first[k];
        const Complex b = state.second[k];
        state.first[k] = e[0] * a + e[1] * b;
        state.second[k] = e[2] * a + e[3] * b;
      }
    }
    fft->forward(state.first);
    fft->forward(state.second);
    const bool last = i + 1 == sch.size();
    if (sch.snapshot_after[i]) {
      SpinorField snap = state;
      half_kinetic(snap, 0.5 * tau);
      fft->inverse(snap.first);
      fft->inverse(snap.second);
      const double time = sch.end_time(i);
      if (observer) observer(time, std::span<const SpinorField>(&snap, 1));
      record_spinor(trace, time, snap, cfg, n0, q0, s);
      if (last) {
        trace.final_state = std::move(snap);
        break;
      }
    }
    half_kinetic(state, 0.5 * (tau + sch.tau[i + 1]));
  }
  return trace;
}

}  // namespace ctlab

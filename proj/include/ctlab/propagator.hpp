#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctlab/grid.hpp"
#include "ctlab/potentials.hpp"

namespace ctlab {

/// Polynomial growth envelope  ||psi(t)|| / ||psi(s)|| <= constant * <t - s>^power.
struct GrowthEnvelope {
  double constant = 10.0;
  double power = 1.0;

  double bound(double elapsed) const noexcept;
};

struct StepperConfig {
  double dt = 0.01;
  int snapshot_every = 25;
  double boundary_mass_guard = 1e-6;
  bool keep_fields = true;
  GrowthEnvelope growth;

  void validate() const;
};

/// H(t) = -Delta/2 + sum_k V_k(x - c_k(t)).
struct ScalarHamiltonian {
  std::vector<MovingPotential> potentials;

  bool is_free() const noexcept;
};

/// H(t) = diag(-Delta/2, Delta/2) + sum_k V_k(t, x - v_k t). With
/// `stationary_frame`, the single potential is replaced by its stationary
/// operator diag(-Delta/2 + alpha^2/2, Delta/2 - alpha^2/2) + [[U, -W], [W, -U]].
struct MatrixHamiltonian {
  std::vector<MatrixPotentialSpec> potentials;
  bool stationary_frame = false;

  void validate() const;
};

struct SnapshotDiagnostics {
  double time = 0.0;
  double l2_norm = 0.0;
  double boundary_mass = 0.0;
  double charge = 0.0;        // spinor runs only
  double growth_ratio = 1.0;  // spinor runs only
};

template <class State>
struct Trace {
  explicit Trace(State initial_state) : initial(initial_state), final_state(std::move(initial_state)) {}

  std::vector<double> times;
  std::vector<State> fields;  // filled only when StepperConfig::keep_fields
  std::vector<SnapshotDiagnostics> diagnostics;
  State initial;
  State final_state;
  bool valid = true;
  std::vector<std::string> flags;
  double max_norm_drift = 0.0;
  double max_charge_drift = 0.0;

  void flag(const std::string& what) {
    for (const auto& f : flags)
      if (f == what) return;
    flags.push_back(what);
  }
};

using PropagatorTrace = Trace<ScalarField>;
using SpinorTrace = Trace<SpinorField>;

/// Right-hand side F(t, x) of i psi_t = H(t) psi + F together with the
/// dual exponents (p~', q~') its mixed norm is measured in.
struct SourceTerm {
  std::function<ScalarField(double, const Grid&)> evaluator;
  double time_exponent = 2.0;
  double space_exponent = 6.0 / 5.0;
};

/// Called at every snapshot (the start time, every `snapshot_every` steps,
/// and the end time) with all states of the batch.
using ScalarObserver = std::function<void(double, std::span<const ScalarField>)>;
using SpinorObserver = std::function<void(double, std::span<const SpinorField>)>;

/// Exact e^{i tau Delta/2}: Fourier mode k picks up e^{-i|k|^2 tau/2}.
ScalarField free_propagate(const ScalarField& f, double tau);
void free_propagate_in_place(ScalarField& f, double tau);

/// Strang splitting (half kinetic, potential phase at the step midpoint, half
/// kinetic). If |t - s| is not a multiple of dt the last step is shortened;
/// t < s runs the flow backwards.
PropagatorTrace propagate(const ScalarHamiltonian& h, const ScalarField& initial, double s,
                          double t, const StepperConfig& cfg, const ScalarObserver& observer = {});

/// As `propagate`, with the Duhamel source inserted at each step midpoint
/// between the two half potential phases.
PropagatorTrace propagate_with_source(const ScalarHamiltonian& h, const ScalarField& initial,
                                      const SourceTerm& source, double s, double t,
                                      const StepperConfig& cfg,
                                      const ScalarObserver& observer = {});

/// Propagates several states with one flow; the source (if any) drives
/// states[0] only. Diagnostics in the returned trace refer to states[0];
/// `finals` receives every final state.
PropagatorTrace propagate_batch(const ScalarHamiltonian& h, std::vector<ScalarField> states,
                                double s, double t, const StepperConfig& cfg,
                                const ScalarObserver& observer, const SourceTerm* source,
                                std::vector<ScalarField>* finals);

SpinorTrace matrix_propagate(const MatrixHamiltonian& h, const SpinorField& initial, double s,
                             double t, const StepperConfig& cfg,
                             const SpinorObserver& observer = {});

/// e^{-i tau M} for a 2x2 matrix, closed form with a series branch when the
/// eigenvalues of M nearly coalesce.
void matrix_exponential_2x2(const Complex m[4], double tau, Complex out[4]);

}  // namespace ctlab

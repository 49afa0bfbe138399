#pragma once

// Channel bases built from truncated wave operators, the bound-channel and
// scattering projections they define, and asymptotic-completeness residuals.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ctlab/propagator.hpp"
#include "ctlab/spectrum.hpp"

namespace ctlab {

struct WaveOperatorConfig {
  double horizon = 40.0;
  double tail_tolerance = 1e-3;
  StepperConfig stepper;

  void validate() const;
};

/// Channel kappa of a scalar charge-transfer Hamiltonian is the bound-state
/// space of potential kappa alone, carried along that potential's trajectory.
struct ChannelBasis {
  double anchor_time = 0.0;
  std::vector<ScalarField> u_tilde;  // channel 1 (potential 0), orthonormal
  // Channel 2 (potential 1), orthonormal and also orthogonalized against u_tilde
  // so that the complement projection is exactly idempotent.
  std::vector<ScalarField> w_tilde;
  // <w_j, u_i> of the within-family orthonormalized sets, before the cross step.
  Eigen::MatrixXcd raw_overlap;
  std::vector<double> tails;  // Duhamel truncation estimate per basis vector
  std::vector<std::string> flags;

  double max_raw_overlap() const;
  double gram_defect() const;  // over the combined family
};

/// Duhamel remainder of truncating the wave operator of one channel state at
/// the horizon: integral over r > T of ||V_other(r) chi(r)||, extrapolated
/// from an exponential fit on [T - 8, T].
struct TailEstimate {
  double tail = 0.0;
  double rate = 0.0;  // fitted exponential decay rate (<= 0: not decaying)
  double suggested_horizon = 0.0;
};

TailEstimate channel_tail(const ScalarHamiltonian& h, std::size_t channel, const ScalarField& bound_state,
                          double horizon, double tolerance);

/// Channel bases at each anchor time (all <= horizon) from one backward sweep.
/// `bound` holds one set per potential of `h`; `h` has one or two potentials.
/// Throws HorizonTooSmall when a tail exceeds the configured tolerance.
std::vector<ChannelBasis> channel_bases(const std::vector<double>& anchors, const ScalarHamiltonian& h,
                                        std::span<const BoundStateSet> bound,
                                        const WaveOperatorConfig& cfg);
ChannelBasis channel_basis(double s, const ScalarHamiltonian& h, std::span<const BoundStateSet> bound,
                           const WaveOperatorConfig& cfg);

/// Orthogonal projections onto span u_tilde and span w_tilde.
std::pair<ScalarField, ScalarField> project_channels(const ScalarField& f, const ChannelBasis& basis);
/// f minus both channel projections.
ScalarField project_scattering(const ScalarField& f, const ChannelBasis& basis);

/// Bound-state content of the evolution of f: at each snapshot t in [s, T]
/// the sum over potentials of ||P_b(H_kappa, t) psi(t)||, with the bound
/// states transported along each trajectory.
MixedNormSeries ac_residual(const ScalarField& f, double s, double t, const ScalarHamiltonian& h,
                            std::span<const BoundStateSet> bound, const StepperConfig& cfg);

/// ||P_b(H_kappa, t) g|| for every potential, same transport as ac_residual.
std::vector<double> transported_bound_content(const ScalarField& g, double t, const ScalarHamiltonian& h,
                                              std::span<const BoundStateSet> bound);

// ---------------------------------------------------------------------------
// Matrix channels

/// Lab-frame vector of channel kappa at time t from a stationary-frame vector:
/// the inverse of the reduction M(t) G_v(t) of that potential.
SpinorField stationary_to_lab(const SpinorField& stationary, const MatrixPotentialSpec& ms, double t);
SpinorField lab_to_stationary(const SpinorField& lab, const MatrixPotentialSpec& ms, double t);

struct SpinorChannelBasis {
  double anchor_time = 0.0;
  std::vector<std::vector<SpinorField>> right;  // per potential: propagated generalized eigenvectors
  std::vector<std::vector<SpinorField>> left;   // per potential: transported left duals
  Eigen::MatrixXcd gram;                        // <left_i, right_j> over the combined family
  double biorthogonality_defect = 0.0;          // ||gram - I||_max before the oblique correction
  std::vector<std::string> flags;

  std::size_t size() const noexcept;
};

/// Matrix analogue of channel_basis. Each generalized eigenspace is evolved by
/// the exact restricted exponential (Jordan chains included), taken to the lab
/// frame at the horizon and propagated back to s. With a single potential the
/// backward propagation is skipped: the result is the lab-frame image at s.
SpinorChannelBasis matrix_channel_basis(double s, const MatrixHamiltonian& h,
                                        std::span<const MatrixSpectralData> spectra, const Grid& grid,
                                        const WaveOperatorConfig& cfg);

/// Oblique channel projections f -> sum_j phi_j (G^{-1} <psi, f>)_j, one per potential.
std::vector<SpinorField> project_matrix_channels(const SpinorField& f, const SpinorChannelBasis& basis);
SpinorField project_matrix_scattering(const SpinorField& f, const SpinorChannelBasis& basis);

}  // namespace ctlab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctlab/oracle.hpp"
#include "ctlab/potentials.hpp"

namespace ctlab {

// ---------------------------------------------------------------------------
// Scalar bound states of H = -Delta/2 + V

struct BoundStateSet {
  std::vector<double> eigenvalues;  // ascending, all < 0
  std::vector<ScalarField> eigenfunctions;
  std::vector<double> residuals;  // ||(H - lambda) u||_2
  // Localized eigenvalues within the threshold guard of 0 (scenario validation rejects these).
  std::vector<double> near_threshold;
  // Box modes (eigenvectors spread over the periodic box) that were discarded.
  int discarded_delocalized = 0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  bool empty() const noexcept { return eigenvalues.empty(); }
  double gram_defect() const;
};

struct LanczosOptions {
  int krylov_dim = 30;
  int max_restarts = 60;
  double cg_tolerance = 1e-13;
  int cg_max_iterations = 2000;
  double threshold_guard = 1e-3;
  // An eigenvector counts as a box mode if more than this fraction of its mass
  // lies farther than L/2 from the potential center.
  double delocalized_mass = 0.5;
  std::uint64_t seed = 7;
};

/// All eigenpairs of H with eigenvalue below -tol, by shift-invert Lanczos
/// with locking. Each returned pair has residual <= tol.
BoundStateSet bound_states(const PotentialSpec& spec, const Grid& grid, int k_max, double tol,
                           const LanczosOptions& options = {});

/// Dense reference: -Delta/2 + diag(V) assembled explicitly.
Eigen::MatrixXd dense_scalar_hamiltonian(const PotentialSpec& spec, const Grid& grid,
                                         OracleKinetic kind = OracleKinetic::fourier_collocation);

/// Applies -Delta/2 + V spectrally.
ScalarField apply_hamiltonian(const RealBuffer& potential, const ScalarField& f);

// ---------------------------------------------------------------------------
// Non-selfadjoint matrix operators A = [[H + U, -W], [W, -H - U]], H = -Delta/2 + mu

struct Subspace {
  Eigen::MatrixXcd basis;  // orthonormal columns
  int dimension = 0;
  bool ambiguous = false;  // singular values within a decade of the threshold
  std::vector<double> singular_values;
  std::vector<int> level_dimensions;  // dim ker (A - w)^k for k = 1 .. order
};

/// Numerical nullspace of (A - omega)^order, order in {1, 2, 3}. Each power is
/// handled recursively: ker (A-w)^k is ker (A-w)^{k-1} plus the vectors x orthogonal
/// to it with (A-w)x in ker (A-w)^{k-1}, all by relative SVD thresholding.
Subspace generalized_eigenspace(const Eigen::MatrixXcd& a, Complex omega, int order,
                                double relative_threshold = 1e-8);

struct EigenCluster {
  Complex omega;             // cluster mean (well conditioned even for Jordan blocks)
  int algebraic_multiplicity = 0;
  int jordan_order = 1;      // smallest k with dim ker (A-w)^k = dim ker (A-w)^{k+1}
  std::vector<int> kernel_dimensions;  // dim ker (A-w)^k for k = 1, 2, 3
  Subspace right;            // generalized eigenspace of A
  Subspace left;             // generalized eigenspace of A^* at conj(omega)
};

struct MatrixSpectralData {
  double mu = 0.0;
  int box_modes = 0;  // delocalized gap eigenvalues near the thresholds, excluded from `gap`
  std::vector<Complex> eigenvalues;   // full spectrum of the discretization
  std::vector<EigenCluster> gap;      // clusters inside (-mu, mu)
  // Concatenated right / left bases of the gap clusters, biorthonormalized so
  // that left^* right = I.
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
  double biorthogonality_defect = 0.0;

  /// P_b = right left^*
  Eigen::MatrixXcd bound_projection() const;
};

/// Dense eigen-analysis of the stationary operator on a grid of at most 2048 points.
MatrixSpectralData matrix_spectrum(const MatrixPotentialSpec& ms, const Grid& grid);
/// Same for an explicit operator. With a grid, delocalized gap eigenvectors
/// (box modes next to the thresholds) are excluded from the gap set.
MatrixSpectralData matrix_spectrum(const Eigen::MatrixXcd& a, double mu, const Grid* grid = nullptr);

/// Fraction of the mass of a spinor vector farther than L/2 from its peak.
double spinor_outside_mass(const Eigen::VectorXcd& v, const Grid& grid);
/// Exponential decay rate of the shell-maximum envelope of a spinor vector
/// around its peak, fitted until the envelope reaches round-off.
double spinor_decay_rate(const Eigen::VectorXcd& v, const Grid& grid);

/// Groups eigenvalues whose single-linkage distance is below `radius`.
std::vector<std::vector<Complex>> cluster_eigenvalues(const std::vector<Complex>& values,
                                                      double radius);

enum class Verdict { pass, fail, unchecked };
const char* to_string(Verdict v) noexcept;

struct ConditionCheck {
  std::string id;
  Verdict verdict = Verdict::unchecked;
  std::string detail;
};

struct AdmissibilityReport {
  double mu = 0.0;
  std::vector<Complex> gap_eigenvalues;
  std::vector<ConditionCheck> conditions;

  bool admissible() const noexcept;  // no failed condition
  const ConditionCheck* find(const std::string& id) const noexcept;
  std::string to_json() const;
};

AdmissibilityReport admissibility_report(const MatrixPotentialSpec& ms, const Grid& grid);
AdmissibilityReport admissibility_report(const Eigen::MatrixXcd& a, double mu, const Grid& grid);

struct GrowthSeries {
  std::vector<double> times;
  std::vector<double> max_norms;
  double slope = 0.0;      // linear trend of max_norms against t
  double intercept = 0.0;
};

struct StabilityOptions {
  double dt = 0.05;
  double sample_every = 1.0;
  double envelope_width = 3.0;  // Gaussian envelope of random probes
  double cutoff = 2.0;          // Gaussian spectral cutoff of random probes
  std::uint64_t seed = 11;
};

/// Propagates `probes` random smooth P_c-projected vectors with e^{itA}
/// (Crank-Nicolson on the dense operator) and records the worst normalized
/// norm at each sample time.
GrowthSeries stability_probe(const Eigen::MatrixXcd& a, const MatrixSpectralData& data,
                             const Grid& grid, double horizon, int probes,
                             const StabilityOptions& options = {});
GrowthSeries stability_probe(const MatrixPotentialSpec& ms, const Grid& grid, double horizon,
                             int probes, const StabilityOptions& options = {});

/// Unit vector in ker A^2 orthogonal to ker A (empty if ker A^2 = ker A).
Eigen::VectorXcd generalized_kernel_seed(const Eigen::MatrixXcd& a);

/// Norm series of e^{itA} v for one vector, same stepping as stability_probe.
GrowthSeries track_norm(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& v, double horizon,
                        const StabilityOptions& options = {});

}  // namespace ctlab

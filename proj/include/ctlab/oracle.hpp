#pragma once

// Dense small-grid reference solvers. Everything here is deliberately
// independent of the split-step machinery: matrices are assembled explicitly
// and time stepping is Crank-Nicolson with LU solves.

#include <Eigen/Dense>

#include "ctlab/propagator.hpp"

namespace ctlab {

enum class OracleKinetic {
  fourier_collocation,  // -Delta/2 as the dense spectral differentiation matrix
  finite_difference,    // second-order three-point stencil per axis
};

inline constexpr std::size_t kOracleMaxPoints = 4096;

/// Dense -Delta/2 on the grid (real symmetric). Refuses grids above kOracleMaxPoints.
Eigen::MatrixXd dense_kinetic(const Grid& grid, OracleKinetic kind = OracleKinetic::fourier_collocation);

/// Dense stationary matrix operator diag(T + mu, -T - mu) + [[U, -W], [W, -U]]
/// with T = -Delta/2 and mu = alpha^2/2, in (first, second) block order.
Eigen::MatrixXcd dense_matrix_operator(const MatrixPotentialSpec& ms, const Grid& grid,
                                       OracleKinetic kind = OracleKinetic::fourier_collocation);

Eigen::VectorXcd to_vector(const ScalarField& f);
Eigen::VectorXcd to_vector(const SpinorField& f);
ScalarField scalar_from_vector(const Grid& grid, const Eigen::VectorXcd& v);
SpinorField spinor_from_vector(const Grid& grid, const Eigen::VectorXcd& v);

/// Crank-Nicolson with uniform steps of at most dt_oracle, potential sampled
/// at step midpoints (one factorization when every potential is static).
ScalarField oracle_propagate(const ScalarHamiltonian& h, const ScalarField& initial, double s,
                             double t, double dt_oracle,
                             OracleKinetic kind = OracleKinetic::fourier_collocation);

SpinorField oracle_propagate(const MatrixHamiltonian& h, const SpinorField& initial, double s,
                             double t, double dt_oracle,
                             OracleKinetic kind = OracleKinetic::fourier_collocation);

}  // namespace ctlab

#pragma once

#include <vector>

#include "ctlab/grid.hpp"

namespace ctlab {

enum class PotentialFamily {
  gaussian,      // A exp(-r^2 / (2 w^2))
  sech_squared,  // A sech^2(r / w)
};

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::gaussian;
  double amplitude = 0.0;
  double width = 1.0;
  Vec3 center{0.0, 0.0, 0.0};

  void validate() const;
  double profile(double r) const noexcept;
  bool vanishes() const noexcept { return amplitude == 0.0; }
};

/// V(x - center - offset - velocity t).
struct MovingPotential {
  PotentialSpec spec;
  Vec3 velocity{0.0, 0.0, 0.0};
  Vec3 offset{0.0, 0.0, 0.0};

  void validate() const;
  Vec3 center_at(double t) const noexcept { return spec.center + offset + t * velocity; }
};

/// Phase-rotating 2x2 potential [[U, -e^{i theta} W], [e^{-i theta} W, -U]]
/// moving with `velocity`, theta(t, xi) = (|v|^2 + alpha^2) t + 2 xi.v + gamma
/// in the co-moving coordinate xi = x - v t.
struct MatrixPotentialSpec {
  PotentialSpec u_profile;
  PotentialSpec w_profile;
  double alpha = 1.0;
  double gamma = 0.0;
  Vec3 velocity{0.0, 0.0, 0.0};

  void validate() const;
  double theta(double t, const Vec3& xi) const noexcept;
  double mu() const noexcept { return 0.5 * alpha * alpha; }
};

/// Pointwise 2x2 matrix field, entries stored per grid point.
struct MatrixField {
  explicit MatrixField(const Grid& grid);
  Grid grid;
  ComplexBuffer a11, a12, a21, a22;
};

/// Adds the sampled values of `mp` at time t into `out` (size == grid.size()).
void accumulate_potential(const MovingPotential& mp, double t, const Grid& grid,
                          std::span<double> out);
RealBuffer sample_potential_values(const MovingPotential& mp, double t, const Grid& grid);
ScalarField sample_potential(const MovingPotential& mp, double t, const Grid& grid);

void accumulate_matrix_potential(const MatrixPotentialSpec& ms, double t, const Grid& grid,
                                 MatrixField& out);
MatrixField sample_matrix_potential(const MatrixPotentialSpec& ms, double t, const Grid& grid);
/// The stationary-frame block [[U, -W], [W, -U]] (no phase, no alpha shift).
void accumulate_stationary_matrix_potential(const MatrixPotentialSpec& ms, const Grid& grid,
                                            MatrixField& out);

}  // namespace ctlab

#pragma once

#include "ctlab/grid.hpp"

namespace ctlab {

/// Galilei transform G_{v,y}(t) = e^{-i|v|^2 t/2} e^{-ix.v} e^{i(y+tv).p}, p = -i grad.
/// The translation factor maps f(x) to f(x + y + tv) and is applied exactly as
/// a Fourier phase, so off-lattice shifts carry no interpolation error.
struct GalileiParams {
  Vec3 velocity{0.0, 0.0, 0.0};
  Vec3 offset{0.0, 0.0, 0.0};
  double time = 0.0;

  Vec3 shift() const noexcept { return offset + time * velocity; }
};

/// M_{alpha,gamma}(t) = diag(e^{-i omega/2}, e^{+i omega/2}), omega = alpha^2 t + gamma.
struct ModulationParams {
  double alpha = 1.0;
  double gamma = 0.0;
  double time = 0.0;

  double omega() const noexcept { return alpha * alpha * time + gamma; }
};

/// result(x) = f(x + shift) on the periodic box.
ScalarField translate(const ScalarField& f, const Vec3& shift);
void translate_in_place(ScalarField& f, const Vec3& shift);

ScalarField galilei(const ScalarField& f, const GalileiParams& gp);
/// G_{v,y}(t)^{-1} = e^{-i y.v} G_{-v,-y}(t)
ScalarField galilei_inverse(const ScalarField& f, const GalileiParams& gp);
void galilei_in_place(ScalarField& f, const GalileiParams& gp);
void galilei_inverse_in_place(ScalarField& f, const GalileiParams& gp);

/// (G psi_1, conj(G conj(psi_2)))
SpinorField vector_galilei(const SpinorField& psi, const GalileiParams& gp);
SpinorField vector_galilei_inverse(const SpinorField& psi, const GalileiParams& gp);

SpinorField modulation(const SpinorField& psi, const ModulationParams& mp);
SpinorField modulation_inverse(const SpinorField& psi, const ModulationParams& mp);

}  // namespace ctlab

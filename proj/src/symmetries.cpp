#include "ctlab/symmetries.hpp"

#include <cmath>

#include "ctlab/fft.hpp"

namespace ctlab {

void translate_in_place(ScalarField& f, const Vec3& shift) {
  if (shift[0] == 0.0 && shift[1] == 0.0 && shift[2] == 0.0) return;
  const Grid& g = f.grid();
  auto fft = fourier_for(g);
  fft->forward(f);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] *= std::polar(1.0, dot(g.wavevector(i), shift));
  fft->inverse(f);
}

ScalarField translate(const ScalarField& f, const Vec3& shift) {
  ScalarField out = f;
  translate_in_place(out, shift);
  return out;
}

void galilei_in_place(ScalarField& f, const GalileiParams& gp) {
  translate_in_place(f, gp.shift());
  const Grid& g = f.grid();
  const Complex global = std::polar(1.0, -0.5 * norm2(gp.velocity) * gp.time);
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] *= global * std::polar(1.0, -dot(g.point(i), gp.velocity));
  }
}

// Undo the phase, then the translation: the exact lattice inverse of galilei_in_place.
void galilei_inverse_in_place(ScalarField& f, const GalileiParams& gp) {
  const Grid& g = f.grid();
  const Complex global = std::polar(1.0, 0.5 * norm2(gp.velocity) * gp.time);
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] *= global * std::polar(1.0, dot(g.point(i), gp.velocity));
  }
  translate_in_place(f, -1.0 * gp.shift());
}

ScalarField galilei(const ScalarField& f, const GalileiParams& gp) {
  ScalarField out = f;
  galilei_in_place(out, gp);
  return out;
}

ScalarField galilei_inverse(const ScalarField& f, const GalileiParams& gp) {
  ScalarField out = f;
  galilei_inverse_in_place(out, gp);
  return out;
}

namespace {

void conjugate(ScalarField& f) {
  for (auto& z : f.values()) z = std::conj(z);
}

}  // namespace

SpinorField vector_galilei(const SpinorField& psi, const GalileiParams& gp) {
  ScalarField a = galilei(psi.first, gp);
  ScalarField b = psi.second;
  conjugate(b);
  galilei_in_place(b, gp);
  conjugate(b);
  return SpinorField(std::move(a), std::move(b));
}

SpinorField vector_galilei_inverse(const SpinorField& psi, const GalileiParams& gp) {
  ScalarField a = galilei_inverse(psi.first, gp);
  ScalarField b = psi.second;
  conjugate(b);
  galilei_inverse_in_place(b, gp);
  conjugate(b);
  return SpinorField(std::move(a), std::move(b));
}

SpinorField modulation(const SpinorField& psi, const ModulationParams& mp) {
  const double w = mp.omega();
  return SpinorField(std::polar(1.0, -0.5 * w) * psi.first, std::polar(1.0, 0.5 * w) * psi.second);
}

SpinorField modulation_inverse(const SpinorField& psi, const ModulationParams& mp) {
  const double w = mp.omega();
  return SpinorField(std::polar(1.0, 0.5 * w) * psi.first, std::polar(1.0, -0.5 * w) * psi.second);
}

}  // namespace ctlab

#include "ctlab/potentials.hpp"

#include <cmath>

#include "ctlab/error.hpp"

namespace ctlab {

namespace {

bool finite3(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

// Separable evaluation for Gaussians: exp(-|d|^2/(2w^2)) = prod_a exp(-d_a^2/(2w^2)).
void accumulate_gaussian(const PotentialSpec& spec, const Vec3& c, const Grid& grid,
                         std::span<double> out) {
  const int n = grid.points_per_axis();
  const int dim = grid.dim();
  std::vector<double> axis[3];
  for (int a = 0; a < 3; ++a) {
    axis[a].assign(n, 1.0);
    if (a >= dim) continue;
    for (int i = 0; i < n; ++i) {
      Vec3 d{0.0, 0.0, 0.0};
      d[a] = grid.coordinate(i) - c[a];
      d = grid.minimum_image(d);
      axis[a][i] = std::exp(-d[a] * d[a] / (2.0 * spec.width * spec.width));
    }
  }
  const int n1 = dim > 1 ? n : 1;
  const int n2 = dim > 2 ? n : 1;
  std::size_t flat = 0;
  for (int i = 0; i < n; ++i) {
    const double gi = spec.amplitude * axis[0][i];
    for (int j = 0; j < n1; ++j) {
      const double gij = gi * axis[1][j];
      for (int k = 0; k < n2; ++k) out[flat++] += gij * axis[2][k];
    }
  }
}

}  // namespace

void PotentialSpec::validate() const {
  require(std::isfinite(amplitude), ErrorCode::invalid_parameter, "potential amplitude must be finite");
  require(std::isfinite(width) && width > 0.0, ErrorCode::invalid_parameter,
          "potential width must be positive");
  require(finite3(center), ErrorCode::invalid_parameter, "potential center must be finite");
}

double PotentialSpec::profile(double r) const noexcept {
  switch (family) {
    case PotentialFamily::gaussian:
      return amplitude * std::exp(-r * r / (2.0 * width * width));
    case PotentialFamily::sech_squared: {
      double s = 1.0 / std::cosh(r / width);
      return amplitude * s * s;
    }
  }
  return 0.0;
}

void MovingPotential::validate() const {
  spec.validate();
  require(finite3(velocity) && finite3(offset), ErrorCode::invalid_parameter,
          "trajectory velocity and offset must be finite");
}

void MatrixPotentialSpec::validate() const {
  u_profile.validate();
  w_profile.validate();
  require(std::isfinite(alpha) && alpha != 0.0, ErrorCode::invalid_parameter,
          "matrix potential alpha must be nonzero");
  require(std::isfinite(gamma) && finite3(velocity), ErrorCode::invalid_parameter,
          "matrix potential gamma and velocity must be finite");
}

double MatrixPotentialSpec::theta(double t, const Vec3& xi) const noexcept {
  return (norm2(velocity) + alpha * alpha) * t + 2.0 * dot(xi, velocity) + gamma;
}

MatrixField::MatrixField(const Grid& g)
    : grid(g), a11(g.size()), a12(g.size()), a21(g.size()), a22(g.size()) {}

void accumulate_potential(const MovingPotential& mp, double t, const Grid& grid,
                          std::span<double> out) {
  require(out.size() == grid.size(), ErrorCode::invalid_input, "potential buffer size mismatch");
  if (mp.spec.vanishes()) return;
  const Vec3 c = mp.center_at(t);
  if (mp.spec.family == PotentialFamily::gaussian) {
    accumulate_gaussian(mp.spec, c, grid, out);
    return;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec3 d = grid.minimum_image(grid.point(i) - c);
    out[i] += mp.spec.profile(std::sqrt(norm2(d)));
  }
}

RealBuffer sample_potential_values(const MovingPotential& mp, double t, const Grid& grid) {
  RealBuffer v(grid.size(), 0.0);
  accumulate_potential(mp, t, grid, v);
  return v;
}

ScalarField sample_potential(const MovingPotential& mp, double t, const Grid& grid) {
  RealBuffer v = sample_potential_values(mp, t, grid);
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = Complex(v[i], 0.0);
  return f;
}

void accumulate_matrix_potential(const MatrixPotentialSpec& ms, double t, const Grid& grid,
                                 MatrixField& out) {
  require(out.grid == grid, ErrorCode::invalid_input, "matrix field grid mismatch");
  const Vec3 shift = t * ms.velocity;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 xi = grid.point(i) - shift;
    const Vec3 du = grid.minimum_image(xi - ms.u_profile.center);
    const Vec3 dw = grid.minimum_image(xi - ms.w_profile.center);
    const double u = ms.u_profile.profile(std::sqrt(norm2(du)));
    const double w = ms.w_profile.profile(std::sqrt(norm2(dw)));
    const Complex phase = std::polar(1.0, ms.theta(t, ms.w_profile.center + dw));
    out.a11[i] += u;
    out.a12[i] += -phase * w;
    out.a21[i] += std::conj(phase) * w;
    out.a22[i] += -u;
  }
}

MatrixField sample_matrix_potential(const MatrixPotentialSpec& ms, double t, const Grid& grid) {
  MatrixField out(grid);
  accumulate_matrix_potential(ms, t, grid, out);
  return out;
}

void accumulate_stationary_matrix_potential(const MatrixPotentialSpec& ms, const Grid& grid,
                                            MatrixField& out) {
  require(out.grid == grid, ErrorCode::invalid_input, "matrix field grid mismatch");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.point(i);
    const double u = ms.u_profile.profile(std::sqrt(norm2(grid.minimum_image(x - ms.u_profile.center))));
    const double w = ms.w_profile.profile(std::sqrt(norm2(grid.minimum_image(x - ms.w_profile.center))));
    out.a11[i] += u;
    out.a12[i] += -w;
    out.a21[i] += w;
    out.a22[i] += -u;
  }
}

}  // namespace ctlab

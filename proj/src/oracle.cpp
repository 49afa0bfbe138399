#include "ctlab/oracle.hpp"

#include <cmath>

#include "ctlab/error.hpp"
#include "ctlab/fft.hpp"

namespace ctlab {

namespace {

void require_dense(std::size_t points) {
  require(points <= kOracleMaxPoints, ErrorCode::grid_too_large,
          "dense oracle refuses grids with more than 4096 unknowns");
}

Eigen::MatrixXd kinetic_1d(const Grid& g, OracleKinetic kind) {
  const int n = g.points_per_axis();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  if (kind == OracleKinetic::finite_difference) {
    const double c = 0.5 / (g.spacing() * g.spacing());
    for (int i = 0; i < n; ++i) {
      t(i, i) = 2.0 * c;
      t(i, (i + 1) % n) -= c;
      t(i, (i + n - 1) % n) -= c;
    }
    return t;
  }
  // T_jl = (1/n) sum_m (k_m^2/2) cos(k_m (x_j - x_l)); the Nyquist term is real too.
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      double acc = 0.0;
      for (int m = 0; m < n; ++m) {
        const double k = g.wavenumber(m);
        acc += 0.5 * k * k * std::cos(k * g.spacing() * (j - l));
      }
      t(j, l) = acc / n;
    }
  }
  return t;
}

}  // namespace

Eigen::MatrixXd dense_kinetic(const Grid& g, OracleKinetic kind) {
  require_dense(g.size());
  const Eigen::MatrixXd t1 = kinetic_1d(g, kind);
  const int n = g.points_per_axis();
  const auto size = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
  // Kronecker sum over axes; axis 0 is the slowest index.
  const Eigen::Index stride[3] = {
      g.dim() == 1 ? 1 : (g.dim() == 2 ? n : n * n),
      g.dim() == 2 ? 1 : n,
      1,
  };
  for (Eigen::Index p = 0; p < size; ++p) {
    const auto idx = g.multi_index(static_cast<std::size_t>(p));
    for (int a = 0; a < g.dim(); ++a) {
      const Eigen::Index base = p - idx[a] * stride[a];
      for (int m = 0; m < n; ++m) t(p, base + m * stride[a]) += t1(idx[a], m);
    }
  }
  return t;
}

Eigen::MatrixXcd dense_matrix_operator(const MatrixPotentialSpec& ms, const Grid& g,
                                       OracleKinetic kind) {
  ms.validate();
  require_dense(2 * g.size());
  const Eigen::MatrixXd t = dense_kinetic(g, kind);
  const auto n = static_cast<Eigen::Index>(g.size());
  MatrixField v(g);
  accumulate_stationary_matrix_potential(ms, g, v);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = t.cast<Complex>();
  a.bottomRightCorner(n, n) = -t.cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) += ms.mu() + v.a11[i];
    a(i, n + i) += v.a12[i];
    a(n + i, i) += v.a21[i];
    a(n + i, n + i) += -ms.mu() + v.a22[i];
  }
  return a;
}

Eigen::VectorXcd to_vector(const ScalarField& f) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = f[i];
  return v;
}

Eigen::VectorXcd to_vector(const SpinorField& f) {
  const auto n = static_cast<Eigen::Index>(f.first.size());
  Eigen::VectorXcd v(2 * n);
  v.head(n) = to_vector(f.first);
  v.tail(n) = to_vector(f.second);
  return v;
}

ScalarField scalar_from_vector(const Grid& g, const Eigen::VectorXcd& v) {
  require(static_cast<std::size_t>(v.size()) == g.size(), ErrorCode::invalid_input,
          "vector length does not match the grid");
  return ScalarField(g, std::span<const Complex>(v.data(), g.size()));
}

SpinorField spinor_from_vector(const Grid& g, const Eigen::VectorXcd& v) {
  require(static_cast<std::size_t>(v.size()) == 2 * g.size(), ErrorCode::invalid_input,
          "vector length does not match the grid");
  return SpinorField(ScalarField(g, std::span<const Complex>(v.data(), g.size())),
                     ScalarField(g, std::span<const Complex>(v.data() + g.size(), g.size())));
}

namespace {

template <class Assemble>
Eigen::VectorXcd crank_nicolson(Eigen::VectorXcd x, double s, double t, double dt, bool static_h,
                                Assemble&& assemble) {
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::invalid_parameter, "oracle dt must be positive");
  if (t == s) return x;
  const auto steps = static_cast<long>(std::ceil(std::abs(t - s) / dt - 1e-9));
  const double tau = (t - s) / static_cast<double>(steps);
  const Complex half(0.0, 0.5 * tau);
  const auto n = x.size();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  Eigen::MatrixXcd explicit_part;
  for (long i = 0; i < steps; ++i) {
    if (i == 0 || !static_h) {
      const Eigen::MatrixXcd h = assemble(s + (static_cast<double>(i) + 0.5) * tau);
      const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
      lu.compute(id + half * h);
      explicit_part = id - half * h;
    }
    x = lu.solve(explicit_part * x);
  }
  return x;
}

}  // namespace

ScalarField oracle_propagate(const ScalarHamiltonian& h, const ScalarField& initial, double s,
                             double t, double dt_oracle, OracleKinetic kind) {
  const Grid& g = initial.grid();
  require_dense(g.size());
  const Eigen::MatrixXd kinetic = dense_kinetic(g, kind);
  bool static_h = true;
  for (const auto& p : h.potentials) {
    p.validate();
    if (!p.spec.vanishes() && norm2(p.velocity) != 0.0) static_h = false;
  }
  auto assemble = [&](double time) {
    Eigen::MatrixXcd m = kinetic.cast<Complex>();
    for (const auto& p : h.potentials) {
      if (p.spec.vanishes()) continue;
      const RealBuffer v = sample_potential_values(p, time, g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        m(k, k) += v[i];
      }
    }
    return m;
  };
  return scalar_from_vector(g, crank_nicolson(to_vector(initial), s, t, dt_oracle, static_h, assemble));
}

SpinorField oracle_propagate(const MatrixHamiltonian& h, const SpinorField& initial, double s,
                             double t, double dt_oracle, OracleKinetic kind) {
  h.validate();
  const Grid& g = initial.grid();
  require_dense(2 * g.size());
  const Eigen::MatrixXd kinetic = dense_kinetic(g, kind);
  const auto n = static_cast<Eigen::Index>(g.size());
  bool static_h = h.stationary_frame || h.potentials.empty();
  auto assemble = [&](double time) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = kinetic.cast<Complex>();
    m.bottomRightCorner(n, n) = -kinetic.cast<Complex>();
    MatrixField v(g);
    double shift = 0.0;
    if (h.stationary_frame) {
      accumulate_stationary_matrix_potential(h.potentials.front(), g, v);
      shift = h.potentials.front().mu();
    } else {
      for (const auto& p : h.potentials) accumulate_matrix_potential(p, time, g, v);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) += shift + v.a11[i];
      m(i, n + i) += v.a12[i];
      m(n + i, i) += v.a21[i];
      m(n + i, n + i) += -shift + v.a22[i];
    }
    return m;
  };
  return spinor_from_vector(g, crank_nicolson(to_vector(initial), s, t, dt_oracle, static_h, assemble));
}

}  // namespace ctlab

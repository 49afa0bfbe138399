#include "ctlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ctlab/error.hpp"
#include "ctlab/fft.hpp"

namespace ctlab {

double BoundStateSet::gram_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < eigenfunctions.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const Complex g = inner(eigenfunctions[i], eigenfunctions[j]);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

ScalarField apply_hamiltonian(const RealBuffer& potential, const ScalarField& f) {
  const Grid& g = f.grid();
  require(potential.size() == g.size(), ErrorCode::invalid_input, "potential size mismatch");
  auto fft = fourier_for(g);
  const RealBuffer& symbol = kinetic_symbol(g);
  ScalarField out = f;
  fft->forward(out);
  for (std::size_t k = 0; k < g.size(); ++k) out[k] *= symbol[k];
  fft->inverse(out);
  for (std::size_t k = 0; k < g.size(); ++k) out[k] += potential[k] * f[k];
  return out;
}

Eigen::MatrixXd dense_scalar_hamiltonian(const PotentialSpec& spec, const Grid& grid,
                                         OracleKinetic kind) {
  spec.validate();
  Eigen::MatrixXd h = dense_kinetic(grid, kind);
  const RealBuffer v = sample_potential_values(MovingPotential{spec, {}, {}}, 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += v[i];
  return h;
}

namespace {

// (H - sigma) with a Fourier preconditioner (|k|^2/2 - sigma)^{-1}; H - sigma is
// positive definite because sigma < min V.
class ShiftedOperator {
 public:
  ShiftedOperator(const Grid& g, RealBuffer v, double sigma)
      : grid_(g), v_(std::move(v)), sigma_(sigma), fft_(fourier_for(g)), symbol_(kinetic_symbol(g)) {}

  ScalarField apply(const ScalarField& x) const {
    ScalarField y = apply_hamiltonian(v_, x);
    y.axpy(-sigma_, x);
    return y;
  }

  ScalarField precondition(const ScalarField& r) const {
    ScalarField z = r;
    fft_->forward(z);
    for (std::size_t k = 0; k < grid_.size(); ++k) z[k] /= symbol_[k] - sigma_;
    fft_->inverse(z);
    return z;
  }

  // Preconditioned conjugate gradients for (H - sigma) x = b.
  ScalarField solve(const ScalarField& b, double tol, int max_iter) const {
    ScalarField x(grid_);
    ScalarField r = b;
    ScalarField z = precondition(r);
    ScalarField p = z;
    double rz = inner(r, z).real();
    const double b_norm = l2_norm(b);
    if (b_norm == 0.0) return x;
    for (int it = 0; it < max_iter; ++it) {
      const ScalarField ap = apply(p);
      const double alpha = rz / inner(ap, p).real();
      x.axpy(alpha, p);
      r.axpy(-alpha, ap);
      if (l2_norm(r) <= tol * b_norm) return x;
      z = precondition(r);
      const double rz_next = inner(r, z).real();
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t k = 0; k < grid_.size(); ++k) p[k] = z[k] + beta * p[k];
    }
    fail(ErrorCode::solver_failure, "inner conjugate-gradient solve did not converge");
  }

  const RealBuffer& potential() const noexcept { return v_; }

 private:
  Grid grid_;
  RealBuffer v_;
  double sigma_;
  std::shared_ptr<const FourierTransform> fft_;
  const RealBuffer& symbol_;
};

void orthogonalize(ScalarField& w, const std::vector<ScalarField>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) w.axpy(-inner(w, q), q);
}

double rayleigh(const ShiftedOperator& op, const ScalarField& y, double* residual) {
  const ScalarField hy = apply_hamiltonian(op.potential(), y);
  const double lambda = inner(hy, y).real() / inner(y, y).real();
  ScalarField r = hy;
  r.axpy(-lambda, y);
  *residual = l2_norm(r) / l2_norm(y);
  return lambda;
}

double outside_mass(const ScalarField& f, const Vec3& center) {
  const Grid& g = f.grid();
  const double radius = 0.5 * g.half_length();
  double far = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double m = std::norm(f[i]);
    total += m;
    if (norm2(g.minimum_image(g.point(i) - center)) > radius * radius) far += m;
  }
  return total > 0.0 ? far / total : 0.0;
}

// Approximate solution of the correction equation
//   P (H - theta) P t = -r,  t orthogonal to q,
// where q = (eigenvectors below, current vector last) and P projects out q. The
// projected operator is positive on the complement, so preconditioned CG applies.
ScalarField jacobi_davidson_correction(const ShiftedOperator& op, const std::vector<ScalarField>& q, double theta) {
  const ScalarField& u = q.back();
  ScalarField r = apply_hamiltonian(op.potential(), u);
  r.axpy(-theta, u);
  r *= -1.0;
  orthogonalize(r, q);
  const Grid& g = u.grid();
  auto apply = [&](const ScalarField& x) {
    ScalarField y = apply_hamiltonian(op.potential(), x);
    y.axpy(-theta, x);
    orthogonalize(y, q);
    return y;
  };
  auto precondition = [&](const ScalarField& x) {
    ScalarField z = op.precondition(x);
    orthogonalize(z, q);
    return z;
  };
  ScalarField t(g);
  ScalarField z = precondition(r);
  ScalarField p = z;
  double rz = inner(r, z).real();
  const double r0 = l2_norm(r);
  if (r0 == 0.0) return t;
  for (int it = 0; it < 300; ++it) {
    const ScalarField ap = apply(p);
    const double pap = inner(ap, p).real();
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    t.axpy(alpha, p);
    r.axpy(-alpha, ap);
    if (l2_norm(r) <= 1e-6 * r0) break;
    z = precondition(r);
    const double rz_next = inner(r, z).real();
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < g.size(); ++k) p[k] = z[k] + beta * p[k];
  }
  return t;
}

}  // namespace

BoundStateSet bound_states(const PotentialSpec& spec, const Grid& grid, int k_max, double tol,
                           const LanczosOptions& options) {
  spec.validate();
  require(k_max >= 1, ErrorCode::invalid_parameter, "k_max must be at least 1");
  require(std::isfinite(tol) && tol > 0.0, ErrorCode::invalid_parameter, "tolerance must be positive");
  require(options.krylov_dim >= 4 && options.max_restarts >= 1, ErrorCode::invalid_parameter,
          "Lanczos budget too small");
  for (int a = grid.dim(); a < 3; ++a)
    require(spec.center[a] == 0.0, ErrorCode::invalid_parameter, "potential center outside grid dimension");
  require(spec.vanishes() || spec.width >= 2.0 * grid.spacing(), ErrorCode::invalid_parameter,
          "grid does not resolve the potential width (need width >= 2 h)");

  BoundStateSet result;
  RealBuffer v = sample_potential_values(MovingPotential{spec, {}, {}}, 0.0, grid);
  const double v_min = *std::min_element(v.begin(), v.end());
  if (spec.vanishes() || v_min >= 0.0) return result;  // H >= 0

  const double sigma = v_min - std::max(0.5 * std::abs(v_min), 1e-3);
  const ShiftedOperator op(grid, std::move(v), sigma);
  // Eigenvalues of (H - sigma)^{-1} above theta_cut are the wanted ones. The
  // band (-guard/2, 0) is not searched: anything there fails validation anyway
  // and box modes sitting just below 0 converge very slowly.
  const double lambda_cut = -std::max(tol, 0.5 * options.threshold_guard);
  const double theta_cut = 1.0 / (lambda_cut - sigma);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  const double envelope = 0.25 * grid.half_length();
  auto random_start = [&]() {
    ScalarField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r2 = norm2(grid.minimum_image(grid.point(i) - spec.center));
      f[i] = normal(rng) * std::exp(-r2 / (2.0 * envelope * envelope));
    }
    return f;
  };

  // Deflating against locked vectors caps the attainable residual of the rest
  // at roughly the locked residuals, so locking is looser than the target and
  // the polishing Rayleigh-Ritz below brings every vector down jointly.
  const double lock_tol = 10.0 * tol;
  std::vector<ScalarField> locked;
  std::vector<double> locked_theta;
  const std::size_t lock_limit = static_cast<std::size_t>(k_max) + 8;
  const auto m_max = static_cast<std::size_t>(options.krylov_dim);
  std::vector<ScalarField> q, z;  // orthonormal basis and its images under (H - sigma)^{-1}

  auto expand = [&](ScalarField v) {
    orthogonalize(v, locked);
    orthogonalize(v, q);
    const double nrm = l2_norm(v);
    if (nrm < 1e-10) return false;
    v *= 1.0 / nrm;
    z.push_back(op.solve(v, options.cg_tolerance, options.cg_max_iterations));
    q.push_back(std::move(v));
    return true;
  };

  expand(random_start());
  bool fresh = true;
  bool finished = false;
  std::vector<double> best_residuals;
  for (int cycle = 0; cycle < options.max_restarts && !finished; ++cycle) {
    while (q.size() < m_max) {
      if (!expand(z.back()) && !expand(random_start())) break;
    }
    // Rayleigh-Ritz for (H - sigma)^{-1} on span q.
    const auto m = static_cast<Eigen::Index>(q.size());
    Eigen::MatrixXcd proj(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        proj(i, j) = inner(z[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(i)]);
    proj = 0.5 * (proj + proj.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(proj);

    auto combine = [&](const std::vector<ScalarField>& basis, Eigen::Index col) {
      ScalarField out(grid);
      for (Eigen::Index l = 0; l < m; ++l)
        out.axpy(ritz.eigenvectors()(l, col), basis[static_cast<std::size_t>(l)]);
      return out;
    };

    std::vector<ScalarField> keep_q, keep_z;
    std::vector<double> keep_theta;
    int wanted = 0;
    best_residuals.clear();
    const std::size_t keep_limit = m_max / 2;
    struct Candidate {
      double theta, lambda, res;
      bool wanted;
    };
    std::vector<Candidate> cand(static_cast<std::size_t>(m));
    std::vector<ScalarField> ys;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double theta = ritz.eigenvalues()[i];
      ys.push_back(combine(q, i));
      double res = 0.0;
      const double lambda = theta > theta_cut ? rayleigh(op, ys.back(), &res) : 0.0;
      cand[static_cast<std::size_t>(i)] = {theta, lambda, res, theta > theta_cut && lambda < lambda_cut};
    }
    // A converged vector is locked only together with its near-degenerate
    // partners: locking one member early leaves its error in the other.
    auto lockable = [&](std::size_t i) {
      if (!cand[i].wanted || cand[i].res > lock_tol) return false;
      for (const auto& c : cand)
        if (c.wanted && c.res > lock_tol && std::abs(c.theta - cand[i].theta) <= 1e-2 * cand[i].theta) return false;
      return true;
    };
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      const auto ui = static_cast<std::size_t>(i);
      ScalarField& y = ys[ui];
      if (cand[ui].wanted) {
        ++wanted;
        best_residuals.push_back(cand[ui].res);
        if (lockable(ui)) {
          orthogonalize(y, locked);
          y *= 1.0 / l2_norm(y);
          locked.push_back(std::move(y));
          locked_theta.push_back(1.0 / (cand[ui].lambda - sigma));
          continue;
        }
      }
      if (keep_q.size() < keep_limit) {
        keep_theta.push_back(cand[ui].theta);
        keep_z.push_back(combine(z, i));
        keep_q.push_back(std::move(y));
      }
    }
    const int unconverged = static_cast<int>(best_residuals.size()) -
                            static_cast<int>(std::count_if(best_residuals.begin(), best_residuals.end(),
                                                           [&](double r) { return r <= lock_tol; }));
    if (locked.size() >= lock_limit) {
      finished = true;
      break;
    }
    if (unconverged == 0) {
      if (fresh && wanted == 0) {
        finished = true;
        break;
      }
      // Everything found so far has converged; look again from a new random start.
      q.clear();
      z.clear();
      expand(random_start());
      fresh = true;
      continue;
    }
    // Thick restart: keep the leading Ritz vectors, continue along the common
    // residual direction.
    q.clear();
    z.clear();
    // Images are updated alongside the vectors so each pair stays consistent:
    // locked vectors are eigenvectors of the inverse, kept ones carry their images.
    for (std::size_t i = 0; i < keep_q.size(); ++i) {
      ScalarField y = keep_q[i];
      ScalarField zy = keep_z[i];
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t l = 0; l < locked.size(); ++l) {
          const Complex c = inner(y, locked[l]);
          y.axpy(-c, locked[l]);
          zy.axpy(-c * locked_theta[l], locked[l]);
        }
        for (std::size_t l = 0; l < q.size(); ++l) {
          const Complex c = inner(y, q[l]);
          y.axpy(-c, q[l]);
          zy.axpy(-c, z[l]);
        }
      }
      const double nrm = l2_norm(y);
      if (nrm < 1e-10) continue;
      y *= 1.0 / nrm;
      zy *= 1.0 / nrm;
      q.push_back(std::move(y));
      z.push_back(std::move(zy));
    }
    if (q.empty()) {
      expand(random_start());
    } else {
      // In exact arithmetic all Ritz residuals are parallel; the largest one
      // carries that direction with the least round-off.
      ScalarField r(grid);
      double r_norm = -1.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        ScalarField ri = z[i];
        ri.axpy(-inner(z[i], q[i]).real(), q[i]);
        const double n = l2_norm(ri);
        if (n > r_norm) {
          r_norm = n;
          r = std::move(ri);
        }
      }
      if (!expand(std::move(r))) expand(random_start());
    }
    fresh = false;
  }
  if (!finished) {
    throw SolverFailure("bound-state Lanczos iteration exhausted its restart budget",
                        best_residuals);
  }

  // Polish the locked space: Rayleigh-Ritz with H on the locked vectors plus one
  // Jacobi-Davidson correction per vector, repeated until the residuals settle.
  // Shift-invert alone converges slowly for clusters far from the shift.
  const auto k = static_cast<Eigen::Index>(locked.size());
  if (k == 0) return result;
  std::vector<ScalarField> current = std::move(locked);
  std::vector<ScalarField> corrections;
  for (int round = 0; round < 5; ++round) {
    std::vector<ScalarField> basis = current;
    for (auto& t : corrections) {
      orthogonalize(t, basis);
      const double nrm = l2_norm(t);
      if (nrm < 1e-14) continue;
      t *= 1.0 / nrm;
      orthogonalize(t, basis);
      t *= 1.0 / l2_norm(t);
      basis.push_back(std::move(t));
    }
    corrections.clear();
    const auto nb = static_cast<Eigen::Index>(basis.size());
    std::vector<ScalarField> hy;
    for (const auto& y : basis) hy.push_back(apply_hamiltonian(op.potential(), y));
    Eigen::MatrixXcd mh(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < nb; ++j)
        mh(i, j) = inner(hy[static_cast<std::size_t>(j)], basis[static_cast<std::size_t>(i)]);
    mh = 0.5 * (mh + mh.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> rr(mh);
    double worst = 0.0;
    std::vector<double> thetas;
    for (Eigen::Index i = 0; i < k; ++i) {
      ScalarField u(grid);
      for (Eigen::Index l = 0; l < nb; ++l) u.axpy(rr.eigenvectors()(l, i), basis[static_cast<std::size_t>(l)]);
      u *= 1.0 / l2_norm(u);
      double res = 0.0;
      thetas.push_back(rayleigh(op, u, &res));
      worst = std::max(worst, res);
      current[static_cast<std::size_t>(i)] = std::move(u);
    }
    if (worst <= 0.1 * tol) break;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const std::vector<ScalarField> lower(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      corrections.push_back(jacobi_davidson_correction(op, lower, thetas[i]));
    }
  }

  std::vector<double> failed;
  for (auto& u : current) {
    // Fix the global phase so real eigenfunctions come out real.
    std::size_t peak = 0;
    for (std::size_t p = 1; p < u.size(); ++p)
      if (std::abs(u[p]) > std::abs(u[peak])) peak = p;
    u *= std::conj(u[peak]) / std::abs(u[peak]);
    u *= 1.0 / l2_norm(u);
    double res = 0.0;
    const double lambda = rayleigh(op, u, &res);
    if (outside_mass(u, spec.center) > options.delocalized_mass) {
      ++result.discarded_delocalized;
      continue;
    }
    if (lambda > -options.threshold_guard) result.near_threshold.push_back(lambda);
    if (res > tol) failed.push_back(res);
    if (result.size() < static_cast<std::size_t>(k_max)) {
      result.eigenvalues.push_back(lambda);
      result.residuals.push_back(res);
      result.eigenfunctions.push_back(std::move(u));
    }
  }
  if (!failed.empty()) throw SolverFailure("bound-state residuals above tolerance", failed);
  return result;
}

}  // namespace ctlab

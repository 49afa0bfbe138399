#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ctlab/error.hpp"
#include "ctlab/fft.hpp"
#include "ctlab/spectrum.hpp"

namespace ctlab {

namespace {

constexpr double kClusterRadius = 1e-4;
constexpr double kRealTolerance = 1e-8;

Eigen::MatrixXcd shifted(const Eigen::MatrixXcd& a, Complex omega) {
  Eigen::MatrixXcd b = a;
  b.diagonal().array() -= omega;
  return b;
}

double largest_singular_value(const Eigen::MatrixXcd& b) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(b);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

// Orthonormal basis of the numerical nullspace of m; singular values below
// `cut` count as zero, `ambiguous` is raised for values within a decade of it.
Eigen::MatrixXcd nullspace(const Eigen::MatrixXcd& m, double cut, Subspace& info) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const auto n = m.cols();
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = i < sv.size() ? sv[i] : 0.0;
    if (s < cut) null_cols.push_back(i);
    if (s > 0.1 * cut && s < 10.0 * cut) info.ambiguous = true;
  }
  // Report the smallest few singular values for diagnostics.
  for (Eigen::Index i = std::max<Eigen::Index>(0, sv.size() - 6); i < sv.size(); ++i)
    info.singular_values.push_back(sv[i]);
  Eigen::MatrixXcd basis(n, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t j = 0; j < null_cols.size(); ++j)
    basis.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(null_cols[j]);
  return basis;
}

}  // namespace

Subspace generalized_eigenspace(const Eigen::MatrixXcd& a, Complex omega, int order,
                                double relative_threshold) {
  require(a.rows() == a.cols() && a.rows() > 0, ErrorCode::invalid_input, "operator must be square");
  require(order >= 1 && order <= 3, ErrorCode::invalid_parameter, "order must be 1, 2 or 3");
  const Eigen::MatrixXcd b = shifted(a, omega);
  const double cut = relative_threshold * std::max(largest_singular_value(b), 1e-300);
  Subspace out;
  Eigen::MatrixXcd q = nullspace(b, cut, out);
  out.level_dimensions.push_back(static_cast<int>(q.cols()));
  for (int k = 2; k <= order; ++k) {
    // x orthogonal to q with (I - q q^*) b x = 0.
    const auto n = a.rows();
    const auto d = q.cols();
    Eigen::MatrixXcd stacked(n + d, n);
    stacked.topRows(n) = b - q * (q.adjoint() * b);
    stacked.bottomRows(d) = q.adjoint() * std::max(1.0, cut / relative_threshold);
    Eigen::MatrixXcd extra = nullspace(stacked, cut, out);
    if (extra.cols() == 0) {
      out.level_dimensions.resize(static_cast<std::size_t>(order), static_cast<int>(q.cols()));
      break;
    }
    Eigen::MatrixXcd merged(n, d + extra.cols());
    merged << q, extra;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(merged);
    q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, merged.cols());
    out.level_dimensions.push_back(static_cast<int>(q.cols()));
  }
  out.basis = q;
  out.dimension = static_cast<int>(q.cols());
  return out;
}

std::vector<std::vector<Complex>> cluster_eigenvalues(const std::vector<Complex>& values,
                                                      double radius) {
  // Single linkage via union-find over sorted real parts.
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n), parent(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = parent[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a].real() < values[b].real(); });
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const Complex va = values[order[a]], vb = values[order[b]];
      if (vb.real() - va.real() > radius) break;
      if (std::abs(va - vb) <= radius) parent[find(order[a])] = find(order[b]);
    }
  }
  std::vector<std::vector<Complex>> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t i = order[a];
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[r])].push_back(values[i]);
  }
  return clusters;
}

namespace {

Complex mean(const std::vector<Complex>& v) {
  Complex s = 0.0;
  for (auto x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<Complex> all_eigenvalues(const Eigen::MatrixXcd& a) {
  std::vector<Complex> out;
  if (a.imag().isZero(0.0)) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a.real(), false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  }
  return out;
}

Vec3 peak_point(const Eigen::VectorXcd& v, const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::Index best = 0;
  double best_val = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = std::norm(v[i]);
    if (v.size() == 2 * n) m += std::norm(v[n + i]);
    if (m > best_val) {
      best_val = m;
      best = i;
    }
  }
  return g.point(static_cast<std::size_t>(best));
}

}  // namespace

double spinor_outside_mass(const Eigen::VectorXcd& v, const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  require(v.size() == 2 * n || v.size() == n, ErrorCode::invalid_input, "vector does not match grid");
  const Vec3 c = peak_point(v, g);
  const double radius = 0.5 * g.half_length();
  double far = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = std::norm(v[i]);
    if (v.size() == 2 * n) m += std::norm(v[n + i]);
    total += m;
    if (norm2(g.minimum_image(g.point(static_cast<std::size_t>(i)) - c)) > radius * radius) far += m;
  }
  return total > 0.0 ? far / total : 0.0;
}

double spinor_decay_rate(const Eigen::VectorXcd& v, const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  require(v.size() == 2 * n || v.size() == n, ErrorCode::invalid_input, "vector does not match grid");
  const Vec3 c = peak_point(v, g);
  const int shells = 32;
  const double width = g.half_length() / shells;
  std::vector<double> env(shells, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = std::abs(v[i]);
    if (v.size() == 2 * n) m = std::max(m, std::abs(v[n + i]));
    const double r = std::sqrt(norm2(g.minimum_image(g.point(static_cast<std::size_t>(i)) - c)));
    const int s = static_cast<int>(r / width);
    if (s < shells) env[static_cast<std::size_t>(s)] = std::max(env[static_cast<std::size_t>(s)], m);
  }
  const double peak = *std::max_element(env.begin(), env.end());
  // Least squares of log env against r on the shells above the round-off floor.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int s = shells / 8; s < shells; ++s) {
    const double e = env[static_cast<std::size_t>(s)];
    if (e <= 1e-12 * peak) break;
    const double r = (s + 0.5) * width;
    sx += r;
    sy += std::log(e);
    sxx += r * r;
    sxy += r * std::log(e);
    ++count;
  }
  if (count < 3) return std::numeric_limits<double>::infinity();  // reached round-off quickly
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -slope;
}

Eigen::MatrixXcd MatrixSpectralData::bound_projection() const {
  if (right.cols() == 0) return Eigen::MatrixXcd::Zero(right.rows(), right.rows());
  return right * left.adjoint();
}

MatrixSpectralData matrix_spectrum(const Eigen::MatrixXcd& a, double mu, const Grid* grid) {
  require(a.rows() == a.cols() && a.rows() > 0, ErrorCode::invalid_input, "operator must be square");
  require(a.rows() <= 4096, ErrorCode::grid_too_large, "dense matrix spectrum limited to 2048 grid points");
  require(mu > 0.0, ErrorCode::invalid_parameter, "gap edge mu must be positive");
  MatrixSpectralData data;
  data.mu = mu;
  data.eigenvalues = all_eigenvalues(a);
  const Eigen::MatrixXcd a_adj = a.adjoint();

  for (const auto& cluster : cluster_eigenvalues(data.eigenvalues, kClusterRadius)) {
    const Complex omega = mean(cluster);
    if (std::abs(omega.real()) >= mu * (1.0 - 1e-10)) continue;
    EigenCluster ec;
    ec.omega = omega;
    ec.algebraic_multiplicity = static_cast<int>(cluster.size());
    // A non-real cluster mean has no Jordan analysis of interest; keep the
    // eigenvalue so the realness check can fail on it.
    const Complex target = std::abs(omega.imag()) <= kRealTolerance ? Complex(omega.real(), 0.0) : omega;
    const Subspace s3 = generalized_eigenspace(a, target, 3);
    ec.kernel_dimensions = s3.level_dimensions;
    ec.jordan_order = 3;
    for (int k = 1; k <= 2; ++k) {
      if (ec.kernel_dimensions[static_cast<std::size_t>(k - 1)] == ec.kernel_dimensions[static_cast<std::size_t>(k)]) {
        ec.jordan_order = k;
        break;
      }
    }
    ec.right = ec.jordan_order == 3 ? s3 : generalized_eigenspace(a, target, ec.jordan_order);
    ec.left = generalized_eigenspace(a_adj, std::conj(target), ec.jordan_order);
    if (ec.right.dimension == 0) continue;
    if (grid) {
      bool delocalized = false;
      for (Eigen::Index j = 0; j < ec.right.basis.cols(); ++j)
        delocalized = delocalized || spinor_outside_mass(ec.right.basis.col(j), *grid) > 0.25;
      if (delocalized) {
        ++data.box_modes;
        continue;
      }
    }
    data.gap.push_back(std::move(ec));
  }
  std::sort(data.gap.begin(), data.gap.end(),
            [](const EigenCluster& x, const EigenCluster& y) { return x.omega.real() < y.omega.real(); });

  Eigen::Index cols = 0;
  for (const auto& ec : data.gap) cols += ec.right.basis.cols();
  data.right.resize(a.rows(), cols);
  data.left.resize(a.rows(), cols);
  Eigen::Index at = 0;
  for (const auto& ec : data.gap) {
    const auto r = ec.right.basis.cols();
    const auto l = ec.left.basis.cols();
    require(r == l, ErrorCode::solver_failure, "left and right generalized eigenspaces differ in dimension");
    data.right.middleCols(at, r) = ec.right.basis;
    data.left.middleCols(at, l) = ec.left.basis;
    at += r;
  }
  if (cols > 0) {
    const Eigen::MatrixXcd gram = data.left.adjoint() * data.right;
    data.left = (data.left * gram.inverse().adjoint()).eval();
    const Eigen::MatrixXcd check = data.left.adjoint() * data.right;
    data.biorthogonality_defect =
        (check - Eigen::MatrixXcd::Identity(cols, cols)).cwiseAbs().maxCoeff();
  }
  return data;
}

MatrixSpectralData matrix_spectrum(const MatrixPotentialSpec& ms, const Grid& grid) {
  require(grid.size() <= 2048, ErrorCode::grid_too_large,
          "matrix spectrum needs a grid of at most 2048 points");
  return matrix_spectrum(dense_matrix_operator(ms, grid), ms.mu(), &grid);
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::unchecked: return "unchecked";
  }
  return "unchecked";
}

bool AdmissibilityReport::admissible() const noexcept {
  for (const auto& c : conditions)
    if (c.verdict == Verdict::fail) return false;
  return true;
}

const ConditionCheck* AdmissibilityReport::find(const std::string& id) const noexcept {
  for (const auto& c : conditions)
    if (c.id == id) return &c;
  return nullptr;
}

std::string AdmissibilityReport::to_json() const {
  nlohmann::json j;
  j["mu"] = mu;
  j["admissible"] = admissible();
  auto& gap = j["gap_eigenvalues"] = nlohmann::json::array();
  for (auto w : gap_eigenvalues) gap.push_back({w.real(), w.imag()});
  auto& conds = j["conditions"] = nlohmann::json::array();
  for (const auto& c : conditions)
    conds.push_back({{"id", c.id}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
  return j.dump(2);
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

std::string fmt(Complex z) {
  if (z.imag() == 0.0) return fmt(z.real());
  return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

void jordan_checks(const MatrixSpectralData& data, bool adjoint, AdmissibilityReport& report) {
  const std::string suffix = adjoint ? " (adjoint)" : "";
  ConditionCheck zero{"II.kernel_chain", Verdict::pass, ""};
  ConditionCheck nonzero{"II.semisimple_nonzero", Verdict::pass, ""};
  bool has_zero = false;
  for (const auto& ec : data.gap) {
    const auto& dims = ec.kernel_dimensions;
    const bool is_zero = std::abs(ec.omega) <= 1e-6;
    std::ostringstream os;
    os << "omega=" << fmt(ec.omega) << " dims ker^k=" << dims[0] << "," << dims[1] << "," << dims[2];
    if (is_zero) {
      has_zero = true;
      const bool ok = dims[0] < dims[1] && dims[1] == dims[2];
      zero.verdict = ok ? Verdict::pass : Verdict::fail;
      zero.detail = os.str();
    } else {
      if (dims[0] != dims[1]) nonzero.verdict = Verdict::fail;
      if (!nonzero.detail.empty()) nonzero.detail += "; ";
      nonzero.detail += os.str();
    }
  }
  if (!has_zero) zero.detail = "0 is not an eigenvalue; nothing to check";
  if (nonzero.detail.empty()) nonzero.detail = "no nonzero gap eigenvalues";
  if (adjoint) {
    zero.id = "V." + zero.id;
    nonzero.id = "V." + nonzero.id;
  }
  zero.detail += suffix;
  nonzero.detail += suffix;
  report.conditions.push_back(zero);
  report.conditions.push_back(nonzero);
}

void localization_check(const MatrixSpectralData& data, const Grid& grid, bool adjoint,
                        AdmissibilityReport& report) {
  ConditionCheck c{adjoint ? "V.IV.exponential_localization" : "IV.exponential_localization",
                   Verdict::pass, ""};
  double worst_rate = std::numeric_limits<double>::infinity();
  double worst_tail = 0.0;
  for (const auto& ec : data.gap) {
    const Eigen::MatrixXcd& basis = adjoint ? ec.left.basis : ec.right.basis;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      worst_rate = std::min(worst_rate, spinor_decay_rate(basis.col(j), grid));
      worst_tail = std::max(worst_tail, spinor_outside_mass(basis.col(j), grid));
    }
  }
  if (data.gap.empty()) {
    c.detail = "no gap eigenvectors";
  } else {
    const bool ok = worst_rate >= 1.0 / grid.half_length() && worst_tail <= 1e-4;
    c.verdict = ok ? Verdict::pass : Verdict::fail;
    c.detail = "min envelope decay rate " + fmt(worst_rate) + ", max mass beyond L/2 " + fmt(worst_tail);
  }
  report.conditions.push_back(c);
}

}  // namespace

AdmissibilityReport admissibility_report(const Eigen::MatrixXcd& a, double mu, const Grid& grid) {
  const MatrixSpectralData data = matrix_spectrum(a, mu, &grid);
  AdmissibilityReport report;
  report.mu = mu;
  for (const auto& ec : data.gap) report.gap_eigenvalues.push_back(ec.omega);

  double worst_imag = 0.0;
  for (const auto& cluster : cluster_eigenvalues(data.eigenvalues, kClusterRadius))
    worst_imag = std::max(worst_imag, std::abs(mean(cluster).imag()));
  report.conditions.push_back({"I.real_spectrum",
                               worst_imag <= kRealTolerance ? Verdict::pass : Verdict::fail,
                               "max |Im| over eigenvalue cluster means " + fmt(worst_imag)});

  // Surrogate for "no eigenvalues embedded in the essential spectrum": no
  // localized eigenvector with |Re omega| >= mu.
  int embedded = 0;
  {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, true);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (std::abs(es.eigenvalues()[i].real()) < mu) continue;
      if (spinor_outside_mass(es.eigenvectors().col(i), grid) < 1e-3) ++embedded;
    }
  }
  report.conditions.push_back({"I.no_embedded_eigenvalues", embedded == 0 ? Verdict::pass : Verdict::fail,
                               "localized eigenvectors beyond +-mu: " + std::to_string(embedded) +
                                   " (surrogate: localization of discrete eigenvectors)"});
  report.conditions.push_back({"I.thresholds_not_resonances", Verdict::unchecked,
                               "resonances at +-mu are not detected at this resolution"});
  report.conditions.push_back({"I.box_modes", Verdict::unchecked,
                               std::to_string(data.box_modes) +
                                   " delocalized gap eigenvalues treated as threshold box modes"});
  jordan_checks(data, false, report);
  report.conditions.push_back({"III.closed_ranges", Verdict::unchecked,
                               "vacuous for finite-dimensional discretizations"});
  localization_check(data, grid, false, report);
  // The adjoint's spectrum is the conjugate one, so realness carries over.
  report.conditions.push_back({"V.I.real_spectrum", worst_imag <= kRealTolerance ? Verdict::pass : Verdict::fail,
                               "spectrum of A^* is the conjugate of spec A"});
  MatrixSpectralData adjoint_data = matrix_spectrum(a.adjoint(), mu, &grid);
  jordan_checks(adjoint_data, true, report);
  localization_check(data, grid, true, report);
  return report;
}

AdmissibilityReport admissibility_report(const MatrixPotentialSpec& ms, const Grid& grid) {
  require(grid.size() <= 2048, ErrorCode::grid_too_large,
          "admissibility report needs a grid of at most 2048 points");
  return admissibility_report(dense_matrix_operator(ms, grid), ms.mu(), grid);
}

// ---------------------------------------------------------------------------
// Growth of e^{itA}

namespace {

struct CrankNicolson {
  CrankNicolson(const Eigen::MatrixXcd& a, double dt) {
    const auto n = a.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Complex half(0.0, 0.5 * dt);
    // d/dt psi = i A psi
    lu.compute(id - half * a);
    rhs = id + half * a;
  }
  void step(Eigen::VectorXcd& x) const { x = lu.solve(rhs * x); }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  Eigen::MatrixXcd rhs;
};

void linear_fit(GrowthSeries& g) {
  const auto n = static_cast<double>(g.times.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    sx += g.times[i];
    sy += g.max_norms[i];
    sxx += g.times[i] * g.times[i];
    sxy += g.times[i] * g.max_norms[i];
  }
  const double den = n * sxx - sx * sx;
  g.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  g.intercept = (sy - g.slope * sx) / n;
}

std::vector<std::vector<double>> run_norms(const Eigen::MatrixXcd& a, std::vector<Eigen::VectorXcd> probes,
                                           double horizon, const StabilityOptions& opt,
                                           std::vector<double>& times) {
  require(horizon > 0.0 && opt.dt > 0.0 && opt.sample_every > 0.0, ErrorCode::invalid_parameter,
          "horizon, dt and sampling interval must be positive");
  const CrankNicolson cn(a, opt.dt);
  const auto every = std::max<long>(1, std::lround(opt.sample_every / opt.dt));
  const auto steps = static_cast<long>(std::ceil(horizon / opt.dt - 1e-9));
  std::vector<std::vector<double>> norms(probes.size());
  times.clear();
  times.push_back(0.0);
  for (std::size_t p = 0; p < probes.size(); ++p) norms[p].push_back(probes[p].norm());
  for (long i = 1; i <= steps; ++i) {
    for (auto& v : probes) cn.step(v);
    if (i % every == 0 || i == steps) {
      times.push_back(static_cast<double>(i) * opt.dt);
      for (std::size_t p = 0; p < probes.size(); ++p) norms[p].push_back(probes[p].norm());
    }
  }
  return norms;
}

}  // namespace

GrowthSeries stability_probe(const Eigen::MatrixXcd& a, const MatrixSpectralData& data,
                             const Grid& grid, double horizon, int probes,
                             const StabilityOptions& opt) {
  require(probes >= 1, ErrorCode::invalid_parameter, "need at least one probe");
  const auto n = static_cast<Eigen::Index>(grid.size());
  require(a.rows() == 2 * n, ErrorCode::invalid_input, "operator does not match the grid");
  const Eigen::MatrixXcd pc = Eigen::MatrixXcd::Identity(2 * n, 2 * n) - data.bound_projection();
  auto fft = fourier_for(grid);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;

  std::vector<Eigen::VectorXcd> vecs;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXcd v(2 * n);
    for (int comp = 0; comp < 2; ++comp) {
      ScalarField f(grid);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double kk = norm2(grid.wavevector(k));
        f[k] = Complex(normal(rng), normal(rng)) * std::exp(-kk / (2.0 * opt.cutoff * opt.cutoff));
      }
      fft->inverse(f);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r2 = norm2(grid.point(i));
        v[comp * n + static_cast<Eigen::Index>(i)] =
            f[i] * std::exp(-r2 / (2.0 * opt.envelope_width * opt.envelope_width));
      }
    }
    v = pc * v;
    v /= v.norm();
    vecs.push_back(std::move(v));
  }
  GrowthSeries g;
  const auto norms = run_norms(a, std::move(vecs), horizon, opt, g.times);
  g.max_norms.assign(g.times.size(), 0.0);
  for (const auto& series : norms)
    for (std::size_t i = 0; i < series.size(); ++i) g.max_norms[i] = std::max(g.max_norms[i], series[i]);
  linear_fit(g);
  return g;
}

GrowthSeries stability_probe(const MatrixPotentialSpec& ms, const Grid& grid, double horizon,
                             int probes, const StabilityOptions& opt) {
  const Eigen::MatrixXcd a = dense_matrix_operator(ms, grid);
  const MatrixSpectralData data = matrix_spectrum(a, ms.mu(), &grid);
  return stability_probe(a, data, grid, horizon, probes, opt);
}

Eigen::VectorXcd generalized_kernel_seed(const Eigen::MatrixXcd& a) {
  const Subspace k1 = generalized_eigenspace(a, 0.0, 1);
  const Subspace k2 = generalized_eigenspace(a, 0.0, 2);
  if (k2.dimension <= k1.dimension) return {};
  Eigen::VectorXcd best;
  double best_norm = 0.0;
  for (Eigen::Index j = 0; j < k2.basis.cols(); ++j) {
    Eigen::VectorXcd v = k2.basis.col(j);
    if (k1.dimension > 0) v -= k1.basis * (k1.basis.adjoint() * v);
    if (v.norm() > best_norm) {
      best_norm = v.norm();
      best = v;
    }
  }
  return best / best_norm;
}

GrowthSeries track_norm(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& v, double horizon,
                        const StabilityOptions& opt) {
  require(v.size() == a.rows() && v.norm() > 0.0, ErrorCode::invalid_input, "probe vector invalid");
  GrowthSeries g;
  const auto norms = run_norms(a, {v / v.norm()}, horizon, opt, g.times);
  g.max_norms = norms.front();
  linear_fit(g);
  return g;
}

}  // namespace ctlab

#include <doctest.h>

#include <cmath>

#include "ctlab/error.hpp"
#include "ctlab/estimators.hpp"
#include "ctlab/oracle.hpp"
#include "ctlab/spectrum.hpp"

using namespace ctlab;

namespace {

// Linearization of the focusing cubic equation about its ground state with mu = 1/2:
// U = -2 sech^2, W = sech^2. Zero is the only gap eigenvalue, with the phase and
// translation chains giving dim ker A = 2 < dim ker A^2 = 4.
MatrixPotentialSpec soliton_linearization() {
  MatrixPotentialSpec ms;
  ms.u_profile = {PotentialFamily::sech_squared, -2.0, 1.0, {}};
  ms.w_profile = {PotentialFamily::sech_squared, 1.0, 1.0, {}};
  ms.alpha = 1.0;
  return ms;
}

Eigen::MatrixXcd similar(const Eigen::MatrixXcd& j) {
  const auto n = j.rows();
  Eigen::MatrixXcd s(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      s(r, c) = Complex(std::cos(1.3 * r + 0.7 * c), 0.2 * std::sin(r - 2.0 * c)) + (r == c ? 2.0 : 0.0);
  return s * j * s.inverse();
}

}  // namespace

TEST_CASE("soliton linearization is admissible with a size-two zero chain") {
  Grid g(1, 128, 16.0);
  const MatrixPotentialSpec ms = soliton_linearization();
  const AdmissibilityReport rep = admissibility_report(ms, g);
  CHECK(rep.admissible());
  REQUIRE(rep.gap_eigenvalues.size() == 1);
  CHECK(std::abs(rep.gap_eigenvalues.front()) < 1e-8);
  for (const char* id : {"I.real_spectrum", "II.kernel_chain", "IV.exponential_localization", "V.II.kernel_chain"}) {
    INFO(id);
    const ConditionCheck* c = rep.find(id);
    REQUIRE(c != nullptr);
    CHECK(c->verdict == Verdict::pass);
  }
  CHECK(rep.find("III.closed_ranges")->verdict == Verdict::unchecked);

  const MatrixSpectralData data = matrix_spectrum(ms, g);
  REQUIRE(data.gap.size() == 1);
  CHECK(data.gap.front().kernel_dimensions == std::vector<int>{2, 4, 4});
  CHECK(data.gap.front().jordan_order == 2);
  CHECK(data.gap.front().algebraic_multiplicity == 4);
  for (const Complex& z : data.eigenvalues) CHECK(std::abs(z.imag()) < 1e-6);
}

TEST_CASE("gap projection is an oblique projection onto the generalized kernel") {
  Grid g(1, 64, 12.0);
  const MatrixPotentialSpec ms = soliton_linearization();
  const MatrixSpectralData data = matrix_spectrum(ms, g);
  const Eigen::MatrixXcd p = data.bound_projection();
  const Eigen::MatrixXcd a = dense_matrix_operator(ms, g);
  CHECK(data.biorthogonality_defect < 1e-8);
  CHECK((p * p - p).norm() < 1e-8 * p.norm());
  // P_b commutes with A and A^2 vanishes on its range.
  CHECK((a * p - p * a).norm() < 1e-6 * a.norm());
  CHECK((a * a * p).norm() < 1e-6 * a.norm());
}

TEST_CASE("hand-built Jordan operator: kernel dimensions 1 < 2 = 2") {
  Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(6, 6);
  j(0, 1) = 1.0;
  j(2, 2) = 0.3;
  j(3, 3) = -0.4;
  j(4, 4) = 2.0;
  j(5, 5) = -2.0;
  const MatrixSpectralData data = matrix_spectrum(similar(j), 1.0);
  REQUIRE(data.gap.size() == 3);
  int zero_clusters = 0;
  for (const auto& ec : data.gap) {
    CHECK(std::abs(ec.omega.imag()) < 1e-8);
    if (std::abs(ec.omega) < 1e-6) {
      ++zero_clusters;
      CHECK(ec.kernel_dimensions == std::vector<int>{1, 2, 2});
      CHECK(ec.algebraic_multiplicity == 2);
      CHECK(ec.jordan_order == 2);
    } else {
      CHECK(ec.kernel_dimensions == std::vector<int>{1, 1, 1});
    }
  }
  CHECK(zero_clusters == 1);
}

TEST_CASE("generalized kernel seed lies in ker A^2 but not ker A") {
  Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(4, 4);
  j(0, 1) = 1.0;
  j(2, 2) = 1.0;
  j(3, 3) = -1.5;
  const Eigen::MatrixXcd a = similar(j);
  const Eigen::VectorXcd v = generalized_kernel_seed(a);
  REQUIRE(v.size() == 4);
  CHECK(v.norm() == doctest::Approx(1.0));
  CHECK((a * a * v).norm() < 1e-10);
  CHECK((a * v).norm() > 1e-3);
  // Semisimple zero: no seed.
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  CHECK(generalized_kernel_seed(similar(d)).size() == 0);
}

TEST_CASE("strong off-diagonal coupling produces complex spectrum and fails admissibility") {
  Grid g(1, 64, 12.0);
  MatrixPotentialSpec ms;
  ms.w_profile = {PotentialFamily::gaussian, 3.0, 1.0, {}};
  ms.alpha = 1.0;
  const AdmissibilityReport rep = admissibility_report(ms, g);
  CHECK_FALSE(rep.admissible());
  CHECK(rep.find("I.real_spectrum")->verdict == Verdict::fail);
}

TEST_CASE("growth: bounded on the continuous part, linear from the generalized kernel") {
  Grid g(1, 64, 12.0);
  const MatrixPotentialSpec ms = soliton_linearization();
  StabilityOptions opt;
  opt.dt = 0.1;
  const GrowthSeries st = stability_probe(ms, g, 40.0, 3, opt);
  CHECK(std::abs(st.slope) <= 1e-3);
  const Eigen::MatrixXcd a = dense_matrix_operator(ms, g);
  const GrowthSeries lin = track_norm(a, generalized_kernel_seed(a), 40.0, opt);
  MixedNormSeries series;
  series.times = lin.times;
  series.values = lin.max_norms;
  const DecayFit fit = decay_fit(series, 4.0, 40.0);
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("dense matrix analysis refuses large grids") {
  Grid g(2, 64, 10.0);
  CHECK_THROWS_AS(matrix_spectrum(soliton_linearization(), g), Error);
  CHECK_THROWS_AS(admissibility_report(soliton_linearization(), g), Error);
}

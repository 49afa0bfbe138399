#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "ctlab/error.hpp"
#include "ctlab/fft.hpp"
#include "ctlab/oracle.hpp"
#include "ctlab/propagator.hpp"
#include "gen.hpp"

using namespace ctlab;

namespace {

double rel_error(const ScalarField& a, const ScalarField& b) { return l2_norm(a - b) / l2_norm(b); }

// exp(-|x|^2/(2a^2)) evolved by e^{it Delta/2}: (1 + it/a^2)^{-n/2} exp(-|x|^2 / (2 a^2 (1 + it/a^2))).
ScalarField spreading_gaussian(const Grid& g, double a, double t) {
  const Complex z(1.0, t / (a * a));
  return ScalarField::from_function(g, [&](const Vec3& x) {
    return std::pow(z, -0.5 * g.dim()) * std::exp(-0.5 * norm2(x) / (a * a * z));
  });
}

StepperConfig stepper(double dt) {
  StepperConfig c;
  c.dt = dt;
  c.keep_fields = false;
  c.boundary_mass_guard = 1.0;
  return c;
}

ScalarHamiltonian well(double amplitude, double width, Vec3 velocity = {0.0, 0.0, 0.0}) {
  MovingPotential mp;
  mp.spec = {PotentialFamily::gaussian, amplitude, width, {}};
  mp.velocity = velocity;
  return {{mp}};
}

}  // namespace

TEST_CASE("free flow matches the spreading Gaussian") {
  for (int dim : {1, 2}) {
    Grid g(dim, 256, 24.0);
    const ScalarField f0 = spreading_gaussian(g, 1.5, 0.0);
    for (double t : {0.5, 2.0, -1.0}) {
      CHECK(rel_error(free_propagate(f0, t), spreading_gaussian(g, 1.5, t)) < 1e-12);
    }
  }
}

TEST_CASE("free propagation through the stepper is the exact free flow") {
  Grid g(1, 128, 20.0);
  const ScalarField f0 = spreading_gaussian(g, 1.5, 0.0);
  const PropagatorTrace tr = propagate({}, f0, 0.0, 2.0, stepper(0.3));
  CHECK(rel_error(tr.final_state, spreading_gaussian(g, 1.5, 2.0)) < 1e-12);
}

TEST_CASE("schedule: snapshots, shortened last step, observer") {
  Grid g(1, 32, 10.0);
  const ScalarField f0 = gaussian_packet(g, {0.0, 0.0, 0.0}, 1.0, {0.0, 0.0, 0.0});
  StepperConfig c = stepper(0.1);
  c.snapshot_every = 3;
  c.keep_fields = true;
  std::vector<double> seen;
  const PropagatorTrace tr = propagate(well(-1.0, 1.0), f0, 0.0, 1.05, c,
                                       [&](double t, std::span<const ScalarField>) { seen.push_back(t); });
  // 11 steps: snapshots after steps 3, 6, 9 and the final (shortened) one.
  REQUIRE(tr.times.size() == 5);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times[1] == doctest::Approx(0.3));
  CHECK(tr.times.back() == doctest::Approx(1.05));
  CHECK(seen == tr.times);
  CHECK(tr.fields.size() == tr.times.size());
  CHECK(rel_error(tr.fields.back(), tr.final_state) == 0.0);
}

TEST_CASE("property: Strang steps are unitary and reversible") {
  gen::Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    Grid g(gen::integer(rng, 1, 2), 64, 16.0);
    const ScalarField f0 = gen::packet(g, rng);
    ScalarHamiltonian h = well(gen::uniform(rng, -2.0, 2.0), gen::uniform(rng, 0.5, 2.0),
                               gen::vec(rng, g.dim(), -0.5, 0.5));
    // A whole number of steps, so the backward schedule retraces the forward one.
    const StepperConfig c = stepper(gen::uniform(rng, 0.01, 0.1));
    const double t = c.dt * gen::integer(rng, 5, 40);
    const PropagatorTrace fw = propagate(h, f0, 0.0, t, c);
    INFO("trial " << trial);
    CHECK(fw.max_norm_drift < 1e-12);
    const PropagatorTrace bw = propagate(h, fw.final_state, t, 0.0, c);
    CHECK(rel_error(bw.final_state, f0) < 1e-11);
  }
}

TEST_CASE("batch propagation equals individual runs") {
  gen::Rng rng(4);
  Grid g(2, 32, 10.0);
  std::vector<ScalarField> batch{gen::packet(g, rng), gen::packet(g, rng), gen::packet(g, rng)};
  const ScalarHamiltonian h = well(-1.0, 1.2, {0.2, 0.0, 0.0});
  std::vector<ScalarField> finals;
  propagate_batch(h, batch, 0.0, 1.0, stepper(0.05), {}, nullptr, &finals);
  REQUIRE(finals.size() == 3);
  for (int j = 0; j < 3; ++j) CHECK(rel_error(finals[j], propagate(h, batch[j], 0.0, 1.0, stepper(0.05)).final_state) < 1e-14);
}

TEST_CASE("second-order convergence against the dense oracle") {
  Grid g(1, 128, 16.0);
  const ScalarField f0 = gaussian_packet(g, {1.0, 0.0, 0.0}, 1.0, {0.5, 0.0, 0.0});
  const ScalarHamiltonian h = well(-2.0, 1.0, {0.3, 0.0, 0.0});
  const ScalarField ref = oracle_propagate(h, f0, 0.0, 1.0, 1e-4);
  const double e1 = rel_error(propagate(h, f0, 0.0, 1.0, stepper(0.02)).final_state, ref);
  const double e2 = rel_error(propagate(h, f0, 0.0, 1.0, stepper(0.01)).final_state, ref);
  CHECK(e2 < 1e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("Duhamel source against the per-mode closed form") {
  // i psi_t = -Delta/2 psi + e^{-i w t} phi: each Fourier mode with lambda = |k|^2/2 obeys
  // psi_k(t) = e^{-i lambda t} psi_k(0) - phi_k (e^{-i w t} - e^{-i lambda t}) / (lambda - w).
  Grid g(1, 128, 20.0);
  const double w = -1.0;
  const ScalarField psi0 = gaussian_packet(g, {-2.0, 0.0, 0.0}, 1.5, {0.0, 0.0, 0.0});
  const ScalarField phi = gaussian_packet(g, {2.0, 0.0, 0.0}, 1.0, {0.0, 0.0, 0.0});
  SourceTerm src;
  src.evaluator = [&](double t, const Grid&) { return std::polar(1.0, -w * t) * phi; };
  const double T = 1.5;
  ScalarField a = psi0, b = phi;
  auto fft = fourier_for(g);
  fft->forward(a);
  fft->forward(b);
  const RealBuffer& lambda = kinetic_symbol(g);
  ScalarField exact(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex el = std::polar(1.0, -lambda[i] * T);
    exact[i] = el * a[i] - b[i] * (std::polar(1.0, -w * T) - el) / (lambda[i] - w);
  }
  fft->inverse(exact);
  const double e1 = rel_error(propagate_with_source({}, psi0, src, 0.0, T, stepper(0.01)).final_state, exact);
  const double e2 = rel_error(propagate_with_source({}, psi0, src, 0.0, T, stepper(0.005)).final_state, exact);
  CHECK(e2 < 1e-5);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("property: closed-form 2x2 exponential matches the Pade exponential") {
  gen::Rng rng(12);
  auto check = [](const Complex m[4], double tau) {
    Eigen::Matrix2cd a;
    a << m[0], m[1], m[2], m[3];
    const Eigen::Matrix2cd ref = (Complex(0.0, -tau) * a).exp();
    Complex out[4];
    matrix_exponential_2x2(m, tau, out);
    for (int k = 0; k < 4; ++k) REQUIRE(std::abs(out[k] - ref(k / 2, k % 2)) < 1e-13 * std::max(1.0, ref.norm()));
  };
  for (int trial = 0; trial < 200; ++trial) {
    Complex m[4];
    for (auto& z : m) z = Complex(gen::uniform(rng, -2.0, 2.0), gen::uniform(rng, -2.0, 2.0));
    check(m, gen::uniform(rng, -0.5, 0.5));
  }
  // Coalescing eigenvalues: U^2 = W^2 gives a nilpotent traceless part.
  for (double eps : {0.0, 1e-9, 1e-6}) {
    const Complex m[4] = {1.0, -(1.0 + eps), 1.0, -1.0};
    check(m, 0.3);
  }
}

TEST_CASE("matrix flow conserves the indefinite charge") {
  Grid g(1, 128, 20.0);
  MatrixPotentialSpec ms;
  ms.u_profile = {PotentialFamily::gaussian, -1.0, 1.0, {}};
  ms.w_profile = {PotentialFamily::gaussian, 0.6, 1.0, {}};
  ms.alpha = 1.0;
  ms.velocity = {0.4, 0.0, 0.0};
  MatrixHamiltonian h{{ms}, false};
  const SpinorField psi(gaussian_packet(g, {0.0, 0.0, 0.0}, 1.5, {0.2, 0.0, 0.0}),
                        0.5 * gaussian_packet(g, {1.0, 0.0, 0.0}, 1.0, {0.0, 0.0, 0.0}));
  StepperConfig c = stepper(0.01);
  const SpinorTrace tr = matrix_propagate(h, psi, 0.0, 2.0, c);
  CHECK(tr.max_charge_drift / 2.0 < 1e-8);
  const SpinorTrace back = matrix_propagate(h, tr.final_state, 2.0, 0.0, c);
  SpinorField d = back.final_state;
  d.first -= psi.first;
  d.second -= psi.second;
  CHECK(l2_norm(d) < 1e-9 * l2_norm(psi));
}

TEST_CASE("stepper validation") {
  StepperConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.dt = 0.1;
  c.snapshot_every = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  Grid g(1, 16, 5.0);
  CHECK_THROWS_AS(propagate({}, ScalarField(g), 0.0, std::nan(""), stepper(0.1)), Error);
  MovingPotential off;
  off.spec = {PotentialFamily::gaussian, -1.0, 1.0, {0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(propagate({{off}}, ScalarField(g), 0.0, 1.0, stepper(0.1)), Error);
}

TEST_CASE("boundary-mass guard flags the trace") {
  Grid g(1, 64, 10.0);
  const ScalarField f0 = gaussian_packet(g, {0.0, 0.0, 0.0}, 0.5, {4.0, 0.0, 0.0});
  StepperConfig c = stepper(0.05);
  c.boundary_mass_guard = 1e-6;
  const PropagatorTrace tr = propagate({}, f0, 0.0, 3.0, c);
  CHECK_FALSE(tr.valid);
  REQUIRE(tr.flags.size() == 1);
  CHECK(tr.flags.front() == "boundary-mass");
}

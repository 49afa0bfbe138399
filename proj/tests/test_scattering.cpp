#include <doctest.h>

#include <cmath>

#include "ctlab/error.hpp"
#include "ctlab/scattering.hpp"
#include "ctlab/symmetries.hpp"
#include "gen.hpp"

using namespace ctlab;

namespace {

MovingPotential well(double amplitude, double x0, double v) {
  MovingPotential mp;
  mp.spec = {PotentialFamily::gaussian, amplitude, 1.0, {}};
  mp.offset = {x0, 0.0, 0.0};
  mp.velocity = {v, 0.0, 0.0};
  return mp;
}

WaveOperatorConfig config(double horizon) {
  WaveOperatorConfig c;
  c.horizon = horizon;
  c.tail_tolerance = 1e-3;
  c.stepper.dt = 0.02;
  c.stepper.keep_fields = false;
  c.stepper.boundary_mass_guard = 1.0;
  return c;
}

std::vector<BoundStateSet> bound_sets(const ScalarHamiltonian& h, const Grid& g) {
  std::vector<BoundStateSet> out;
  for (const auto& mp : h.potentials) out.push_back(bound_states(mp.spec, g, 4, 1e-9));
  return out;
}

// Orthogonal projection onto the span of an orthonormal family.
ScalarField project(const ScalarField& f, const std::vector<ScalarField>& basis) {
  ScalarField out(f.grid());
  for (const auto& b : basis) out.axpy(inner(f, b), b);
  return out;
}

}  // namespace

TEST_CASE("single stationary potential: the channel is the bound-state space") {
  Grid g(1, 128, 20.0);
  const ScalarHamiltonian h{{well(-2.0, 0.0, 0.0)}};
  const auto bound = bound_sets(h, g);
  REQUIRE(bound[0].size() >= 2);
  const ChannelBasis cb = channel_basis(3.0, h, bound, config(10.0));
  REQUIRE(cb.u_tilde.size() == bound[0].size());
  CHECK(cb.w_tilde.empty());
  CHECK(cb.gram_defect() < 1e-12);
  gen::Rng rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    const ScalarField f = gen::packet(g, rng);
    CHECK(l2_norm(project(f, cb.u_tilde) - project(f, bound[0].eigenfunctions)) < 1e-8);
  }
}

TEST_CASE("single moving potential: the channel rides along the trajectory") {
  Grid g(1, 256, 30.0);
  const ScalarHamiltonian h{{well(-2.0, -4.0, 0.5)}};
  const auto bound = bound_sets(h, g);
  const double s = 4.0;
  const ChannelBasis cb = channel_basis(s, h, bound, config(12.0));
  REQUIRE(cb.u_tilde.size() == bound[0].size());
  for (const auto& u : cb.u_tilde) {
    const auto content = transported_bound_content(u, s, h, bound);
    REQUIRE(content.size() == 1);
    CHECK(content[0] == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("two separating wells: cross overlaps, tails and idempotent projections") {
  Grid g(1, 256, 40.0);
  const ScalarHamiltonian h{{well(-0.6, 0.0, 0.0), well(-0.6, 8.0, 0.8)}};
  const auto bound = bound_sets(h, g);
  REQUIRE(bound[0].size() == 1);
  REQUIRE(bound[1].size() == 1);
  const ChannelBasis cb = channel_basis(0.0, h, bound, config(30.0));
  REQUIRE(cb.u_tilde.size() == 1);
  REQUIRE(cb.w_tilde.size() == 1);
  CHECK(cb.max_raw_overlap() < 5e-3);
  CHECK(cb.gram_defect() < 1e-12);
  for (double tail : cb.tails) CHECK(tail <= 1e-3);

  gen::Rng rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    const ScalarField f = gen::packet(g, rng);
    const ScalarField pc = project_scattering(f, cb);
    CHECK(l2_norm(project_scattering(pc, cb) - pc) < 1e-12 * l2_norm(f));
    const auto [pu, pw] = project_channels(pc, cb);
    CHECK(l2_norm(pu) < 1e-12);
    CHECK(l2_norm(pw) < 1e-12);
    // Orthogonal decomposition: Pythagoras over the three pieces.
    const auto [fu, fw] = project_channels(f, cb);
    const double sum = std::pow(l2_norm(pc), 2) + std::pow(l2_norm(fu), 2) + std::pow(l2_norm(fw), 2);
    CHECK(sum == doctest::Approx(std::pow(l2_norm(f), 2)).epsilon(1e-10));
  }
}

TEST_CASE("scattering data shed no mass into the moving bound states") {
  Grid g(1, 256, 40.0);
  const ScalarHamiltonian h{{well(-0.6, 0.0, 0.0), well(-0.6, 8.0, 0.8)}};
  const auto bound = bound_sets(h, g);
  const ChannelBasis cb = channel_basis(0.0, h, bound, config(30.0));
  const ScalarField f = project_scattering(gaussian_packet(g, {2.0, 0.0, 0.0}, 2.0, {0.3, 0.0, 0.0}), cb);
  StepperConfig sc = config(30.0).stepper;
  sc.snapshot_every = 50;
  const MixedNormSeries ac = ac_residual(f, 0.0, 15.0, h, bound, sc);
  REQUIRE(ac.size() >= 3);
  for (double v : ac.values) CHECK(v < 5e-3 * l2_norm(f));
  // A bound-state datum of well 1 keeps (almost) all of its content.
  const ScalarField b = cb.u_tilde.front();
  const MixedNormSeries stay = ac_residual(b, 0.0, 15.0, h, bound, sc);
  CHECK(stay.values.back() > 0.99);
}

TEST_CASE("short horizon raises HorizonTooSmall with a suggestion") {
  Grid g(1, 256, 40.0);
  const ScalarHamiltonian h{{well(-1.0, 0.0, 0.0), well(-1.0, 3.0, 0.5)}};
  const auto bound = bound_sets(h, g);
  WaveOperatorConfig c = config(2.0);
  c.tail_tolerance = 1e-8;
  try {
    (void)channel_basis(0.0, h, bound, c);
    FAIL("expected HorizonTooSmall");
  } catch (const HorizonTooSmall& e) {
    CHECK(e.code() == ErrorCode::horizon_too_small);
    CHECK(e.suggested_horizon() > c.horizon);
  }
}

TEST_CASE("anchors are served by one sweep and agree with single-anchor calls") {
  Grid g(1, 256, 40.0);
  const ScalarHamiltonian h{{well(-0.6, 0.0, 0.0), well(-0.6, 8.0, 0.8)}};
  const auto bound = bound_sets(h, g);
  const WaveOperatorConfig c = config(30.0);
  const auto many = channel_bases({0.0, 2.0, 5.0}, h, bound, c);
  REQUIRE(many.size() == 3);
  const ChannelBasis one = channel_basis(2.0, h, bound, c);
  CHECK(many[1].anchor_time == 2.0);
  gen::Rng rng(2);
  const ScalarField f = gen::packet(g, rng);
  CHECK(l2_norm(project_scattering(f, many[1]) - project_scattering(f, one)) < 1e-8);
  CHECK_THROWS_AS(channel_bases({0.0, 40.0}, h, bound, c), Error);
}

TEST_CASE("matrix channel: frame maps are inverse and the scattering projection kills the channel") {
  Grid g(1, 64, 12.0);
  MatrixPotentialSpec ms;
  ms.u_profile = {PotentialFamily::sech_squared, -2.0, 1.0, {}};
  ms.w_profile = {PotentialFamily::sech_squared, 1.0, 1.0, {}};
  ms.alpha = 1.0;
  ms.gamma = 0.3;
  ms.velocity = {0.4, 0.0, 0.0};
  gen::Rng rng(6);
  const SpinorField psi(gen::noise(g, rng), gen::noise(g, rng));
  const SpinorField back = stationary_to_lab(lab_to_stationary(psi, ms, 1.7), ms, 1.7);
  CHECK(l2_norm(back.first - psi.first) < 1e-12 * l2_norm(psi));
  CHECK(l2_norm(back.second - psi.second) < 1e-12 * l2_norm(psi));

  const std::vector<MatrixSpectralData> spectra{matrix_spectrum(ms, g)};
  const MatrixHamiltonian h{{ms}, false};
  const SpinorChannelBasis cb = matrix_channel_basis(0.5, h, spectra, g, config(4.0));
  CHECK(cb.size() == 4);
  CHECK(std::isfinite(cb.biorthogonality_defect));
  // Channel vectors are annihilated by the scattering projection.
  for (const auto& r : cb.right.front()) {
    const SpinorField pr = project_matrix_scattering(r, cb);
    CHECK(l2_norm(pr.first) + l2_norm(pr.second) < 1e-8 * l2_norm(r));
  }
  const SpinorField f(gaussian_packet(g, {1.0, 0.0, 0.0}, 1.5, {0.3, 0.0, 0.0}),
                      gaussian_packet(g, {-1.0, 0.0, 0.0}, 1.0, {0.0, 0.0, 0.0}));
  const SpinorField pf = project_matrix_scattering(f, cb);
  const SpinorField ppf = project_matrix_scattering(pf, cb);
  CHECK(l2_norm(ppf.first - pf.first) + l2_norm(ppf.second - pf.second) < 1e-6 * l2_norm(f));
}

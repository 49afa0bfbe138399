#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctlab/error.hpp"
#include "ctlab/grid.hpp"
#include "gen.hpp"

using namespace ctlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integer cyclic shift of the sample array.
ScalarField roll(const ScalarField& f, std::array<int, 3> s) {
  const Grid& g = f.grid();
  const int n = g.points_per_axis();
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto m = g.multi_index(i);
    std::size_t j = 0;
    for (int a = 0; a < g.dim(); ++a) j = j * n + static_cast<std::size_t>(((m[a] + s[a]) % n + n) % n);
    out[j] = f[i];
  }
  return out;
}

}  // namespace

TEST_CASE("grid geometry") {
  Grid g(2, 16, 4.0);
  CHECK(g.size() == 256);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.coordinate(0) == -4.0);
  CHECK(g.coordinate(8) == doctest::Approx(0.0));
  CHECK(g.nyquist() == doctest::Approx(kPi / 0.5));
  CHECK(g.wavenumber(1) == doctest::Approx(kPi / 4.0));
  CHECK(g.wavenumber(15) == doctest::Approx(-kPi / 4.0));
  CHECK(g.cell_volume() == doctest::Approx(0.25));
  const Vec3 d = g.minimum_image({7.0, -7.5, 0.0});
  CHECK(d[0] == doctest::Approx(-1.0));
  CHECK(d[1] == doctest::Approx(0.5));
}

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid(4, 16, 1.0), Error);
  CHECK_THROWS_AS(Grid(1, 12, 1.0), Error);
  CHECK_THROWS_AS(Grid(1, 4, 1.0), Error);
  CHECK_THROWS_AS(Grid(1, 16, 0.0), Error);
  CHECK_THROWS_AS(Grid(1, 16, std::nan("")), Error);
}

TEST_CASE("Gaussian Lebesgue norms match closed forms") {
  // ||exp(-|x|^2/(2a^2))||_p^p = (2 pi a^2 / p)^{n/2}; lattice sums of a
  // well-resolved Gaussian agree with the integral to round-off.
  const double a = 2.0;
  for (int dim : {1, 2, 3}) {
    Grid g(dim, dim == 3 ? 64 : 128, 16.0);
    ScalarField f = ScalarField::from_function(g, [&](const Vec3& x) { return std::exp(-0.5 * norm2(x) / (a * a)); });
    for (double p : {1.0, 2.0, 3.0, 4.0, 6.0, 10.0 / 3.0}) {
      const double exact = std::pow(std::pow(2.0 * kPi * a * a / p, 0.5 * dim), 1.0 / p);
      CHECK(lp_norm(f, p) == doctest::Approx(exact).epsilon(1e-11));
    }
    CHECK(lp_norm(f, kInf) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("lp_norm rejects p < 1") {
  Grid g(1, 16, 1.0);
  ScalarField f(g);
  CHECK_THROWS_AS(lp_norm(f, 0.5), Error);
  CHECK(lp_norm(f, 3.0) == 0.0);
}

TEST_CASE("property: lattice shifts are isometries for every p") {
  gen::Rng rng(20251016);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = gen::integer(rng, 1, 3);
    Grid g(dim, 16, gen::uniform(rng, 1.0, 10.0));
    const ScalarField f = gen::noise(g, rng);
    const std::array<int, 3> s{gen::integer(rng, -20, 20), gen::integer(rng, -20, 20), gen::integer(rng, -20, 20)};
    const ScalarField h = roll(f, s);
    for (double p : {1.0, 2.0, 6.0, gen::uniform(rng, 1.0, 8.0), kInf}) {
      INFO("trial " << trial << " p " << p);
      CHECK(lp_norm(h, p) == doctest::Approx(lp_norm(f, p)).epsilon(1e-13));
    }
  }
}

TEST_CASE("property: Holder interpolation between L2 and L6") {
  // ||f||_q <= ||f||_2^theta ||f||_6^{1-theta}, 1/q = theta/2 + (1-theta)/6.
  gen::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Grid g(gen::integer(rng, 1, 3), 16, 5.0);
    const ScalarField f = gen::noise(g, rng);
    const double theta = gen::uniform(rng, 0.05, 0.95);
    const double q = 1.0 / (theta / 2.0 + (1.0 - theta) / 6.0);
    CHECK(lp_norm(f, q) <= std::pow(lp_norm(f, 2.0), theta) * std::pow(lp_norm(f, 6.0), 1.0 - theta) * (1 + 1e-12));
  }
}

TEST_CASE("mixed_norm uses the trapezoid rule") {
  MixedNormSeries s{{0.0, 1.0, 3.0}, {1.0, 3.0, 1.0}};
  // p = 1: (1+3)/2 * 1 + (3+1)/2 * 2 = 6
  CHECK(mixed_norm(s, 1.0) == doctest::Approx(6.0));
  // p = 2: ((1+9)/2 + (9+1)/2 * 2)^{1/2} = sqrt(15)
  CHECK(mixed_norm(s, 2.0) == doctest::Approx(std::sqrt(15.0)));
  CHECK(mixed_norm(s, kInf) == 3.0);
  CHECK_THROWS_AS(mixed_norm(MixedNormSeries{}, 2.0), Error);
  CHECK_THROWS_AS(mixed_norm(MixedNormSeries{{0.0, 1.0}, {1.0, -1.0}}, 2.0), Error);
}

TEST_CASE("property: L2+Linf proxy is bracketed and nested") {
  gen::Rng rng(99);
  for (int trial = 0; trial < 15; ++trial) {
    Grid g(gen::integer(rng, 1, 3), 16, gen::uniform(rng, 2.0, 20.0));
    const ScalarField f = gen::integer(rng, 0, 1) ? gen::noise(g, rng) : gen::packet(g, rng);
    const double l2 = l2_norm(f), linf = lp_norm(f, kInf);
    const PairNorms full = pair_norms(f);
    CHECK(full.l2_plus_linf_upper <= std::min(l2, linf) * (1 + 1e-14));
    CHECK(full.l1_cap_l2 == doctest::Approx(std::max(lp_norm(f, 1.0), l2)));
    // Quantile families are nested in r and contained in the full family.
    double prev = kInf;
    for (int r = 1; r <= 6; ++r) {
      const double v = pair_norms(f, r).l2_plus_linf_upper;
      CHECK(v <= prev * (1 + 1e-14));
      CHECK(v >= full.l2_plus_linf_upper * (1 - 1e-14));
      prev = v;
    }
  }
}

TEST_CASE("boundary mass counts the outer quarter") {
  Grid g(2, 32, 8.0);
  ScalarField uniform = ScalarField::from_function(g, [](const Vec3&) { return Complex(1.0, 0.0); });
  // Oracle: fraction of lattice points with some |x_a| > 3L/4.
  std::size_t outer = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.point(i);
    if (std::max(std::abs(x[0]), std::abs(x[1])) > 6.0) ++outer;
  }
  CHECK(boundary_mass(uniform) == doctest::Approx(static_cast<double>(outer) / g.size()));
  ScalarField bump = gaussian_packet(g, {0.0, 0.0, 0.0}, 0.7, {0.0, 0.0, 0.0});
  CHECK(boundary_mass(bump) < 1e-15);
  CHECK(boundary_mass(ScalarField(g)) == 0.0);
}

TEST_CASE("weights") {
  Grid g(3, 16, 8.0);
  ScalarField one = ScalarField::from_function(g, [](const Vec3&) { return Complex(1.0, 0.0); });
  WeightProfile w{2.0, CenterPath::moving_e1};
  const ScalarField wf = weighted_multiply(one, w, 3.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 d = g.minimum_image(g.point(i) - Vec3{3.0, 0.0, 0.0});
    REQUIRE(wf[i].real() == doctest::Approx(1.0 / (1.0 + norm2(d))));
  }
}

TEST_CASE("inner product and norms are consistent") {
  gen::Rng rng(3);
  Grid g(2, 16, 3.0);
  const ScalarField f = gen::noise(g, rng), h = gen::noise(g, rng);
  CHECK(inner(f, f).real() == doctest::Approx(l2_norm(f) * l2_norm(f)));
  CHECK(std::abs(inner(f, h) - std::conj(inner(h, f))) < 1e-10);
  CHECK(std::abs(inner(f, h)) <= l2_norm(f) * l2_norm(h));
}

#include <doctest.h>

#include <cmath>
#include <limits>

#include "ctlab/error.hpp"
#include "ctlab/estimators.hpp"
#include "gen.hpp"

using namespace ctlab;

namespace {

MixedNormSeries series_of(const std::vector<double>& t, double (*f)(double)) {
  MixedNormSeries s;
  for (double x : t) {
    s.times.push_back(x);
    s.values.push_back(f(x));
  }
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

// Composite Simpson on [0, T] with an even number of panels.
template <class F>
double simpson(F f, double T, int panels) {
  const double h = T / panels;
  double s = f(0.0) + f(T);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("rationals reduce and keep a positive denominator") {
  CHECK(Rational::make(6, -4) == Rational::make(-3, 2));
  CHECK(Rational::make(0, 7) == Rational::make(0, 1));
  CHECK(Rational::make(1, 3) + Rational::make(1, 6) == Rational::make(1, 2));
  CHECK(Rational::make(1, 2) - Rational::make(3, 4) == Rational::make(-1, 4));
  CHECK(Rational::make(2, 3) * Rational::make(9, 4) == Rational::make(3, 2));
  CHECK_THROWS_AS(Rational::make(1, 0), Error);
}

TEST_CASE("endpoint pair (2, 6) in three dimensions") {
  const AdmissiblePair e = AdmissiblePair::from_inverse(Rational::make(1, 2), 3);
  CHECK(e.p() == 2.0);
  CHECK(e.q() == 6.0);
  CHECK(e.inv_q == Rational::make(1, 6));
  CHECK(e.is_endpoint());
  CHECK(e.satisfies_identity());
  CHECK_FALSE(e.outside_hypothesis);
  CHECK_THROWS_AS(AdmissiblePair::from_inverse(Rational::make(3, 4), 3), Error);
}

TEST_CASE("property: every enumerated pair satisfies 2/p = n/2 - n/q exactly") {
  gen::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = gen::integer(rng, 1, 3);
    const int count = gen::integer(rng, 2, 40);
    const auto pairs = admissible_pairs(dim, count);
    REQUIRE(pairs.size() == static_cast<std::size_t>(count));
    for (const auto& pr : pairs) {
      CHECK(pr.satisfies_identity());
      CHECK(pr.outside_hypothesis == (dim < 3));
      // Independent check in floating point.
      const double lhs = 2.0 * pr.inv_p.value();
      const double rhs = dim / 2.0 - dim * pr.inv_q.value();
      CHECK(std::abs(lhs - rhs) < 1e-15);
    }
    CHECK(std::isinf(pairs.front().p()));
    CHECK(pairs.front().q() == 2.0);
    if (dim == 3) CHECK(pairs.back().is_endpoint());
    if (dim == 1) CHECK(std::isinf(pairs.back().q()));
  }
  CHECK_THROWS_AS(admissible_pairs(3, 1), Error);
  CHECK_THROWS_AS(admissible_pairs(4, 5), Error);
}

TEST_CASE("conjugate exponents") {
  CHECK(conjugate_exponent(2.0) == 2.0);
  CHECK(conjugate_exponent(6.0) == doctest::Approx(1.2));
  CHECK(conjugate_exponent(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(std::isinf(conjugate_exponent(1.0)));
}

TEST_CASE("property: decay_fit recovers exact power laws") {
  gen::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = gen::uniform(rng, -3.0, 1.5);
    const double c = gen::uniform(rng, 0.1, 10.0);
    MixedNormSeries s;
    for (double t : linspace(0.5, 60.0, 200)) {
      s.times.push_back(t);
      s.values.push_back(c * std::pow(t, a));
    }
    const DecayFit fit = decay_fit(s, 5.0, 40.0);
    CHECK(fit.exponent == doctest::Approx(a).epsilon(1e-12));
    CHECK(std::exp(fit.intercept) == doctest::Approx(c).epsilon(1e-10));
    CHECK(fit.residual < 1e-12);
    CHECK(fit.samples > 100);
  }
  const MixedNormSeries few = series_of({1.0, 2.0, 3.0}, [](double t) { return 1.0 / t; });
  CHECK_THROWS_AS(decay_fit(few, 0.5, 4.0), Error);
  const MixedNormSeries zero = series_of(linspace(1.0, 10.0, 20), [](double) { return 0.0; });
  CHECK_THROWS_AS(decay_fit(zero, 1.0, 10.0), Error);
}

TEST_CASE("mixed norms: trapezoid quadrature and the sup") {
  const MixedNormSeries s = series_of(linspace(0.0, 2.0, 2001), [](double t) { return 1.0 + t; });
  // (int_0^2 (1+t)^3 dt)^{1/3} = ((81 - 1)/4)^{1/3}
  CHECK(mixed_norm(s, 3.0) == doctest::Approx(std::cbrt(20.0)).epsilon(1e-6));
  CHECK(mixed_norm(s, std::numeric_limits<double>::infinity()) == 3.0);
  CHECK(strichartz_ratio(s, 3.0, 2.0) == doctest::Approx(std::cbrt(20.0) / 2.0).epsilon(1e-6));
  CHECK_THROWS_AS(strichartz_ratio(s, 3.0, 0.0), Error);
  CHECK(local_decay_norm(s, 1.0) == doctest::Approx(std::sqrt(26.0 / 3.0)).epsilon(1e-6));
  CHECK(local_decay_norm(s, 0.0) == 0.0);
  MixedNormSeries empty_source;
  empty_source.times = {0.0, 1.0};
  empty_source.values = {0.0, 0.0};
  CHECK_THROWS_AS(inhomogeneous_ratio(s, 2.0, 0.0, empty_source, 1.0), Error);
  CHECK(inhomogeneous_ratio(s, 3.0, 1.0, empty_source, 1.0) == doctest::Approx(std::cbrt(20.0)).epsilon(1e-6));
}

TEST_CASE("Strichartz ratio of the free Gaussian against its closed form") {
  // |psi(t)| = |z|^{-n/2} exp(-x^2 / (2 a^2 |z|^2)), z = 1 + i t / a^2, so
  // ||psi(t)||_q = |z|^{-n/2 + n/q} (2 pi a^2 / q)^{n / (2q)}.
  const double a = 1.0, T = 5.0;
  Grid g(1, 512, 60.0);
  const ScalarField f0 =
      ScalarField::from_function(g, [&](const Vec3& x) { return Complex(std::exp(-0.5 * x[0] * x[0] / (a * a)), 0.0); });
  StepperConfig c;
  c.dt = 0.005;
  c.snapshot_every = 1;
  c.boundary_mass_guard = 1.0;
  const PropagatorTrace tr = propagate({}, f0, 0.0, T, c);
  const AdmissiblePair pr = AdmissiblePair::from_inverse(Rational::make(1, 8), 1);  // (8, 4)
  REQUIRE(pr.q() == 4.0);
  const double p = pr.p(), q = pr.q();
  auto lq = [&](double t) {
    const double mod = std::hypot(1.0, t / (a * a));
    return std::pow(mod, -0.5 + 1.0 / q) * std::pow(2.0 * M_PI * a * a / q, 1.0 / (2.0 * q));
  };
  const double l2 = std::pow(M_PI * a * a, 0.25);
  const double exact = std::pow(simpson([&](double t) { return std::pow(lq(t), p); }, T, 4000), 1.0 / p) / l2;
  CHECK(l2_norm(f0) == doctest::Approx(l2).epsilon(1e-12));
  CHECK(strichartz_ratio(tr, pr) == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("Kato-Jensen power iteration on a rank-two operator") {
  // T_t x = t^{-3/2} (2 <u, x> u + <v, x> v) with orthonormal u, v: ||T_t|| = 2 t^{-3/2}.
  Grid g(1, 64, 8.0);
  ScalarField u = gaussian_packet(g, {-2.0, 0.0, 0.0}, 0.7, {0.0, 0.0, 0.0});
  ScalarField v = gaussian_packet(g, {2.5, 0.0, 0.0}, 0.7, {0.0, 0.0, 0.0});
  v.axpy(-inner(v, u), u);
  v *= 1.0 / l2_norm(v);
  SandwichedPropagator op;
  op.apply = [&](const ScalarField& x, double t) {
    ScalarField y(g);
    y.axpy(2.0 * inner(x, u), u);
    y.axpy(inner(x, v), v);
    y *= std::pow(t, -1.5);
    return y;
  };
  op.apply_adjoint = op.apply;  // self-adjoint
  const ScalarField start = u + v;
  KatoJensenOptions opt;
  opt.iterations = 25;
  const auto res = kato_jensen_probe(op, start, {1.0, 2.0, 4.0, 8.0}, opt);
  REQUIRE(res.estimates.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const double t = res.estimates.times[i];
    CHECK(res.estimates.values[i] == doctest::Approx(2.0 * std::pow(t, -1.5)).epsilon(1e-9));
  }
  CHECK(res.warnings.empty());
  // A probe can only under-estimate the norm.
  const auto lower = rayleigh_probe([&](const ScalarField& x, double t) { return l2_norm(op.apply(x, t)); },
                                    {start, v}, {1.0, 3.0});
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(lower.values[i] <= 2.0 * std::pow(lower.times[i], -1.5) * (1.0 + 1e-12));
}

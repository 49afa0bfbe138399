#include "ctlab/datum.hpp"

#include <cmath>
#include <random>

#include "ctlab/error.hpp"
#include "ctlab/fft.hpp"

namespace ctlab {

void normalize(ScalarField& f, Normalization n) {
  if (n == Normalization::none) return;
  double scale = l2_norm(f);
  if (n == Normalization::l1_cap_l2) scale = std::max(scale, lp_norm(f, 1.0));
  require(scale > 0.0, ErrorCode::invalid_input, "cannot normalize a zero datum");
  f *= 1.0 / scale;
}

ScalarField gaussian_packet(const Grid& grid, const Vec3& center, double width, const Vec3& momentum,
                            Normalization n) {
  require(width > 0.0, ErrorCode::invalid_parameter, "packet width must be positive");
  ScalarField f = ScalarField::from_function(grid, [&](const Vec3& x) {
    const Vec3 d = grid.minimum_image(x - center);
    return std::exp(Complex(-0.5 * norm2(d) / (width * width), dot(momentum, x)));
  });
  normalize(f, n);
  return f;
}

void band_limit(ScalarField& f, const BandLimit& band) {
  require(band.pass > 0.0 && band.pass < band.stop && band.stop <= 1.0, ErrorCode::invalid_parameter,
          "band limit needs 0 < pass < stop <= 1");
  const Grid& g = f.grid();
  auto fft = fourier_for(g);
  fft->forward(f);
  const double kn = g.nyquist();
  for (std::size_t i = 0; i < g.size(); ++i) {
    // Per-axis taper keeps the filter separable and symmetric on the lattice.
    const Vec3 k = g.wavevector(i);
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double r = std::abs(k[a]) / kn;
      if (r >= band.stop) {
        w = 0.0;
      } else if (r > band.pass) {
        const double c = std::cos(0.5 * kPi * (r - band.pass) / (band.stop - band.pass));
        w *= c * c;
      }
    }
    f[i] *= w;
  }
  fft->inverse(f);
}

ScalarField random_band_limited(const Grid& grid, std::uint64_t seed, const Vec3& center, double envelope,
                                const BandLimit& band, Normalization n) {
  require(envelope > 0.0, ErrorCode::invalid_parameter, "envelope width must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ScalarField f(grid);
  for (auto& z : f.values()) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = Complex(re, im);
  }
  band_limit(f, band);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 d = grid.minimum_image(grid.point(i) - center);
    f[i] *= std::exp(-0.5 * norm2(d) / (envelope * envelope));
  }
  band_limit(f, band);
  normalize(f, n);
  return f;
}

ScalarField bound_state_mixture(const BoundStateSet& bs, const std::vector<Complex>& coefficients,
                                Normalization n) {
  require(!coefficients.empty() && coefficients.size() <= bs.size(), ErrorCode::invalid_input,
          "mixture needs between one and size() coefficients");
  ScalarField f(bs.eigenfunctions.front().grid());
  for (std::size_t j = 0; j < coefficients.size(); ++j) f.axpy(coefficients[j], bs.eigenfunctions[j]);
  normalize(f, n);
  return f;
}

ScalarField dilate(const ScalarField& f, double factor, const Vec3& center) {
  require(factor > 0.0, ErrorCode::invalid_parameter, "dilation factor must be positive");
  const Grid& g = f.grid();
  ScalarField hat = f;
  fourier_for(g)->forward(hat);
  // Evaluate the trigonometric interpolant of f at center + (x - center) / d.
  // Separable sums keep this O(N^{n+1}) instead of O(N^{2n}).
  const int n = g.points_per_axis();
  std::vector<Complex> data(hat.values().begin(), hat.values().end());
  for (int axis = 0; axis < g.dim(); ++axis) {
    std::vector<Complex> basis(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      const double x = g.coordinate(j);
      const double y = center[axis] + (x - center[axis]) / factor;
      for (int m = 0; m < n; ++m) {
        // The Nyquist mode is split symmetrically so real data stays real.
        double k = g.wavenumber(m);
        Complex e = std::polar(1.0, k * (y + g.half_length())) / static_cast<double>(n);
        if (2 * m == n) e = std::cos(k * (y + g.half_length())) / static_cast<double>(n);
        basis[static_cast<std::size_t>(j) * n + m] = e;
      }
    }
    std::size_t stride = 1;
    for (int a = axis + 1; a < g.dim(); ++a) stride *= static_cast<std::size_t>(n);
    const std::size_t block = stride * n;
    std::vector<Complex> out(data.size());
    for (std::size_t base = 0; base < data.size(); base += block) {
      for (std::size_t s = 0; s < stride; ++s) {
        for (int j = 0; j < n; ++j) {
          Complex acc = 0.0;
          for (int m = 0; m < n; ++m) acc += basis[static_cast<std::size_t>(j) * n + m] * data[base + m * stride + s];
          out[base + j * stride + s] = acc;
        }
      }
    }
    data = std::move(out);
  }
  ScalarField result(g, std::span<const Complex>(data));
  result *= std::pow(factor, -0.5 * g.dim());
  return result;
}

}  // namespace ctlab

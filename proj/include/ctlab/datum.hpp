#pragma once

// Initial-datum recipes.

#include <cstdint>
#include <vector>

#include "ctlab/grid.hpp"
#include "ctlab/spectrum.hpp"

namespace ctlab {

enum class Normalization {
  none,
  l2,         // ||f||_2 = 1
  l1_cap_l2,  // max(||f||_1, ||f||_2) = 1
};

void normalize(ScalarField& f, Normalization n);

/// exp(-|x - c|^2 / (2 a^2) + i k.x), minimum-image distance on the box.
ScalarField gaussian_packet(const Grid& grid, const Vec3& center, double width, const Vec3& momentum,
                            Normalization n = Normalization::l2);

/// Smooth spectral taper: 1 below `pass` * k_N, cos^2 roll-off to 0 at `stop` * k_N.
struct BandLimit {
  double pass = 0.45;
  double stop = 0.9;
};

void band_limit(ScalarField& f, const BandLimit& band = {});

/// Complex Gaussian noise, band limited, windowed by a Gaussian envelope of
/// width `envelope` around `center`, band limited again.
ScalarField random_band_limited(const Grid& grid, std::uint64_t seed, const Vec3& center, double envelope,
                                const BandLimit& band = {}, Normalization n = Normalization::l2);

/// sum_j c_j u_j for the first c.size() bound states.
ScalarField bound_state_mixture(const BoundStateSet& bs, const std::vector<Complex>& coefficients,
                                Normalization n = Normalization::l2);

/// f(x / d) / d^{n/2}: L2-preserving dilation by factor d about `center`,
/// evaluated spectrally (exact for band-limited f inside the box).
ScalarField dilate(const ScalarField& f, double factor, const Vec3& center);

}  // namespace ctlab

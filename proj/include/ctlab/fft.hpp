#pragma once

#include <memory>
#include <span>

#include "ctlab/grid.hpp"

namespace ctlab {

/// In-place n-dimensional complex DFT on a grid. `forward` is unnormalized,
/// `inverse` divides by the point count, so inverse(forward(f)) == f.
/// Buffers must be 64-byte aligned (every ComplexBuffer is).
class FourierTransform {
 public:
  explicit FourierTransform(const Grid& grid);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;
  void forward(ScalarField& f) const { forward(f.values()); }
  void inverse(ScalarField& f) const { inverse(f.values()); }

  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Shared transform for a grid; plans are created once per grid shape.
std::shared_ptr<const FourierTransform> fourier_for(const Grid& grid);

/// |k|^2 / 2 on the DFT lattice, in the flat order of `grid`.
const RealBuffer& kinetic_symbol(const Grid& grid);

}  // namespace ctlab

#include "ctlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "ctlab/error.hpp"

namespace ctlab {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using GridKey = std::tuple<int, int, double>;

GridKey key_of(const Grid& g) { return {g.dim(), g.points_per_axis(), g.half_length()}; }

}  // namespace

FourierTransform::FourierTransform(const Grid& grid) : grid_(grid) {
  int dims[3] = {grid.points_per_axis(), grid.points_per_axis(), grid.points_per_axis()};
  ComplexBuffer scratch(grid.size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_ESTIMATE keeps plan selection deterministic from run to run.
  forward_plan_ = fftw_plan_dft(grid.dim(), dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft(grid.dim(), dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  require(forward_plan_ && inverse_plan_, ErrorCode::invalid_input, "FFTW planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void FourierTransform::forward(std::span<Complex> data) const {
  require(data.size() == grid_.size(), ErrorCode::invalid_input, "transform size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

void FourierTransform::inverse(std::span<Complex> data) const {
  require(data.size() == grid_.size(), ErrorCode::invalid_input, "transform size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), p, p);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (auto& z : data) z *= scale;
}

std::shared_ptr<const FourierTransform> fourier_for(const Grid& grid) {
  static std::mutex m;
  static std::map<GridKey, std::shared_ptr<const FourierTransform>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[key_of(grid)];
  if (!slot) slot = std::make_shared<const FourierTransform>(grid);
  return slot;
}

const RealBuffer& kinetic_symbol(const Grid& grid) {
  static std::mutex m;
  static std::map<GridKey, std::unique_ptr<RealBuffer>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[key_of(grid)];
  if (!slot) {
    slot = std::make_unique<RealBuffer>(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) (*slot)[i] = 0.5 * norm2(grid.wavevector(i));
  }
  return *slot;
}

}  // namespace ctlab

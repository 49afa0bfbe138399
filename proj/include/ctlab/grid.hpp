#pragma once

// Periodic-box grids, complex fields on them, and the norms used by the
// dispersive estimators.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <new>
#include <span>
#include <vector>

namespace ctlab {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;  // unused trailing components stay 0

inline constexpr double kPi = 3.14159265358979323846;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline Vec3 operator+(Vec3 a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

// 64-byte aligned storage so every field buffer is a valid FFTW SIMD target.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + 63) / 64) * 64;
    void* p = std::aligned_alloc(64, bytes == 0 ? 64 : bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<Complex, AlignedAllocator<Complex>>;
using RealBuffer = std::vector<double, AlignedAllocator<double>>;

/// Uniform periodic grid on [-L, L)^n. Flat storage is row-major with axis 0
/// slowest; the dual lattice is the standard DFT lattice k = (pi/L) m.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_length);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double half_length() const noexcept { return half_length_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double box_volume() const noexcept;

  double coordinate(int index) const noexcept { return -half_length_ + spacing_ * index; }
  // Angular wavenumber of DFT index m (negative for m >= n/2).
  double wavenumber(int index) const noexcept;
  double nyquist() const noexcept;

  std::array<int, 3> multi_index(std::size_t flat) const noexcept;
  Vec3 point(std::size_t flat) const noexcept;
  Vec3 wavevector(std::size_t flat) const noexcept;

  // Wrap each used component of a displacement into [-L, L).
  Vec3 minimum_image(Vec3 d) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_length_ == b.half_length_;
  }

 private:
  int dim_;
  int n_;
  double half_length_;
  double spacing_;
  std::size_t size_;
  double cell_volume_;
};

class ScalarField {
 public:
  explicit ScalarField(Grid grid);
  ScalarField(Grid grid, ComplexBuffer values);
  ScalarField(Grid grid, std::span<const Complex> values);

  static ScalarField from_function(const Grid& grid, const std::function<Complex(const Vec3&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<Complex> values() noexcept { return values_; }
  std::span<const Complex> values() const noexcept { return values_; }
  Complex* data() noexcept { return values_.data(); }
  const Complex* data() const noexcept { return values_.data(); }
  Complex& operator[](std::size_t i) noexcept { return values_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return values_[i]; }

  bool all_finite() const noexcept;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(Complex c) noexcept;
  // this += c * other
  ScalarField& axpy(Complex c, const ScalarField& other);

 private:
  Grid grid_;
  ComplexBuffer values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(Complex c, ScalarField a);

// <f, g> = h^n sum f conj(g)
Complex inner(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);

struct SpinorField {
  SpinorField(ScalarField first, ScalarField second);
  explicit SpinorField(const Grid& grid);

  const Grid& grid() const noexcept { return first.grid(); }
  ScalarField first;
  ScalarField second;
};

double l2_norm(const SpinorField& f);
// Indefinite charge  int |psi_1|^2 - |psi_2|^2.
double charge(const SpinorField& f);
Complex inner(const SpinorField& f, const SpinorField& g);

enum class CenterPath { fixed, moving_e1 };

/// <x - D(t)>^{-sigma} with D(t) either 0 or e_1 t.
struct WeightProfile {
  double sigma = 2.0;
  CenterPath center_path = CenterPath::fixed;

  Vec3 center(double t) const noexcept;
};

struct MixedNormSeries {
  std::vector<double> times;
  std::vector<double> values;

  void validate() const;
  std::size_t size() const noexcept { return times.size(); }
};

/// (h^n sum |f|^p)^{1/p}, or max |f| for p = infinity.
double lp_norm(const ScalarField& f, double p);

/// Trapezoid quadrature in time of values^p, raised to 1/p; sup for p = infinity.
double mixed_norm(const MixedNormSeries& series, double p);

ScalarField weighted_multiply(const ScalarField& f, const WeightProfile& w, double t);
void weighted_multiply_in_place(ScalarField& f, const WeightProfile& w, double t);

struct PairNorms {
  double l1_cap_l2 = 0.0;           // max(||f||_1, ||f||_2)
  double l2_plus_linf_upper = 0.0;  // upper bound on inf_{f=h+g} ||h||_2 + ||g||_inf
};

/// `resolution` selects the threshold family: 0 uses every sample magnitude,
/// r > 0 uses the 2^r + 1 dyadic quantiles of |f| (nested as r grows). The two
/// trivial splittings are always included.
PairNorms pair_norms(const ScalarField& f, int resolution = 0);

/// Fraction of |f|^2 lying within L/4 of the box boundary.
double boundary_mass(const ScalarField& f);
double boundary_mass(const SpinorField& f);

}  // namespace ctlab

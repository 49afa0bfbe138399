#include "ctlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ctlab/error.hpp"

namespace ctlab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int dim, int points_per_axis, double half_length)
    : dim_(dim), n_(points_per_axis), half_length_(half_length) {
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_parameter, "grid dimension must be 1, 2 or 3");
  require(points_per_axis >= 8 && is_power_of_two(points_per_axis), ErrorCode::invalid_parameter,
          "points per axis must be a power of two and at least 8");
  require(std::isfinite(half_length) && half_length > 0.0, ErrorCode::invalid_parameter,
          "box half length must be positive");
  spacing_ = 2.0 * half_length_ / n_;
  size_ = 1;
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);
  cell_volume_ = std::pow(spacing_, dim_);
}

double Grid::box_volume() const noexcept { return std::pow(2.0 * half_length_, dim_); }

double Grid::wavenumber(int index) const noexcept {
  int m = index < n_ / 2 ? index : index - n_;
  return kPi * m / half_length_;
}

double Grid::nyquist() const noexcept { return kPi / spacing_; }

std::array<int, 3> Grid::multi_index(std::size_t flat) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

Vec3 Grid::point(std::size_t flat) const noexcept {
  auto idx = multi_index(flat);
  Vec3 x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = coordinate(idx[a]);
  return x;
}

Vec3 Grid::wavevector(std::size_t flat) const noexcept {
  auto idx = multi_index(flat);
  Vec3 k{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) k[a] = wavenumber(idx[a]);
  return k;
}

Vec3 Grid::minimum_image(Vec3 d) const noexcept {
  const double period = 2.0 * half_length_;
  for (int a = 0; a < dim_; ++a) {
    d[a] -= period * std::floor((d[a] + half_length_) / period);
  }
  for (int a = dim_; a < 3; ++a) d[a] = 0.0;
  return d;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid grid) : grid_(grid), values_(grid.size(), Complex(0.0, 0.0)) {}

ScalarField::ScalarField(Grid grid, ComplexBuffer values) : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCode::invalid_input,
          "field value count does not match grid point count");
  require(all_finite(), ErrorCode::invalid_input, "field contains non-finite values");
}

ScalarField::ScalarField(Grid grid, std::span<const Complex> values)
    : ScalarField(grid, ComplexBuffer(values.begin(), values.end())) {}

ScalarField ScalarField::from_function(const Grid& grid,
                                       const std::function<Complex(const Vec3&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.point(i));
  require(out.all_finite(), ErrorCode::invalid_input, "field contains non-finite values");
  return out;
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require(grid_ == other.grid_, ErrorCode::invalid_input, "fields live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require(grid_ == other.grid_, ErrorCode::invalid_input, "fields live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(Complex c) noexcept {
  for (auto& z : values_) z *= c;
  return *this;
}

ScalarField& ScalarField::axpy(Complex c, const ScalarField& other) {
  require(grid_ == other.grid_, ErrorCode::invalid_input, "fields live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * other.values_[i];
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(Complex c, ScalarField a) { return a *= c; }

Complex inner(const ScalarField& f, const ScalarField& g) {
  require(f.grid() == g.grid(), ErrorCode::invalid_input, "fields live on different grids");
  Complex acc(0.0, 0.0);
  const Complex* a = f.data();
  const Complex* b = g.data();
  for (std::size_t i = 0; i < f.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc * f.grid().cell_volume();
}

double l2_norm(const ScalarField& f) {
  double acc = 0.0;
  for (const auto& z : f.values()) acc += std::norm(z);
  return std::sqrt(acc * f.grid().cell_volume());
}

SpinorField::SpinorField(ScalarField a, ScalarField b) : first(std::move(a)), second(std::move(b)) {
  require(first.grid() == second.grid(), ErrorCode::invalid_input,
          "spinor components must share one grid");
}

SpinorField::SpinorField(const Grid& grid) : first(grid), second(grid) {}

double l2_norm(const SpinorField& f) {
  double a = l2_norm(f.first);
  double b = l2_norm(f.second);
  return std::sqrt(a * a + b * b);
}

double charge(const SpinorField& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.first.size(); ++i) {
    acc += std::norm(f.first[i]) - std::norm(f.second[i]);
  }
  return acc * f.grid().cell_volume();
}

Complex inner(const SpinorField& f, const SpinorField& g) {
  return inner(f.first, g.first) + inner(f.second, g.second);
}

Vec3 WeightProfile::center(double t) const noexcept {
  if (center_path == CenterPath::moving_e1) return {t, 0.0, 0.0};
  return {0.0, 0.0, 0.0};
}

void MixedNormSeries::validate() const {
  require(!times.empty(), ErrorCode::invalid_input, "mixed-norm series is empty");
  require(times.size() == values.size(), ErrorCode::invalid_input,
          "mixed-norm series has mismatched times and values");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]), ErrorCode::invalid_input, "non-finite sample time");
    require(std::isfinite(values[i]) && values[i] >= 0.0, ErrorCode::invalid_input,
            "mixed-norm values must be finite and nonnegative");
    if (i > 0) {
      require(times[i] > times[i - 1], ErrorCode::invalid_input,
              "mixed-norm sample times must be strictly increasing");
    }
  }
}

double lp_norm(const ScalarField& f, double p) {
  require(std::isinf(p) ? p > 0 : p >= 1.0, ErrorCode::invalid_parameter,
          "Lebesgue exponent must satisfy p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& z : f.values()) m = std::max(m, std::abs(z));
    return m;
  }
  if (p == 2.0) return l2_norm(f);
  // Scale by the maximum to avoid under/overflow for large p.
  double m = 0.0;
  for (const auto& z : f.values()) m = std::max(m, std::abs(z));
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  if (p == 1.0) {
    for (const auto& z : f.values()) acc += std::abs(z);
    return acc * f.grid().cell_volume();
  }
  const double inv_m = 1.0 / m;
  const int ip = static_cast<int>(p);
  if (ip == p && ip % 2 == 0 && ip <= 16) {
    // Even integer exponents need no square roots or pow calls.
    const int half = ip / 2;
    for (const auto& z : f.values()) {
      const double s = std::norm(z) * inv_m * inv_m;
      double v = s;
      for (int k = 1; k < half; ++k) v *= s;
      acc += v;
    }
  } else {
    for (const auto& z : f.values()) acc += std::pow(std::abs(z) * inv_m, p);
  }
  return m * std::pow(acc * f.grid().cell_volume(), 1.0 / p);
}

double mixed_norm(const MixedNormSeries& series, double p) {
  series.validate();
  require(std::isinf(p) ? p > 0 : p >= 1.0, ErrorCode::invalid_parameter,
          "time exponent must satisfy p >= 1");
  const auto& v = series.values;
  const auto& t = series.times;
  if (std::isinf(p)) return *std::max_element(v.begin(), v.end());
  if (v.size() == 1) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    acc += 0.5 * (t[i] - t[i - 1]) * (std::pow(v[i], p) + std::pow(v[i - 1], p));
  }
  return std::pow(acc, 1.0 / p);
}

void weighted_multiply_in_place(ScalarField& f, const WeightProfile& w, double t) {
  if (w.sigma == 0.0) return;
  const Grid& g = f.grid();
  const Vec3 c = w.center(t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 d = g.minimum_image(g.point(i) - c);
    f[i] *= std::pow(1.0 + norm2(d), -0.5 * w.sigma);
  }
}

ScalarField weighted_multiply(const ScalarField& f, const WeightProfile& w, double t) {
  ScalarField out = f;
  weighted_multiply_in_place(out, w, t);
  return out;
}

PairNorms pair_norms(const ScalarField& f, int resolution) {
  require(resolution >= 0 && resolution < 31, ErrorCode::invalid_parameter,
          "threshold resolution out of range");
  const double dv = f.grid().cell_volume();
  std::vector<double> mag(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mag[i] = std::abs(f[i]);
  std::sort(mag.begin(), mag.end());

  // tail[i] = sum_{j >= i} mag[j]^2
  const std::size_t n = mag.size();
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + mag[i] * mag[i];

  double l1 = std::accumulate(mag.begin(), mag.end(), 0.0) * dv;
  double l2 = std::sqrt(tail[0] * dv);
  double linf = n ? mag.back() : 0.0;

  PairNorms out;
  out.l1_cap_l2 = std::max(l1, l2);
  double best = std::min(l2, linf);
  // Threshold tau = mag[i]: h keeps samples strictly above tau.
  auto consider = [&](std::size_t i) {
    std::size_t first_above = std::upper_bound(mag.begin(), mag.end(), mag[i]) - mag.begin();
    best = std::min(best, std::sqrt(tail[first_above] * dv) + mag[i]);
  };
  if (n > 0) {
    if (resolution == 0) {
      for (std::size_t i = 0; i < n; ++i) consider(i);
    } else {
      const std::size_t segments = std::size_t{1} << resolution;
      for (std::size_t q = 0; q <= segments; ++q) consider(q * (n - 1) / segments);
    }
  }
  out.l2_plus_linf_upper = best;
  return out;
}

namespace {

bool near_boundary(const Grid& g, std::size_t flat) {
  auto idx = g.multi_index(flat);
  const double cut = 0.75 * g.half_length();
  for (int a = 0; a < g.dim(); ++a) {
    if (std::abs(g.coordinate(idx[a])) > cut) return true;
  }
  return false;
}

}  // namespace

double boundary_mass(const ScalarField& f) {
  double total = 0.0, edge = 0.0;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double m = std::norm(f[i]);
    total += m;
    if (near_boundary(g, i)) edge += m;
  }
  return total > 0.0 ? edge / total : 0.0;
}

double boundary_mass(const SpinorField& f) {
  double total = 0.0, edge = 0.0;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double m = std::norm(f.first[i]) + std::norm(f.second[i]);
    total += m;
    if (near_boundary(g, i)) edge += m;
  }
  return total > 0.0 ? edge / total : 0.0;
}

}  // namespace ctlab

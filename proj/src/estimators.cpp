#include "ctlab/estimators.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ctlab/error.hpp"

namespace ctlab {

Rational Rational::make(long long num, long long den) {
  require(den != 0, ErrorCode::invalid_parameter, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  return {num / (g ? g : 1), den / (g ? g : 1)};
}

Rational operator+(Rational a, Rational b) { return Rational::make(a.num * b.den + b.num * a.den, a.den * b.den); }
Rational operator-(Rational a, Rational b) { return Rational::make(a.num * b.den - b.num * a.den, a.den * b.den); }
Rational operator*(Rational a, Rational b) { return Rational::make(a.num * b.num, a.den * b.den); }

double AdmissiblePair::p() const noexcept {
  return inv_p.num == 0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_p.value();
}

double AdmissiblePair::q() const noexcept {
  return inv_q.num == 0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_q.value();
}

bool AdmissiblePair::satisfies_identity() const {
  const Rational n = Rational::make(dim, 1);
  const Rational lhs = Rational::make(2, 1) * inv_p;
  const Rational rhs = n * Rational::make(1, 2) - n * inv_q;
  return lhs == rhs && inv_p.num >= 0 && inv_p.num * 2 <= inv_p.den && inv_q.num >= 0;
}

AdmissiblePair AdmissiblePair::from_inverse(Rational inv_p, int dim) {
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_parameter, "dimension must be 1, 2 or 3");
  AdmissiblePair a;
  a.dim = dim;
  a.inv_p = inv_p;
  // 1/q = 1/2 - (2/n)(1/p)
  a.inv_q = Rational::make(1, 2) - Rational::make(2, dim) * inv_p;
  a.outside_hypothesis = dim < 3;
  require(a.inv_q.num >= 0 && inv_p.num >= 0 && inv_p.num * 2 <= inv_p.den, ErrorCode::invalid_parameter,
          "exponent outside the admissible line");
  return a;
}

std::vector<AdmissiblePair> admissible_pairs(int dim, int count) {
  require(count >= 2, ErrorCode::invalid_parameter, "need at least two pairs (both ends)");
  require(dim >= 1 && dim <= 3, ErrorCode::invalid_parameter, "dimension must be 1, 2 or 3");
  // 1/p runs over [0, 1/p_max] with 1/p_max = min(1/2, n/4).
  const Rational top = dim >= 2 ? Rational::make(1, 2) : Rational::make(1, 4);
  std::vector<AdmissiblePair> out;
  for (int i = 0; i < count; ++i)
    out.push_back(AdmissiblePair::from_inverse(top * Rational::make(i, count - 1), dim));
  return out;
}

double conjugate_exponent(double p) noexcept {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

MixedNormSeries norm_series(const PropagatorTrace& trace, double q) {
  require(!trace.fields.empty() && trace.fields.size() == trace.times.size(), ErrorCode::invalid_input,
          "trace does not store its snapshots");
  MixedNormSeries s;
  for (std::size_t i = 0; i < trace.fields.size(); ++i) {
    s.times.push_back(trace.times[i]);
    s.values.push_back(lp_norm(trace.fields[i], q));
  }
  return s;
}

double strichartz_ratio(const MixedNormSeries& lq_series, double p, double initial_l2) {
  require(initial_l2 > 0.0, ErrorCode::degenerate_ratio, "zero initial datum: ratio undefined");
  return mixed_norm(lq_series, p) / initial_l2;
}

double strichartz_ratio(const PropagatorTrace& trace, const AdmissiblePair& pair) {
  return strichartz_ratio(norm_series(trace, pair.q()), pair.p(), l2_norm(trace.initial));
}

double inhomogeneous_ratio(const MixedNormSeries& projected_lq, double p, double initial_l2,
                           const MixedNormSeries& source_dual, double source_time_exponent) {
  const double denominator = initial_l2 + mixed_norm(source_dual, source_time_exponent);
  require(denominator > 0.0, ErrorCode::degenerate_ratio, "zero datum and zero source: ratio undefined");
  return mixed_norm(projected_lq, p) / denominator;
}

DecayFit decay_fit(const MixedNormSeries& series, double t_min, double t_max) {
  series.validate();
  require(t_min < t_max, ErrorCode::invalid_parameter, "fit window must have t_min < t_max");
  DecayFit fit;
  fit.t_min = t_min;
  fit.t_max = t_max;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.times[i];
    if (t < t_min || t > t_max) continue;
    require(t > 0.0, ErrorCode::invalid_input, "log-log fit needs positive times");
    require(series.values[i] > 0.0, ErrorCode::invalid_input, "log-log fit needs positive values");
    x.push_back(std::log(t));
    y.push_back(std::log(series.values[i]));
  }
  require(x.size() >= 8, ErrorCode::invalid_input, "decay fit needs at least 8 samples in the window");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.samples = static_cast<int>(x.size());
  return fit;
}

KatoJensenResult kato_jensen_probe(const SandwichedPropagator& op, const ScalarField& start,
                                   const std::vector<double>& t_list, const KatoJensenOptions& options) {
  require(op.apply && op.apply_adjoint, ErrorCode::invalid_input, "operator and adjoint are required");
  require(options.iterations >= 1, ErrorCode::invalid_parameter, "need at least one power iteration");
  require(l2_norm(start) > 0.0, ErrorCode::invalid_input, "power iteration start vector is zero");
  KatoJensenResult out;
  ScalarField x = start;
  for (const double t : t_list) {
    if (!options.warm_start) x = start;
    x *= 1.0 / l2_norm(x);
    double estimate = 0.0, change = 1.0;
    for (int it = 0; it < options.iterations; ++it) {
      const ScalarField y = op.apply(x, t);
      const double next = l2_norm(y);
      change = estimate > 0.0 ? std::abs(next - estimate) / estimate : 1.0;
      estimate = next;
      ScalarField z = op.apply_adjoint(y, t);
      const double nz = l2_norm(z);
      if (nz == 0.0) break;
      x = std::move(z);
      x *= 1.0 / nz;
    }
    out.estimates.times.push_back(t);
    out.estimates.values.push_back(estimate);
    out.last_change.push_back(change);
    if (change > options.stagnation)
      out.warnings.push_back("power iteration at t=" + std::to_string(t) + " still moving (" +
                             std::to_string(change) + ")");
  }
  return out;
}

MixedNormSeries rayleigh_probe(const std::function<double(const ScalarField&, double)>& apply_norm,
                               const std::vector<ScalarField>& probes, const std::vector<double>& t_list) {
  require(!probes.empty(), ErrorCode::invalid_input, "need at least one probe");
  MixedNormSeries out;
  for (const double t : t_list) {
    double best = 0.0;
    for (const auto& p : probes) {
      const double n = l2_norm(p);
      require(n > 0.0, ErrorCode::invalid_input, "zero probe vector");
      best = std::max(best, apply_norm(p, t) / n);
    }
    out.times.push_back(t);
    out.values.push_back(best);
  }
  return out;
}

double local_decay_norm(const MixedNormSeries& weighted_l2, double initial_l2) {
  if (initial_l2 == 0.0) return 0.0;
  return mixed_norm(weighted_l2, 2.0) / initial_l2;
}

double local_decay_norm(const PropagatorTrace& trace, const WeightProfile& w) {
  require(!trace.fields.empty() && trace.fields.size() == trace.times.size(), ErrorCode::invalid_input,
          "trace does not store its snapshots");
  MixedNormSeries s;
  for (std::size_t i = 0; i < trace.fields.size(); ++i) {
    s.times.push_back(trace.times[i]);
    s.values.push_back(l2_norm(weighted_multiply(trace.fields[i], w, trace.times[i])));
  }
  return local_decay_norm(s, l2_norm(trace.initial));
}

}  // namespace ctlab

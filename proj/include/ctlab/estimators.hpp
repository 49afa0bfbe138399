#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctlab/grid.hpp"
#include "ctlab/propagator.hpp"

namespace ctlab {

/// Exact rational p/q with q > 0, reduced.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational make(long long num, long long den);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num == b.num && a.den == b.den;
  }
};
Rational operator+(Rational a, Rational b);
Rational operator-(Rational a, Rational b);
Rational operator*(Rational a, Rational b);

/// (p, q) with 2/p = n/2 - n/q, stored through the exact reciprocals 1/p, 1/q.
struct AdmissiblePair {
  Rational inv_p;
  Rational inv_q;
  int dim = 3;
  bool outside_hypothesis = false;  // n < 3

  double p() const noexcept;  // infinity when 1/p = 0
  double q() const noexcept;
  bool satisfies_identity() const;
  bool is_endpoint() const noexcept { return inv_p == Rational::make(1, 2); }

  static AdmissiblePair from_inverse(Rational inv_p, int dim);
};

/// `count` pairs evenly spaced in 1/p from (inf, 2) to the endpoint (2, 2n/(n-2));
/// for n < 3 the line stops where q reaches infinity and pairs are flagged.
std::vector<AdmissiblePair> admissible_pairs(int dim, int count);

/// Dual exponent p' with 1/p + 1/p' = 1.
double conjugate_exponent(double p) noexcept;

/// L^q norms of each stored snapshot of a trace.
MixedNormSeries norm_series(const PropagatorTrace& trace, double q);

/// ||U psi_0||_{L^p_t L^q_x} / ||psi_0||_2 from the stored snapshots.
double strichartz_ratio(const PropagatorTrace& trace, const AdmissiblePair& pair);
/// Same, from an already collected series of L^q norms.
double strichartz_ratio(const MixedNormSeries& lq_series, double p, double initial_l2);

/// ||P_c psi||_{L^p L^q} / (||psi_0||_2 + ||F||_{L^p~' L^q~'}).
double inhomogeneous_ratio(const MixedNormSeries& projected_lq, double p, double initial_l2,
                           const MixedNormSeries& source_dual, double source_time_exponent);

struct DecayFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double residual = 0.0;  // rms of the log-log fit
  int samples = 0;
};

/// Least-squares line through (log t, log value) for samples with t in [t_min, t_max].
DecayFit decay_fit(const MixedNormSeries& series, double t_min, double t_max);

/// The operator T = W(t) U(t, t0) P_c(t0) W(t0) and its adjoint, supplied by
/// the caller (the adjoint runs the propagator backwards).
struct SandwichedPropagator {
  std::function<ScalarField(const ScalarField&, double)> apply;          // x -> T_t x
  std::function<ScalarField(const ScalarField&, double)> apply_adjoint;  // y -> T_t^* y
};

struct KatoJensenOptions {
  int iterations = 10;
  bool warm_start = true;  // start each t from the previous maximizer
  double stagnation = 1e-3;
};

struct KatoJensenResult {
  MixedNormSeries estimates;
  std::vector<double> last_change;  // relative change of the estimate in the final iteration
  std::vector<std::string> warnings;
};

/// Power iteration on T_t^* T_t for each t in t_list.
KatoJensenResult kato_jensen_probe(const SandwichedPropagator& op, const ScalarField& start,
                                   const std::vector<double>& t_list,
                                   const KatoJensenOptions& options = {});

/// Random Rayleigh probing: max over probes of ||T x|| / ||x||. A lower bound
/// on the operator norm, used where no adjoint is available.
MixedNormSeries rayleigh_probe(const std::function<double(const ScalarField&, double)>& apply_norm,
                               const std::vector<ScalarField>& probes, const std::vector<double>& t_list);

/// ||<x - D(t)>^{-sigma} psi(t)||_{L^2_t L^2_x} / ||psi_0||_2 from a series of weighted L^2 norms.
double local_decay_norm(const MixedNormSeries& weighted_l2, double initial_l2);
double local_decay_norm(const PropagatorTrace& trace, const WeightProfile& w);

}  // namespace ctlab

#include "ctlab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "ctlab/error.hpp"
#include "ctlab/oracle.hpp"
#include "ctlab/symmetries.hpp"

namespace ctlab {

void WaveOperatorConfig::validate() const {
  require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::invalid_parameter,
          "wave-operator horizon must be positive");
  require(tail_tolerance > 0.0, ErrorCode::invalid_parameter, "tail tolerance must be positive");
  stepper.validate();
}

double ChannelBasis::max_raw_overlap() const {
  return raw_overlap.size() == 0 ? 0.0 : raw_overlap.cwiseAbs().maxCoeff();
}

double ChannelBasis::gram_defect() const {
  std::vector<const ScalarField*> all;
  for (const auto& f : u_tilde) all.push_back(&f);
  for (const auto& f : w_tilde) all.push_back(&f);
  double worst = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      worst = std::max(worst, std::abs(inner(*all[i], *all[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

namespace {

// Lab-frame state of a bound state riding on potential mp at time t.
GalileiParams rider(const MovingPotential& mp, double t) { return {mp.velocity, mp.offset, t}; }

bool others_vanish(const ScalarHamiltonian& h, std::size_t channel) {
  for (std::size_t k = 0; k < h.potentials.size(); ++k)
    if (k != channel && !h.potentials[k].spec.vanishes()) return false;
  return true;
}

// Modified Gram-Schmidt, two passes; drops vectors that become numerically dependent.
void orthonormalize(std::vector<ScalarField>& family, const std::vector<ScalarField>& against) {
  std::vector<ScalarField> out;
  for (auto& f : family) {
    const double n0 = l2_norm(f);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& a : against) f.axpy(-inner(f, a), a);
      for (const auto& o : out) f.axpy(-inner(f, o), o);
    }
    const double n = l2_norm(f);
    if (n <= 1e-10 * n0) continue;
    f *= 1.0 / n;
    out.push_back(std::move(f));
  }
  family = std::move(out);
}

}  // namespace

TailEstimate channel_tail(const ScalarHamiltonian& h, std::size_t channel, const ScalarField& bound_state,
                          double horizon, double tolerance) {
  TailEstimate est;
  if (others_vanish(h, channel)) return est;
  const Grid& g = bound_state.grid();
  const MovingPotential& own = h.potentials[channel];
  constexpr int kSamples = 9;
  constexpr double kWindow = 8.0;
  std::vector<double> r, logf;
  double f_end = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double t = horizon - kWindow + kWindow * i / (kSamples - 1);
    const ScalarField moved = translate(bound_state, -1.0 * (own.offset + t * own.velocity));
    RealBuffer v(g.size(), 0.0);
    for (std::size_t k = 0; k < h.potentials.size(); ++k)
      if (k != channel) accumulate_potential(h.potentials[k], t, g, v);
    double acc = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) acc += v[p] * v[p] * std::norm(moved[p]);
    const double f = std::sqrt(acc * g.cell_volume());
    if (i == kSamples - 1) f_end = f;
    if (f > 1e-300) {
      r.push_back(t);
      logf.push_back(std::log(f));
    }
  }
  if (f_end <= 1e-300) return est;
  double slope = 0.0;
  if (r.size() >= 2) {
    const double n = static_cast<double>(r.size());
    double mr = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      mr += r[i] / n;
      ml += logf[i] / n;
    }
    double srr = 0.0, srl = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      srr += (r[i] - mr) * (r[i] - mr);
      srl += (r[i] - mr) * (logf[i] - ml);
    }
    slope = srl / srr;
  }
  est.rate = -slope;
  if (est.rate <= 1e-6) {
    est.tail = std::numeric_limits<double>::infinity();
    est.suggested_horizon = 2.0 * horizon;
    return est;
  }
  est.tail = f_end / est.rate;
  est.suggested_horizon =
      est.tail > tolerance ? horizon + std::log(est.tail / tolerance) / est.rate : horizon;
  return est;
}

std::vector<ChannelBasis> channel_bases(const std::vector<double>& anchors, const ScalarHamiltonian& h,
                                        std::span<const BoundStateSet> bound,
                                        const WaveOperatorConfig& cfg) {
  cfg.validate();
  require(!anchors.empty(), ErrorCode::invalid_input, "no anchor times requested");
  require(h.potentials.size() == bound.size(), ErrorCode::invalid_input,
          "need one bound-state set per potential");
  require(h.potentials.size() >= 1 && h.potentials.size() <= 2, ErrorCode::invalid_input,
          "channel bases are defined for one or two potentials");
  for (double s : anchors)
    require(std::isfinite(s) && s <= cfg.horizon, ErrorCode::invalid_parameter,
            "anchor time beyond the wave-operator horizon");

  // Channel states at the horizon, with the phase e^{-i lambda T}; the anchor
  // dependent factor e^{i lambda s} is applied after propagation.
  std::vector<ScalarField> states;
  std::vector<double> lambdas;
  std::vector<std::size_t> owner;
  std::vector<double> tails;
  double worst_tail = 0.0, suggestion = cfg.horizon;
  bool any_interacting = false;
  for (std::size_t k = 0; k < bound.size(); ++k) {
    const bool short_circuit = others_vanish(h, k);
    any_interacting = any_interacting || !short_circuit;
    for (std::size_t j = 0; j < bound[k].size(); ++j) {
      const ScalarField& u = bound[k].eigenfunctions[j];
      const TailEstimate te = channel_tail(h, k, u, cfg.horizon, cfg.tail_tolerance);
      tails.push_back(te.tail);
      if (te.tail > worst_tail) {
        worst_tail = te.tail;
        suggestion = std::max(suggestion, te.suggested_horizon);
      }
      const double lambda = bound[k].eigenvalues[j];
      ScalarField chi = galilei_inverse(u, rider(h.potentials[k], cfg.horizon));
      chi *= std::polar(1.0, -lambda * cfg.horizon);
      states.push_back(std::move(chi));
      lambdas.push_back(lambda);
      owner.push_back(k);
    }
  }
  if (worst_tail > cfg.tail_tolerance) {
    throw HorizonTooSmall("wave-operator tail " + std::to_string(worst_tail) + " exceeds tolerance " +
                              std::to_string(cfg.tail_tolerance) + "; try a horizon of " +
                              std::to_string(suggestion),
                          worst_tail, suggestion);
  }

  std::vector<std::size_t> order(anchors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return anchors[a] > anchors[b]; });

  StepperConfig step = cfg.stepper;
  step.keep_fields = false;
  step.snapshot_every = 1 << 30;

  std::vector<ChannelBasis> out(anchors.size());
  double current = cfg.horizon;
  std::vector<std::string> sweep_flags;
  for (std::size_t oi : order) {
    const double s = anchors[oi];
    if (!states.empty() && any_interacting && s != current) {
      std::vector<ScalarField> finals;
      const PropagatorTrace tr = propagate_batch(h, states, current, s, step, {}, nullptr, &finals);
      for (const auto& f : tr.flags) sweep_flags.push_back(f);
      states = std::move(finals);
      current = s;
    }
    ChannelBasis& b = out[oi];
    b.anchor_time = s;
    b.tails = tails;
    b.flags = sweep_flags;
    for (std::size_t i = 0; i < states.size(); ++i) {
      ScalarField v(states[i].grid());
      const std::size_t k = owner[i];
      if (others_vanish(h, k)) {
        // The channel state solves the full equation exactly.
        v = galilei_inverse(bound[k].eigenfunctions[i - (k == 0 ? 0 : bound[0].size())],
                            rider(h.potentials[k], s));
      } else {
        v = states[i];
        v *= std::polar(1.0, lambdas[i] * s);
      }
      (k == 0 ? b.u_tilde : b.w_tilde).push_back(std::move(v));
    }
    orthonormalize(b.u_tilde, {});
    orthonormalize(b.w_tilde, {});
    b.raw_overlap = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(b.w_tilde.size()),
                                           static_cast<Eigen::Index>(b.u_tilde.size()));
    for (std::size_t j = 0; j < b.w_tilde.size(); ++j)
      for (std::size_t i = 0; i < b.u_tilde.size(); ++i)
        b.raw_overlap(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = inner(b.w_tilde[j], b.u_tilde[i]);
    orthonormalize(b.w_tilde, b.u_tilde);
  }
  return out;
}

ChannelBasis channel_basis(double s, const ScalarHamiltonian& h, std::span<const BoundStateSet> bound,
                           const WaveOperatorConfig& cfg) {
  return channel_bases({s}, h, bound, cfg).front();
}

std::pair<ScalarField, ScalarField> project_channels(const ScalarField& f, const ChannelBasis& basis) {
  ScalarField p1(f.grid()), p2(f.grid());
  for (const auto& u : basis.u_tilde) p1.axpy(inner(f, u), u);
  for (const auto& w : basis.w_tilde) p2.axpy(inner(f, w), w);
  return {std::move(p1), std::move(p2)};
}

ScalarField project_scattering(const ScalarField& f, const ChannelBasis& basis) {
  auto [p1, p2] = project_channels(f, basis);
  ScalarField out = f;
  out -= p1;
  out -= p2;
  return out;
}

std::vector<double> transported_bound_content(const ScalarField& g, double t, const ScalarHamiltonian& h,
                                              std::span<const BoundStateSet> bound) {
  require(h.potentials.size() == bound.size(), ErrorCode::invalid_input,
          "need one bound-state set per potential");
  std::vector<double> out;
  for (std::size_t k = 0; k < bound.size(); ++k) {
    double acc = 0.0;
    for (const auto& u : bound[k].eigenfunctions)
      acc += std::norm(inner(g, galilei_inverse(u, rider(h.potentials[k], t))));
    out.push_back(std::sqrt(acc));
  }
  return out;
}

MixedNormSeries ac_residual(const ScalarField& f, double s, double t, const ScalarHamiltonian& h,
                            std::span<const BoundStateSet> bound, const StepperConfig& cfg) {
  MixedNormSeries series;
  StepperConfig step = cfg;
  step.keep_fields = false;
  auto observer = [&](double time, std::span<const ScalarField> states) {
    double total = 0.0;
    for (double c : transported_bound_content(states.front(), time, h, bound)) total += c;
    series.times.push_back(time);
    series.values.push_back(total);
  };
  propagate(h, f, s, t, step, observer);
  return series;
}

// ---------------------------------------------------------------------------

SpinorField stationary_to_lab(const SpinorField& stationary, const MatrixPotentialSpec& ms, double t) {
  const SpinorField unmodulated = modulation_inverse(stationary, {ms.alpha, ms.gamma, t});
  return vector_galilei_inverse(unmodulated, {ms.velocity, {0.0, 0.0, 0.0}, t});
}

SpinorField lab_to_stationary(const SpinorField& lab, const MatrixPotentialSpec& ms, double t) {
  return modulation(vector_galilei(lab, {ms.velocity, {0.0, 0.0, 0.0}, t}), {ms.alpha, ms.gamma, t});
}

std::size_t SpinorChannelBasis::size() const noexcept {
  std::size_t n = 0;
  for (const auto& r : right) n += r.size();
  return n;
}

SpinorChannelBasis matrix_channel_basis(double s, const MatrixHamiltonian& h,
                                        std::span<const MatrixSpectralData> spectra, const Grid& grid,
                                        const WaveOperatorConfig& cfg) {
  cfg.validate();
  h.validate();
  require(!h.stationary_frame, ErrorCode::invalid_input, "channel bases live in the lab frame");
  require(h.potentials.size() == spectra.size(), ErrorCode::invalid_input,
          "need one spectral data set per potential");
  require(s <= cfg.horizon, ErrorCode::invalid_parameter, "anchor time beyond the wave-operator horizon");

  SpinorChannelBasis b;
  b.anchor_time = s;
  const bool single = h.potentials.size() == 1;
  StepperConfig step = cfg.stepper;
  step.keep_fields = false;
  step.snapshot_every = 1 << 30;
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    const MatrixPotentialSpec& ms = h.potentials[k];
    const MatrixSpectralData& sd = spectra[k];
    std::vector<SpinorField> right, left;
    if (sd.right.cols() > 0) {
      const Eigen::MatrixXcd a = dense_matrix_operator(ms, grid);
      // Restriction of the operator to the generalized eigenspaces: A R = R C.
      const Eigen::MatrixXcd c = sd.left.adjoint() * a * sd.right;
      const Eigen::MatrixXcd tau_c = Complex(0.0, -(cfg.horizon - s)) * c;
      const Eigen::MatrixXcd evolved = single ? sd.right : Eigen::MatrixXcd(sd.right * tau_c.exp());
      for (Eigen::Index j = 0; j < sd.right.cols(); ++j) {
        if (single) {
          right.push_back(stationary_to_lab(spinor_from_vector(grid, evolved.col(j)), ms, s));
        } else {
          const SpinorField chi = stationary_to_lab(spinor_from_vector(grid, evolved.col(j)), ms, cfg.horizon);
          SpinorTrace tr = matrix_propagate(h, chi, cfg.horizon, s, step);
          for (const auto& f : tr.flags) b.flags.push_back(f);
          right.push_back(std::move(tr.final_state));
        }
        left.push_back(stationary_to_lab(spinor_from_vector(grid, sd.left.col(j)), ms, s));
      }
    }
    b.right.push_back(std::move(right));
    b.left.push_back(std::move(left));
  }

  const auto n = static_cast<Eigen::Index>(b.size());
  b.gram = Eigen::MatrixXcd::Zero(n, n);
  Eigen::Index i = 0;
  for (const auto& lk : b.left) {
    for (const auto& l : lk) {
      Eigen::Index j = 0;
      for (const auto& rk : b.right)
        for (const auto& r : rk) b.gram(i, j++) = inner(r, l);
      ++i;
    }
  }
  if (n > 0) b.biorthogonality_defect = (b.gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  return b;
}

std::vector<SpinorField> project_matrix_channels(const SpinorField& f, const SpinorChannelBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  std::vector<SpinorField> out;
  for (std::size_t k = 0; k < basis.right.size(); ++k) out.emplace_back(f.grid());
  if (n == 0) return out;
  Eigen::VectorXcd rhs(n);
  Eigen::Index i = 0;
  for (const auto& lk : basis.left)
    for (const auto& l : lk) rhs(i++) = inner(f, l);
  const Eigen::VectorXcd coef = basis.gram.fullPivLu().solve(rhs);
  Eigen::Index j = 0;
  for (std::size_t k = 0; k < basis.right.size(); ++k) {
    for (const auto& r : basis.right[k]) {
      out[k].first.axpy(coef(j), r.first);
      out[k].second.axpy(coef(j), r.second);
      ++j;
    }
  }
  return out;
}

SpinorField project_matrix_scattering(const SpinorField& f, const SpinorChannelBasis& basis) {
  SpinorField out = f;
  for (const auto& p : project_matrix_channels(f, basis)) {
    out.first -= p.first;
    out.second -= p.second;
  }
  return out;
}

}  // namespace ctlab

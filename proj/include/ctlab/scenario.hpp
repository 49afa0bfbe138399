#pragma once

// Scenario configuration (JSON, unknown keys rejected) and the runner that
// executes bound-state solves, basis construction, propagation and estimators.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctlab/datum.hpp"
#include "ctlab/estimators.hpp"
#include "ctlab/propagator.hpp"
#include "ctlab/scattering.hpp"

namespace ctlab {

using Json = nlohmann::ordered_json;

struct DatumRecipe {
  enum class Kind { gaussian, random_band_limited, bound_state_mixture, zero };
  Kind kind = Kind::gaussian;
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 momentum{0.0, 0.0, 0.0};
  double width = 2.0;
  double envelope = 3.0;
  BandLimit band;
  Normalization normalization = Normalization::l2;
  std::vector<Complex> coefficients;  // bound_state_mixture
  std::size_t potential = 0;          // bound_state_mixture: whose bound states
  double dilation = 1.0;
  Vec3 boost{0.0, 0.0, 0.0};          // Galilei velocity applied at the start time
  bool scattering_projected = false;
  std::uint64_t seed_offset = 0;
  double second_component = 0.0;      // matrix runs: psi_2 = this * conj(psi_1)
  int count = 1;                      // random recipes: copies with consecutive seeds
};

/// F(t, x) = amplitude exp(-(t - t_c)^2 / (2 d^2)) phi(x), phi an L2-normalized Gaussian.
struct SourceRecipe {
  Vec3 center{0.0, 0.0, 0.0};
  double width = 2.0;
  double time_center = 5.0;
  double duration = 1.0;
  double amplitude = 1.0;
  Rational dual_inverse_p = Rational::make(1, 2);  // the pair (p~, q~) its dual norm uses
};

struct EstimatorRequest {
  std::string kind;
  Json params;  // resolved parameters (defaults filled in)
  std::optional<double> expect_min;
  std::optional<double> expect_max;
};

struct Scenario {
  std::string name = "scenario";
  bool matrix = false;
  std::uint64_t seed = 1;
  int dim = 3;
  int points = 32;
  double half_length = 20.0;
  std::vector<MovingPotential> potentials;
  std::vector<MatrixPotentialSpec> matrix_potentials;
  std::vector<DatumRecipe> data;
  std::optional<SourceRecipe> source;
  double start = 0.0;
  double end = 10.0;
  StepperConfig stepper;
  WaveOperatorConfig wave_operator;
  int k_max = 8;
  double bound_tolerance = 1e-8;
  std::vector<EstimatorRequest> estimators;
  Json resolved;  // the full configuration with every default made explicit

  Grid grid() const { return Grid(dim, points, half_length); }
};

/// Parses one scenario object. Throws Error(validation) naming the offending key.
Scenario parse_scenario(const Json& j);
/// A file holds either one scenario object or {"scenarios": [...]}.
std::vector<Scenario> parse_config(const std::string& text);
std::vector<Scenario> load_config(const std::string& path);

/// Estimators run by each CLI preset when the config lists none.
std::vector<std::string> preset_estimators(const std::string& preset, bool matrix);
/// Replaces an empty estimator list by the preset (re-resolving parameters).
void apply_preset(Scenario& s, const std::string& preset);
void override_seed(Scenario& s, std::uint64_t seed);

struct ResultRow {
  std::string estimator;
  Json params;
  double value = 0.0;
  Json diag;
};

struct EstimatorError {
  std::string estimator;
  std::string message;
};

struct Assertion {
  std::string name;
  double value = 0.0;
  std::optional<double> min;
  std::optional<double> max;
  bool pass = false;
};

/// A time series for plotting, optionally with a fitted power law.
struct PlotSeries {
  std::string name;
  MixedNormSeries series;
  std::optional<DecayFit> fit;
};

struct RunReport {
  std::string scenario;
  Json config;
  std::vector<ResultRow> rows;
  std::vector<EstimatorError> errors;
  std::vector<Assertion> assertions;
  std::vector<PlotSeries> plots;
  Json diagnostics = Json::object();
  bool valid = true;  // every guard stayed green

  const ResultRow* find(const std::string& estimator) const noexcept;
  std::vector<const ResultRow*> find_all(const std::string& estimator) const;
};

/// Executes a scenario. Configuration problems throw Error(validation);
/// bound-state or basis failures propagate; individual estimator failures
/// become error entries in the report.
RunReport run_scenario(const Scenario& s);

}  // namespace ctlab

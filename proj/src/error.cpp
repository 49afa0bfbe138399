#include "ctlab/error.hpp"

namespace ctlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::grid_too_large: return "grid-too-large";
    case ErrorCode::horizon_too_small: return "horizon-too-small";
    case ErrorCode::degenerate_ratio: return "degenerate-ratio";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

SolverFailure::SolverFailure(const std::string& message, std::vector<double> residuals)
    : Error(ErrorCode::solver_failure, message), residuals_(std::move(residuals)) {}

HorizonTooSmall::HorizonTooSmall(const std::string& message, double tail,
                                 double suggested_horizon)
    : Error(ErrorCode::horizon_too_small, message), tail_(tail), suggested_(suggested_horizon) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace ctlab

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ctlab {

enum class ErrorCode {
  invalid_parameter = 1,
  invalid_input,
  solver_failure,
  grid_too_large,
  horizon_too_small,
  degenerate_ratio,
  validation,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Iterative eigensolver ran out of budget; carries the best residuals reached.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& message, std::vector<double> residuals);
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

// Wave-operator truncation tail exceeded its tolerance.
class HorizonTooSmall : public Error {
 public:
  HorizonTooSmall(const std::string& message, double tail, double suggested_horizon);
  double tail() const noexcept { return tail_; }
  double suggested_horizon() const noexcept { return suggested_; }

 private:
  double tail_;
  double suggested_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace ctlab

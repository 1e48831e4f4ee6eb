#ifndef GTDM_COMMON_HPP
#define GTDM_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gtdm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Bad user input: unknown environment/preset names, malformed config files,
// parameter values that violate a documented precondition.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed: singular system, eigensolver breakdown,
// fixed-point iteration that did not reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterate left the trust region (norm above the divergence guard) or
// became non-finite. Carries the step index at which the guard tripped.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& msg, long step)
      : NumericalError(msg + " at step " + std::to_string(step)), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterates whose norm exceeds this are treated as diverged. The stability
// results guarantee bounded iterates, so tripping it indicates a bad
// configuration rather than bad luck.
inline constexpr double kDivergenceGuard = 1e8;

}  // namespace gtdm

#endif

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace goose {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Vector>;

/// Raised when a caller breaks an operation's documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Kernel matrix stayed indefinite after the full jitter ladder.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or hyperparameter configuration. `path` names the
/// offending field, e.g. "gp.f.lengthscales[2]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class Phase { Active, Passive };

inline const char* to_string(Phase phase) {
  return phase == Phase::Active ? "active" : "passive";
}

inline Vector concat(const VectorRef& a, const VectorRef& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace goose

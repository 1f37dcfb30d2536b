#ifndef ASYBO_ERRORS_HPP
#define ASYBO_ERRORS_HPP

#include <Eigen/Core>

#include <sstream>
#include <stdexcept>
#include <string>

namespace asybo {

/// Two training points coincide; the covariance matrix would be singular.
class DuplicatePointError : public std::runtime_error {
 public:
  explicit DuplicatePointError(const std::string& what) : std::runtime_error(what) {}
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, Eigen::Index pivot)
      : std::runtime_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  Eigen::Index pivot() const { return pivot_; }

 private:
  Eigen::Index pivot_;
};

/// A quantity left the domain of a subsequent log/sqrt; signals conditioning failure.
class NumericalDomainError : public std::runtime_error {
 public:
  explicit NumericalDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// An objective returned a non-finite value; carries the offending point.
class ObjectiveEvaluationError : public std::runtime_error {
 public:
  ObjectiveEvaluationError(const std::string& what, const Eigen::VectorXd& at)
      : std::runtime_error(format(what, at)), point_(at) {}
  const Eigen::VectorXd& point() const { return point_; }

 private:
  static std::string format(const std::string& what, const Eigen::VectorXd& at) {
    std::ostringstream os;
    os << what << " at [";
    for (Eigen::Index i = 0; i < at.size(); ++i) os << (i ? ", " : "") << at[i];
    os << "]";
    return os.str();
  }
  Eigen::VectorXd point_;
};

/// Checkpoint file unreadable, truncated, or of an unsupported version.
class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration file or override rejected before any evaluation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Backend could not reach its execution platform for one submission.
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace asybo

#endif  // ASYBO_ERRORS_HPP

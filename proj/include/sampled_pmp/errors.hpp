#ifndef SAMPLED_PMP_ERRORS_HPP
#define SAMPLED_PMP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sampled_pmp {

/// Malformed arguments: wrong dimensions, nonpositive periods, violated
/// problem preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point that must lie in a set does not.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A requested case the library deliberately does not handle.
class UnsupportedCase : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// No admissible control can meet the terminal constraints.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node of an integrated arc became non-finite or exceeded the blow-up
/// bound.
class IntegrationBlowUp : public std::runtime_error {
 public:
  IntegrationBlowUp(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// An iterative method stopped without meeting its tolerance. Carries the
/// best iterate and its residual norm; `interval` is set for inner
/// (per-interval) failures and -1 otherwise.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, Eigen::VectorXd best_iterate,
                 double residual, int interval = -1,
                 std::vector<double> residual_history = {},
                 std::vector<std::string> active_sets = {})
      : std::runtime_error(what),
        best_iterate_(std::move(best_iterate)),
        residual_(residual),
        interval_(interval),
        residual_history_(std::move(residual_history)),
        active_sets_(std::move(active_sets)) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_iterate_; }
  double residual() const noexcept { return residual_; }
  int interval() const noexcept { return interval_; }
  const std::vector<double>& residual_history() const noexcept {
    return residual_history_;
  }
  /// Active-set signature of the controls at each outer iteration.
  const std::vector<std::string>& active_sets() const noexcept {
    return active_sets_;
  }

 private:
  Eigen::VectorXd best_iterate_;
  double residual_;
  int interval_;
  std::vector<double> residual_history_;
  std::vector<std::string> active_sets_;
};

/// A converged solve whose certificate fails. Never expected on built-ins.
class InternalInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sampled_pmp

#endif  // SAMPLED_PMP_ERRORS_HPP

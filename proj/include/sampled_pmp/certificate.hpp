#ifndef SAMPLED_PMP_CERTIFICATE_HPP
#define SAMPLED_PMP_CERTIFICATE_HPP

#include <optional>
#include <string>
#include <vector>

#include "sampled_pmp/problem.hpp"
#include "sampled_pmp/simulate.hpp"

namespace sampled_pmp {

inline constexpr double kDefaultCertificateTol = 1e-8;

struct IntervalResidual {
  int k = 0;
  double t = 0.0;
  /// Residual after normalising p0 to -1 (equal to raw when p0 is 0 or -1).
  double r = 0.0;
  double raw_r = 0.0;
  bool control_admissible = true;
};

/// Residuals of every necessary condition on a candidate extremal.
struct Certificate {
  double tol = kDefaultCertificateTol;
  std::vector<IntervalResidual> intervals;
  double transversality = 0.0;
  std::optional<double> free_time;
  /// Terminal-constraint violation of the trajectory itself.
  double feasibility = 0.0;
  bool nontrivial = true;
  /// Factor the residuals were divided by (|p0| for normal extremals).
  double normalization = 1.0;
  bool pass = false;
  std::vector<std::string> violations;

  double max_interval_residual() const;
};

/// Support gap of the averaged control gradient at u_k. For u_k outside the
/// control set the gap is taken at u_k and the distance to the set is added,
/// so the value stays positive.
double interval_residual(const ProblemDefinition& problem, const Extremal& extremal,
                         int k);

/// Residual of the adjoint boundary conditions for the canonical terminal
/// variants. The general variant needs the boundary states and a user
/// multiplier psi; without psi it throws UnsupportedCase.
double transversality_residual(const TerminalCondition& terminal, const Vector& p_start,
                               const Vector& p_end);
double transversality_residual(const TerminalCondition& terminal, const Vector& p_start,
                               const Vector& p_end, const Vector& q_start,
                               const Vector& q_end);

/// |H(tf, q(tf), p(tf), p0, u_kf)| with kf the final control index. Throws
/// UnsupportedCase for fixed-final-time problems.
double free_time_residual(const ProblemDefinition& problem, const Extremal& extremal);

Certificate check_certificate(const ProblemDefinition& problem, const Extremal& extremal,
                              double tol = kDefaultCertificateTol);

}  // namespace sampled_pmp

#endif  // SAMPLED_PMP_CERTIFICATE_HPP

#ifndef SAMPLED_PMP_SOLVER_HPP
#define SAMPLED_PMP_SOLVER_HPP

/**
 * @file
 * @brief Indirect shooting for optimal sampled-data control.
 *
 * The unknowns are p(0) (plus tf when free, plus q(0) for periodic
 * problems). For a given guess the extremal is integrated forward interval by
 * interval; on each interval the frozen control solves the averaged-gradient
 * variational inequality by projected fixed-point iteration, re-integrating
 * the interval arc at every iterate. An outer damped Newton iteration drives
 * the terminal residual to zero.
 */

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sampled_pmp/certificate.hpp"
#include "sampled_pmp/problem.hpp"
#include "sampled_pmp/simulate.hpp"

namespace sampled_pmp {

struct SolverConfig {
  /// Projected-ascent step; estimated from the first interval when unset.
  std::optional<double> inner_step;
  double inner_tol = 1e-12;
  int inner_max_iter = 200;
  double outer_tol = 1e-10;
  int outer_max_iter = 100;
  /// Forward-difference step is fd_relative_step * (1 + |x|).
  double fd_relative_step = 1e-6;
  int max_halvings = 30;
  int substeps = kDefaultSubsteps;
  /// Rank-one Broyden updates between finite-difference Jacobians.
  bool use_broyden = false;
  /// Regularised first step; applied automatically when the guess is zero.
  std::optional<bool> levenberg_first_step;
  /// Control used to start the first interval's inner iteration
  /// (projection of zero when unset).
  std::optional<Vector> initial_control;
  double certificate_tol = kDefaultCertificateTol;

  void validate() const;
};

/// Shooting unknowns, packed as [p(0), tf?, q(0)?].
struct ShootingUnknowns {
  Vector p_init;
  std::optional<double> tf;
  std::optional<Vector> q_init;

  Vector pack() const;
  /// Inverse of pack() for the layout a problem requires.
  static ShootingUnknowns unpack(const ProblemDefinition& problem, const Vector& packed);
  /// Layout-compatible default guess for the problem.
  static ShootingUnknowns initial_for(const ProblemDefinition& problem,
                                      std::optional<Vector> p_guess = std::nullopt);
};

/// Per-iteration record of the projected fixed-point iteration.
struct InnerTrace {
  std::vector<Vector> iterates;
  std::vector<double> step_norms;
};

/// Control u in Omega with |proj(u + step * Gbar(u)) - u| <= inner_tol, where
/// Gbar(u) averages d_u H over the arc re-integrated from (q_k, p_k) with u.
Vector solve_interval_control(const ProblemDefinition& problem, double t_k, double delta,
                              const Vector& q_k, const Vector& p_k, double p0,
                              const Vector& u_init, double step,
                              const SolverConfig& config, InnerTrace* trace = nullptr);

/// Step 1 / (2 L) with L a finite-difference estimate of the Lipschitz
/// constant of Gbar on the first interval; 1 when Gbar does not depend on u.
double estimate_inner_step(const ProblemDefinition& problem, const SamplingGrid& grid,
                           const ShootingUnknowns& unknowns, const SolverConfig& config);

/// Extremal obtained from one shot together with its residual vector.
struct Shot {
  Extremal extremal;
  Vector residual;
};

/// Integrates forward from the unknowns, solving each interval's control
/// (warm-started from the previous one). grid supplies T, and tf unless the
/// final time is free.
Shot shoot(const ProblemDefinition& problem, const SamplingGrid& grid,
           const ShootingUnknowns& unknowns, const SolverConfig& config,
           double inner_step);

Vector shooting_residual(const ProblemDefinition& problem, const SamplingGrid& grid,
                         const ShootingUnknowns& unknowns, const SolverConfig& config);

// ---------------------------------------------------------------------------
// Damped Newton on a square residual map.

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double fd_relative_step = 1e-6;
  int max_halvings = 30;
  bool use_broyden = false;
  bool levenberg_first_step = false;
  /// Called after each accepted step; may move the iterate (returns true if
  /// it did, which forces a fresh Jacobian).
  std::function<bool(Vector&)> adjust;
  /// Describes the iterate for failure reports (e.g. active-set signature).
  std::function<std::string(const Vector&)> describe;
};

struct NewtonReport {
  Vector solution;
  Vector residual;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> residual_history;
  std::vector<std::string> signatures;
};

/// Steps are shortened to at most 1 + |x|. Throws NonConvergence when no step
/// decreases |F| after max_halvings or the iteration budget runs out.
NewtonReport newton_solve(const std::function<Vector(const Vector&)>& residual,
                          const Vector& x0, const NewtonOptions& options);

struct SolveResult {
  Extremal extremal;
  Certificate certificate;
  ShootingUnknowns unknowns;
  NewtonReport report;
  double inner_step = 0.0;
};

/// Damped Newton on shooting_residual, normal case p0 = -1. Throws
/// NonConvergence on stagnation, UnsupportedCase for general terminal data,
/// and InternalInconsistency if the converged extremal fails its certificate.
SolveResult solve(const ProblemDefinition& problem, const SamplingGrid& grid,
                  const ShootingUnknowns& initial, const SolverConfig& config = {});

/// "-0+" style signature of which box bounds the controls touch.
std::string active_set_signature(const ControlSet& set, const ControlSequence& controls);

}  // namespace sampled_pmp

#endif  // SAMPLED_PMP_SOLVER_HPP

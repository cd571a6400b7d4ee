#ifndef SAMPLED_PMP_PARKING_HPP
#define SAMPLED_PMP_PARKING_HPP

/**
 * @file
 * @brief Minimum-energy parking of a double integrator.
 *
 * q1' = q2, q2' = u, |u| <= 1, (q1, q2)(0) = (M, 0), (q1, q2)(tf) = 0,
 * minimise int u^2. With p0 = -1 the adjoint is p1 constant and
 * p2(t) = p1 (tf - t) + p2(tf), so each sampled control is the clamped root
 * of an affine function of the pair (p1, p2(tf)).
 */

#include <string>
#include <vector>

#include "sampled_pmp/certificate.hpp"
#include "sampled_pmp/problem.hpp"
#include "sampled_pmp/simulate.hpp"
#include "sampled_pmp/solver.hpp"

namespace sampled_pmp::parking {

enum class Regime { kConstrained, kUnconstrained };

/// Validated (M, tf, T). Requires M > 0, T > 0 and tf^2 > 4M.
class Instance {
 public:
  Instance(double M, double tf, double T);

  double M() const { return M_; }
  double tf() const { return tf_; }
  double T() const { return T_; }
  Regime regime() const;
  SamplingGrid grid() const { return build_grid(tf_, T_); }

 private:
  double M_, tf_, T_;
};

/// Constrained iff 4M < tf^2 < 6M. Throws InvalidArgument when tf^2 <= 4M.
Regime classify(double M, double tf);

/// Optimal permanent (continuous-time) control u*(t).
double permanent_control(double M, double tf, double t);

/// t1 = (tf - sqrt(3 (tf^2 - 4M))) / 2; constrained regime only.
double switching_time(double M, double tf);

/// int_0^tf u*(t)^2 dt in closed form.
double permanent_cost(double M, double tf);

struct Multipliers {
  double p1 = 0.0;
  /// p2(tf)
  double p2f = 0.0;
};

/// Multipliers of the unconstrained permanent solution:
/// p1 = -24 M / tf^3, p2(tf) = 12 M / tf^2.
Multipliers permanent_multipliers(double M, double tf);

/// p(0) for the given multipliers.
Vector adjoint_at_zero(const Multipliers& mult, double tf);

/// Gamma_k(x) = -2x + p1 (tf - kT - T/2) + p2(tf).
double gamma(int k, double x, double p1, double p2f, double tf, double T);

/// Clamped roots of the averaged gradient: u_k = clamp((p1 c_k + p2f) / 2)
/// with c_k = tf - kT - delta_k / 2.
ControlSequence sampled_control_from_multipliers(double p1, double p2f,
                                                 const SamplingGrid& grid);

/// Exact double-integrator propagation to (q1(tf), q2(tf)).
Vector shooting_map(double p1, double p2f, double M, const SamplingGrid& grid);

/// sup_k |u_k - u*(t_k + delta_k / 2)|.
double sup_deviation(double M, double tf, const SamplingGrid& grid,
                     const ControlSequence& controls);

struct Solution {
  ControlSequence controls;
  Multipliers multipliers;
  Extremal extremal;
  Certificate certificate;
  NewtonReport report;
  double terminal_residual = 0.0;
  double cost = 0.0;
  /// False when the generic shooting solver was used (tf not a multiple of T).
  bool closed_form = true;
};

/// Newton on the two-unknown shooting map, seeded with the permanent
/// multipliers; falls back to the generic solver when tf is not a multiple
/// of T. Throws NonConvergence (e.g. K = 1) and InvalidArgument.
Solution solve(double M, double tf, double T, const SolverConfig& config = {});

struct QpResult {
  std::vector<double> controls;
  double cost = 0.0;
};

/// Global minimiser of sum_k T u_k^2 subject to both terminal constraints and
/// (when box is set) |u_k| <= 1, by enumeration of the 3^K active sets
/// (K <= 12). Without the box the 2x2 normal equations give the least-norm
/// point for any K. Throws Infeasible.
QpResult qp_oracle(double M, double tf, double T, bool box = true);

struct SweepRow {
  double T = 0.0;
  int K = 0;
  double sup_dev = 0.0;
  double terminal_residual = 0.0;
  double max_pmp_residual = 0.0;
  double cost_sampled = 0.0;
  double cost_permanent = 0.0;
  std::string status = "ok";
  ControlSequence controls;
};

/// Solves every period in parallel (worker pool sized to the hardware);
/// failures are reported in the row status.
std::vector<SweepRow> sweep(double M, double tf, const std::vector<double>& periods,
                            const SolverConfig& config = {});

}  // namespace sampled_pmp::parking

#endif  // SAMPLED_PMP_PARKING_HPP

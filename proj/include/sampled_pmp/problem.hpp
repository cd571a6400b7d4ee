#ifndef SAMPLED_PMP_PROBLEM_HPP
#define SAMPLED_PMP_PROBLEM_HPP

/**
 * @file
 * @brief Problem data model for optimal sampled-data control.
 *
 * A problem is
 *
 *   minimise   int_0^tf f0(t, q(t), u_k) dt,     k = E(t / T)
 *   subject to q'(t) = f(t, q(t), u_k),          u_k in Omega,
 *              terminal condition on (q(0), q(tf)),
 *
 * where the control is frozen on each sampling interval [kT, (k+1)T) and
 * the last interval may be shorter than T.
 */

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace sampled_pmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One control value per controlling time.
using ControlSequence = std::vector<Vector>;

/// Tolerance under which t / T is snapped to the nearest integer.
inline constexpr double kIndexSnap = 1e-9;

/// Closed convex subset of R^d: an axis-aligned box or a Euclidean ball.
class ConvexSet {
 public:
  struct Box {
    Vector lower;
    Vector upper;
  };
  struct Ball {
    Vector center;
    double radius;
  };

  static ConvexSet box(Vector lower, Vector upper);
  static ConvexSet ball(Vector center, double radius);
  /// Box [lo, hi]^dim.
  static ConvexSet uniform_box(int dim, double lo, double hi);

  int dim() const;
  bool is_box() const { return std::holds_alternative<Box>(shape_); }
  const Box& as_box() const { return std::get<Box>(shape_); }
  const Ball& as_ball() const { return std::get<Ball>(shape_); }

  bool contains(const Vector& u, double tol = 1e-12) const;
  /// Euclidean projection.
  Vector project(const Vector& u) const;
  double distance(const Vector& u) const { return (project(u) - u).norm(); }

  /// max over y in the set of <g, y - u>. Zero exactly when the variational
  /// inequality <g, y - u> <= 0 holds for every y. Throws DomainError when
  /// u is outside the set.
  double support_gap(const Vector& g, const Vector& u) const;
  /// Same value without the membership check; may be negative outside.
  double support_gap_unchecked(const Vector& g, const Vector& u) const;
  /// Box only: the per-coordinate terms whose sum is support_gap.
  Vector support_gap_components(const Vector& g, const Vector& u) const;

 private:
  explicit ConvexSet(std::variant<Box, Ball> shape) : shape_(std::move(shape)) {}
  std::variant<Box, Ball> shape_;
};

using ControlSet = ConvexSet;

/// q(0) = q0 and q(tf) = qf.
struct FixedEndpoints {
  Vector q0;
  Vector qf;
};

/// q(0) = q0, q(tf) free; forces p(tf) = 0.
struct FixedInitialFreeFinal {
  Vector q0;
};

/// q(0) = q(tf). q(0) is a shooting unknown; q0_guess seeds it.
struct Periodic {
  Vector q0_guess;
};

/// g(q(0), q(tf)) in S. Stored for verification only; the shooting solver
/// does not handle it. psi, when given, is the multiplier used in the
/// transversality residual.
struct GeneralTerminal {
  int j = 0;
  std::function<Vector(const Vector&, const Vector&)> g;
  std::function<Matrix(const Vector&, const Vector&)> jac_first;
  std::function<Matrix(const Vector&, const Vector&)> jac_second;
  ConvexSet target = ConvexSet::uniform_box(1, 0.0, 0.0);
  std::optional<Vector> psi;
};

using TerminalCondition =
    std::variant<FixedEndpoints, FixedInitialFreeFinal, Periodic, GeneralTerminal>;

struct FixedFinalTime {
  double tf;
};
struct FreeFinalTime {
  double tf_guess;
};
using FinalTimeMode = std::variant<FixedFinalTime, FreeFinalTime>;

/// Dynamics, running cost and their first derivatives. All callables take
/// (t, q, u).
struct ProblemDefinition {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;

  std::function<Vector(double, const Vector&, const Vector&)> dynamics;
  std::function<Matrix(double, const Vector&, const Vector&)> dynamics_jac_q;
  std::function<Matrix(double, const Vector&, const Vector&)> dynamics_jac_u;

  std::function<double(double, const Vector&, const Vector&)> running_cost;
  std::function<Vector(double, const Vector&, const Vector&)> cost_grad_q;
  std::function<Vector(double, const Vector&, const Vector&)> cost_grad_u;

  ControlSet control_set = ConvexSet::uniform_box(1, -1.0, 1.0);
  TerminalCondition terminal = FixedInitialFreeFinal{};
  FinalTimeMode final_time_mode = FixedFinalTime{1.0};

  /// Throws InvalidArgument on missing callables or inconsistent sizes.
  void validate() const;

  bool free_final_time() const {
    return std::holds_alternative<FreeFinalTime>(final_time_mode);
  }
  /// tf when fixed, the initial guess when free.
  double nominal_final_time() const;
};

/// Sampling grid on [0, tf]: controlling times kT < tf and interval lengths
/// min(T, tf - kT).
class SamplingGrid {
 public:
  /// Empty grid (no intervals).
  SamplingGrid() = default;
  SamplingGrid(double period, double final_time);

  double period() const { return period_; }
  double final_time() const { return final_time_; }
  int size() const { return static_cast<int>(starts_.size()); }
  double start(int k) const { return starts_.at(k); }
  double length(int k) const { return lengths_.at(k); }
  const std::vector<double>& controlling_times() const { return starts_; }
  const std::vector<double>& lengths() const { return lengths_; }
  /// True when tf is an integer multiple of T (up to the index snap).
  bool uniform() const;

 private:
  double period_ = 0.0;
  double final_time_ = 0.0;
  std::vector<double> starts_;
  std::vector<double> lengths_;
};

/// E(t / T), with t / T snapped to an integer when within kIndexSnap.
int floor_index(double t, double period);

/// Index of the interval that holds tf: E(tf/T) - 1 when tf is a multiple of
/// T, E(tf/T) otherwise.
int final_control_index(double tf, double period);

SamplingGrid build_grid(double tf, double period);

/// <p, f> + p0 f0.
double hamiltonian(const ProblemDefinition& problem, double t, const Vector& q,
                   const Vector& p, double p0, const Vector& u);
Vector hamiltonian_grad_q(const ProblemDefinition& problem, double t,
                          const Vector& q, const Vector& p, double p0,
                          const Vector& u);
Vector hamiltonian_grad_u(const ProblemDefinition& problem, double t,
                          const Vector& q, const Vector& p, double p0,
                          const Vector& u);

/// Residual of the terminal constraint: zero iff (q_start, q_end) is
/// admissible.
double terminal_feasibility(const TerminalCondition& terminal,
                            const Vector& q_start, const Vector& q_end);

/// Initial state fixed by the terminal condition, or nullopt (periodic).
std::optional<Vector> fixed_initial_state(const TerminalCondition& terminal);

std::string terminal_variant_name(const TerminalCondition& terminal);

}  // namespace sampled_pmp

#endif  // SAMPLED_PMP_PROBLEM_HPP

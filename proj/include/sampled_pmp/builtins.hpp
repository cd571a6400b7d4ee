#ifndef SAMPLED_PMP_BUILTINS_HPP
#define SAMPLED_PMP_BUILTINS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sampled_pmp/problem.hpp"

namespace sampled_pmp {

/// Linear dynamics q' = A q + B u with running cost c + q'Qq + u'Ru.
struct LtiData {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  double constant_cost = 0.0;
};

ProblemDefinition make_lti(const std::string& name, const LtiData& data,
                           ControlSet control_set, TerminalCondition terminal,
                           FinalTimeMode final_time);

/// Double integrator q1' = q2, q2' = u, u in [-1, 1], cost int u^2, from
/// (M, 0) to the origin at fixed tf.
ProblemDefinition make_parking(double M, double tf);

/// Same dynamics and cost with the final state left free.
ProblemDefinition make_parking_free_end(double M, double tf);

/// Parking with cost int (w + u^2) and free final time.
ProblemDefinition make_parking_time_energy(double M, double weight, double tf_guess);

/// Damped oscillator forced by cos(t): q1' = q2, q2' = -q1 - c q2 + u + cos t,
/// u in [-bound, bound], cost int q1^2 + u^2, periodic over [0, tf].
ProblemDefinition make_forced_oscillator(double damping, double bound, double tf);

/// Pendulum q1' = q2, q2' = -sin q1 + u, cost int u^2, fixed endpoints.
ProblemDefinition make_pendulum(const Vector& q0, const Vector& qf, double bound,
                                double tf);

/// Named built-in problems with numeric parameters; unknown names or
/// parameters throw InvalidArgument.
struct BuiltinRequest {
  std::string name;
  std::map<std::string, double> params;
  double tf = 0.0;
};

ProblemDefinition make_builtin(const BuiltinRequest& request);
std::vector<std::string> builtin_names();

/// Initial shooting guess for p(0) on built-ins, when one is known.
std::optional<Vector> builtin_adjoint_guess(const BuiltinRequest& request);

}  // namespace sampled_pmp

#endif  // SAMPLED_PMP_BUILTINS_HPP

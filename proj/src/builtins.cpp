#include "sampled_pmp/builtins.hpp"

#include <cmath>

#include "sampled_pmp/errors.hpp"

namespace sampled_pmp {

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec1(double a) { return Vector::Constant(1, a); }

// Double integrator with energy cost c + u^2, shared by the parking family.
ProblemDefinition double_integrator(std::string name, double constant_cost) {
  ProblemDefinition p;
  p.name = std::move(name);
  p.state_dim = 2;
  p.control_dim = 1;
  p.dynamics = [](double, const Vector& q, const Vector& u) { return vec2(q[1], u[0]); };
  p.dynamics_jac_q = [](double, const Vector&, const Vector&) {
    Matrix J = Matrix::Zero(2, 2);
    J(0, 1) = 1.0;
    return J;
  };
  p.dynamics_jac_u = [](double, const Vector&, const Vector&) {
    Matrix J = Matrix::Zero(2, 1);
    J(1, 0) = 1.0;
    return J;
  };
  p.running_cost = [constant_cost](double, const Vector&, const Vector& u) {
    return constant_cost + u[0] * u[0];
  };
  p.cost_grad_q = [](double, const Vector&, const Vector&) { return Vector::Zero(2).eval(); };
  p.cost_grad_u = [](double, const Vector&, const Vector& u) { return vec1(2.0 * u[0]); };
  p.control_set = ConvexSet::uniform_box(1, -1.0, 1.0);
  return p;
}

double param(const BuiltinRequest& r, const std::string& key, double fallback) {
  auto it = r.params.find(key);
  return it == r.params.end() ? fallback : it->second;
}

void reject_unknown(const BuiltinRequest& r, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : r.params) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw InvalidArgument("problem '" + r.name + "' has no parameter '" + key + "'");
    }
  }
}

}  // namespace

ProblemDefinition make_lti(const std::string& name, const LtiData& data,
                           ControlSet control_set, TerminalCondition terminal,
                           FinalTimeMode final_time) {
  const auto n = data.A.rows();
  const auto m = data.B.cols();
  if (data.A.cols() != n || data.B.rows() != n) {
    throw InvalidArgument("lti: A must be n x n and B n x m");
  }
  if (data.Q.rows() != n || data.Q.cols() != n || data.R.rows() != m ||
      data.R.cols() != m) {
    throw InvalidArgument("lti: Q must be n x n and R m x m");
  }
  ProblemDefinition p;
  p.name = name;
  p.state_dim = static_cast<int>(n);
  p.control_dim = static_cast<int>(m);
  const Matrix A = data.A, B = data.B, Q = data.Q, R = data.R;
  const Matrix Qs = Q + Q.transpose(), Rs = R + R.transpose();
  const double c = data.constant_cost;
  p.dynamics = [A, B](double, const Vector& q, const Vector& u) -> Vector {
    return A * q + B * u;
  };
  p.dynamics_jac_q = [A](double, const Vector&, const Vector&) { return A; };
  p.dynamics_jac_u = [B](double, const Vector&, const Vector&) { return B; };
  p.running_cost = [Q, R, c](double, const Vector& q, const Vector& u) {
    return c + q.dot(Q * q) + u.dot(R * u);
  };
  p.cost_grad_q = [Qs](double, const Vector& q, const Vector&) -> Vector { return Qs * q; };
  p.cost_grad_u = [Rs](double, const Vector&, const Vector& u) -> Vector { return Rs * u; };
  p.control_set = std::move(control_set);
  p.terminal = std::move(terminal);
  p.final_time_mode = final_time;
  p.validate();
  return p;
}

ProblemDefinition make_parking(double M, double tf) {
  ProblemDefinition p = double_integrator("parking", 0.0);
  p.terminal = FixedEndpoints{vec2(M, 0.0), vec2(0.0, 0.0)};
  p.final_time_mode = FixedFinalTime{tf};
  p.validate();
  return p;
}

ProblemDefinition make_parking_free_end(double M, double tf) {
  ProblemDefinition p = double_integrator("parking_free_end", 0.0);
  p.terminal = FixedInitialFreeFinal{vec2(M, 0.0)};
  p.final_time_mode = FixedFinalTime{tf};
  p.validate();
  return p;
}

ProblemDefinition make_parking_time_energy(double M, double weight, double tf_guess) {
  if (!(weight > 0.0)) throw InvalidArgument("parking_time_energy: weight must be > 0");
  ProblemDefinition p = double_integrator("parking_time_energy", weight);
  p.terminal = FixedEndpoints{vec2(M, 0.0), vec2(0.0, 0.0)};
  p.final_time_mode = FreeFinalTime{tf_guess};
  p.validate();
  return p;
}

ProblemDefinition make_forced_oscillator(double damping, double bound, double tf) {
  ProblemDefinition p;
  p.name = "forced_oscillator";
  p.state_dim = 2;
  p.control_dim = 1;
  p.dynamics = [damping](double t, const Vector& q, const Vector& u) {
    return vec2(q[1], -q[0] - damping * q[1] + u[0] + std::cos(t));
  };
  p.dynamics_jac_q = [damping](double, const Vector&, const Vector&) {
    Matrix J(2, 2);
    J << 0.0, 1.0, -1.0, -damping;
    return J;
  };
  p.dynamics_jac_u = [](double, const Vector&, const Vector&) {
    Matrix J = Matrix::Zero(2, 1);
    J(1, 0) = 1.0;
    return J;
  };
  p.running_cost = [](double, const Vector& q, const Vector& u) {
    return q[0] * q[0] + u[0] * u[0];
  };
  p.cost_grad_q = [](double, const Vector& q, const Vector&) { return vec2(2.0 * q[0], 0.0); };
  p.cost_grad_u = [](double, const Vector&, const Vector& u) { return vec1(2.0 * u[0]); };
  p.control_set = ConvexSet::uniform_box(1, -bound, bound);
  p.terminal = Periodic{vec2(0.0, 0.0)};
  p.final_time_mode = FixedFinalTime{tf};
  p.validate();
  return p;
}

ProblemDefinition make_pendulum(const Vector& q0, const Vector& qf, double bound,
                                double tf) {
  ProblemDefinition p;
  p.name = "pendulum";
  p.state_dim = 2;
  p.control_dim = 1;
  p.dynamics = [](double, const Vector& q, const Vector& u) {
    return vec2(q[1], -std::sin(q[0]) + u[0]);
  };
  p.dynamics_jac_q = [](double, const Vector& q, const Vector&) {
    Matrix J(2, 2);
    J << 0.0, 1.0, -std::cos(q[0]), 0.0;
    return J;
  };
  p.dynamics_jac_u = [](double, const Vector&, const Vector&) {
    Matrix J = Matrix::Zero(2, 1);
    J(1, 0) = 1.0;
    return J;
  };
  p.running_cost = [](double, const Vector&, const Vector& u) { return u[0] * u[0]; };
  p.cost_grad_q = [](double, const Vector&, const Vector&) { return Vector::Zero(2).eval(); };
  p.cost_grad_u = [](double, const Vector&, const Vector& u) { return vec1(2.0 * u[0]); };
  p.control_set = ConvexSet::uniform_box(1, -bound, bound);
  p.terminal = FixedEndpoints{q0, qf};
  p.final_time_mode = FixedFinalTime{tf};
  p.validate();
  return p;
}

std::vector<std::string> builtin_names() {
  return {"parking", "parking_free_end", "parking_time_energy", "forced_oscillator",
          "pendulum"};
}

ProblemDefinition make_builtin(const BuiltinRequest& r) {
  if (!(r.tf > 0.0)) throw InvalidArgument("final time must be positive");
  if (r.name == "parking") {
    reject_unknown(r, {"M"});
    const double M = param(r, "M", 2.0);
    if (!(M > 0.0)) throw InvalidArgument("parking: M must be positive");
    return make_parking(M, r.tf);
  }
  if (r.name == "parking_free_end") {
    reject_unknown(r, {"M"});
    return make_parking_free_end(param(r, "M", 2.0), r.tf);
  }
  if (r.name == "parking_time_energy") {
    reject_unknown(r, {"M", "w"});
    return make_parking_time_energy(param(r, "M", 2.0), param(r, "w", 1.0), r.tf);
  }
  if (r.name == "forced_oscillator") {
    reject_unknown(r, {"damping", "bound"});
    return make_forced_oscillator(param(r, "damping", 0.5), param(r, "bound", 2.0), r.tf);
  }
  if (r.name == "pendulum") {
    reject_unknown(r, {"theta0", "thetaf", "bound"});
    return make_pendulum(vec2(param(r, "theta0", 0.0), 0.0),
                         vec2(param(r, "thetaf", 1.0), 0.0), param(r, "bound", 2.0),
                         r.tf);
  }
  throw InvalidArgument("unknown built-in problem '" + r.name + "'");
}

std::optional<Vector> builtin_adjoint_guess(const BuiltinRequest& r) {
  if (r.name == "parking" || r.name == "parking_time_energy") {
    // Multipliers of the unconstrained permanent solution, mapped to p(0).
    const double M = param(r, "M", 2.0);
    const double tf = r.tf;
    const double p1 = -24.0 * M / (tf * tf * tf);
    const double p2f = 12.0 * M / (tf * tf);
    return vec2(p1, p1 * tf + p2f);
  }
  if (r.name == "parking_free_end") return Vector::Zero(2).eval();
  return std::nullopt;
}

}  // namespace sampled_pmp

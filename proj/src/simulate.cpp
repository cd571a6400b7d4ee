#include "sampled_pmp/simulate.hpp"

#include <cmath>
#include <string>

#include "sampled_pmp/errors.hpp"

namespace sampled_pmp {

namespace {

void guard(const Vector& v, double t) {
  if (!v.allFinite() || v.norm() > kBlowUpBound) {
    throw IntegrationBlowUp("integration blow-up at t = " + std::to_string(t), t);
  }
}

// One RK4 step of the state and, when p is non-null, of the adjoint
// p' = -d_q H. The state stages never read p, so the state update is the
// same sequence of operations with or without the adjoint.
void rk4_step(const ProblemDefinition& pb, double t, double h, const Vector& u,
              Vector& q, Vector* p, double p0) {
  const double half = 0.5 * h;
  const Vector k1 = pb.dynamics(t, q, u);
  const Vector q2 = q + half * k1;
  const Vector k2 = pb.dynamics(t + half, q2, u);
  const Vector q3 = q + half * k2;
  const Vector k3 = pb.dynamics(t + half, q3, u);
  const Vector q4 = q + h * k3;
  const Vector k4 = pb.dynamics(t + h, q4, u);
  if (p != nullptr) {
    const Vector& pv = *p;
    const Vector l1 = -hamiltonian_grad_q(pb, t, q, pv, p0, u);
    const Vector l2 = -hamiltonian_grad_q(pb, t + half, q2, pv + half * l1, p0, u);
    const Vector l3 = -hamiltonian_grad_q(pb, t + half, q3, pv + half * l2, p0, u);
    const Vector l4 = -hamiltonian_grad_q(pb, t + h, q4, pv + h * l3, p0, u);
    *p = pv + (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
  }
  q = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_interval_args(double delta, int substeps) {
  if (!(delta > 0.0)) throw InvalidArgument("interval length must be positive");
  if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
}

void check_controls(const ProblemDefinition& problem, const SamplingGrid& grid,
                    const ControlSequence& controls, MembershipCheck check) {
  if (static_cast<int>(controls.size()) != grid.size()) {
    throw InvalidArgument("expected " + std::to_string(grid.size()) +
                          " controls, got " + std::to_string(controls.size()));
  }
  for (std::size_t k = 0; k < controls.size(); ++k) {
    if (controls[k].size() != problem.control_dim) {
      throw InvalidArgument("control " + std::to_string(k) + " has wrong dimension");
    }
    if (check == MembershipCheck::kEnforce && !problem.control_set.contains(controls[k])) {
      throw DomainError("control " + std::to_string(k) + " is outside the control set");
    }
  }
}

void check_simpson_substeps(int substeps) {
  if (substeps < 2 || substeps % 2 != 0) {
    throw InvalidArgument("substeps must be even (Simpson quadrature on the nodes)");
  }
}

// Shared driver for simulate() and integrate_extremal_forward().
ExtremalInterval run_interval(const ProblemDefinition& pb, double t_start, double delta,
                              const Vector& q_start, const Vector* p_start, double p0,
                              const Vector& u, int substeps) {
  check_interval_args(delta, substeps);
  const double h = delta / substeps;
  ExtremalInterval out;
  out.nodes.t.reserve(substeps + 1);
  out.nodes.q.reserve(substeps + 1);
  Vector q = q_start;
  Vector p = p_start ? *p_start : Vector();
  out.nodes.t.push_back(t_start);
  out.nodes.q.push_back(q);
  if (p_start) out.p.push_back(p);
  for (int i = 0; i < substeps; ++i) {
    const double t = t_start + i * h;
    rk4_step(pb, t, h, u, q, p_start ? &p : nullptr, p0);
    const double t_next = i + 1 == substeps ? t_start + delta : t_start + (i + 1) * h;
    guard(q, t_next);
    out.nodes.t.push_back(t_next);
    out.nodes.q.push_back(q);
    if (p_start) {
      guard(p, t_next);
      out.p.push_back(p);
    }
  }
  return out;
}

double interval_cost(const ProblemDefinition& pb, const IntervalNodes& nodes,
                     const Vector& u, double h) {
  std::vector<double> f0(nodes.t.size());
  for (std::size_t i = 0; i < f0.size(); ++i) {
    f0[i] = pb.running_cost(nodes.t[i], nodes.q[i], u);
  }
  return simpson(f0, h);
}

}  // namespace

double simpson(const std::vector<double>& values, double h) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) {
    throw InvalidArgument("simpson: need an odd number (>= 3) of samples");
  }
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) (i % 2 ? odd : even) += values[i];
  return h / 3.0 * (values.front() + 4.0 * odd + 2.0 * even + values.back());
}

IntervalNodes integrate_interval(const ProblemDefinition& problem, double t_start,
                                 double delta, const Vector& q_start, const Vector& u,
                                 int substeps) {
  if (q_start.size() != problem.state_dim || u.size() != problem.control_dim) {
    throw InvalidArgument("integrate_interval: dimension mismatch");
  }
  return run_interval(problem, t_start, delta, q_start, nullptr, 0.0, u, substeps).nodes;
}

ExtremalInterval integrate_extremal_interval(const ProblemDefinition& problem,
                                             double t_start, double delta,
                                             const Vector& q_start, const Vector& p_start,
                                             double p0, const Vector& u, int substeps) {
  if (q_start.size() != problem.state_dim || p_start.size() != problem.state_dim ||
      u.size() != problem.control_dim) {
    throw InvalidArgument("integrate_extremal_interval: dimension mismatch");
  }
  return run_interval(problem, t_start, delta, q_start, &p_start, p0, u, substeps);
}

Trajectory simulate(const ProblemDefinition& problem, const SamplingGrid& grid,
                    const ControlSequence& controls, const Vector& q0, int substeps) {
  check_simpson_substeps(substeps);
  check_controls(problem, grid, controls, MembershipCheck::kEnforce);
  if (q0.size() != problem.state_dim) throw InvalidArgument("simulate: q0 dimension");
  Trajectory traj;
  traj.intervals.reserve(grid.size());
  Vector q = q0;
  for (int k = 0; k < grid.size(); ++k) {
    const double delta = grid.length(k);
    IntervalNodes nodes =
        run_interval(problem, grid.start(k), delta, q, nullptr, 0.0, controls[k], substeps)
            .nodes;
    traj.cost += interval_cost(problem, nodes, controls[k], delta / substeps);
    q = nodes.q.back();
    traj.intervals.push_back(std::move(nodes));
  }
  return traj;
}

Extremal integrate_extremal_forward(const ProblemDefinition& problem,
                                    const SamplingGrid& grid,
                                    const ControlSequence& controls, const Vector& q0,
                                    const Vector& p_init, double p0, int substeps,
                                    MembershipCheck check) {
  check_simpson_substeps(substeps);
  check_controls(problem, grid, controls, check);
  if (q0.size() != problem.state_dim || p_init.size() != problem.state_dim) {
    throw InvalidArgument("integrate_extremal_forward: q0/p0 dimension");
  }
  if (p0 != -1.0 && p0 != 0.0) {
    throw InvalidArgument("integrate_extremal_forward: p0 must be -1 or 0");
  }
  Extremal ex{grid, controls, {}, {}};
  ex.adjoint.p0 = p0;
  ex.trajectory.intervals.reserve(grid.size());
  ex.adjoint.p.reserve(grid.size());
  Vector q = q0;
  Vector p = p_init;
  for (int k = 0; k < grid.size(); ++k) {
    const double delta = grid.length(k);
    ExtremalInterval arc =
        run_interval(problem, grid.start(k), delta, q, &p, p0, controls[k], substeps);
    ex.trajectory.cost += interval_cost(problem, arc.nodes, controls[k], delta / substeps);
    q = arc.nodes.q.back();
    p = arc.p.back();
    ex.trajectory.intervals.push_back(std::move(arc.nodes));
    ex.adjoint.p.push_back(std::move(arc.p));
  }
  return ex;
}

Vector interval_average_gradient(const ProblemDefinition& problem,
                                 const ExtremalInterval& arc, double p0, const Vector& u) {
  const auto& t = arc.nodes.t;
  const std::size_t n = t.size();
  const double delta = t.back() - t.front();
  const double h = delta / static_cast<double>(n - 1);
  Vector out = Vector::Zero(problem.control_dim);
  std::vector<double> column(n);
  Matrix grads(problem.control_dim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    grads.col(static_cast<Eigen::Index>(i)) =
        hamiltonian_grad_u(problem, t[i], arc.nodes.q[i], arc.p[i], p0, u);
  }
  for (int j = 0; j < problem.control_dim; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = grads(j, static_cast<Eigen::Index>(i));
    out[j] = simpson(column, h) / delta;
  }
  return out;
}

namespace {
void check_index(const Extremal& ex, int k) {
  if (k < 0 || k >= ex.grid.size()) {
    throw InvalidArgument("interval index " + std::to_string(k) + " out of range");
  }
}
}  // namespace

Vector average_u_gradient(const ProblemDefinition& problem, const Extremal& extremal,
                          int k) {
  check_index(extremal, k);
  ExtremalInterval arc{extremal.trajectory.intervals[k], extremal.adjoint.p[k]};
  return interval_average_gradient(problem, arc, extremal.adjoint.p0, extremal.controls[k]);
}

double average_hamiltonian(const ProblemDefinition& problem, const Extremal& extremal,
                           int k, const Vector& y) {
  check_index(extremal, k);
  const IntervalNodes& nodes = extremal.trajectory.intervals[k];
  const auto& p = extremal.adjoint.p[k];
  std::vector<double> h_values(nodes.t.size());
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    h_values[i] = hamiltonian(problem, nodes.t[i], nodes.q[i], p[i], extremal.adjoint.p0, y);
  }
  const double delta = extremal.grid.length(k);
  return simpson(h_values, delta / static_cast<double>(h_values.size() - 1)) / delta;
}

}  // namespace sampled_pmp

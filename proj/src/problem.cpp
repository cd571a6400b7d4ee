#include "sampled_pmp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sampled_pmp/detail/overloaded.hpp"
#include "sampled_pmp/errors.hpp"

namespace sampled_pmp {

namespace {

using detail::Overloaded;

void require_dim(const Vector& v, int dim, const char* what) {
  if (v.size() != dim) {
    throw InvalidArgument(std::string(what) + ": expected dimension " +
                          std::to_string(dim) + ", got " +
                          std::to_string(v.size()));
  }
}

// t / T rounded to an integer when it lies within the snap tolerance.
double snapped_ratio(double t, double period) {
  const double r = t / period;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= kIndexSnap) {
    return nearest;
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexSet

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InvalidArgument("box: bound dimensions must match and be positive");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) {
      throw InvalidArgument("box: lower bound exceeds upper bound in component " +
                            std::to_string(i));
    }
  }
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (center.size() == 0) throw InvalidArgument("ball: empty center");
  if (!(radius >= 0.0)) throw InvalidArgument("ball: radius must be >= 0");
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::uniform_box(int dim, double lo, double hi) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

int ConvexSet::dim() const {
  return std::visit(Overloaded{[](const Box& b) { return int(b.lower.size()); },
                               [](const Ball& b) { return int(b.center.size()); }},
                    shape_);
}

bool ConvexSet::contains(const Vector& u, double tol) const {
  if (u.size() != dim()) return false;
  if (!u.allFinite()) return false;
  return std::visit(
      Overloaded{[&](const Box& b) {
                   return ((u - b.lower).array() >= -tol).all() &&
                          ((b.upper - u).array() >= -tol).all();
                 },
                 [&](const Ball& b) { return (u - b.center).norm() <= b.radius + tol; }},
      shape_);
}

Vector ConvexSet::project(const Vector& u) const {
  require_dim(u, dim(), "project");
  return std::visit(
      Overloaded{[&](const Box& b) -> Vector {
                   return u.cwiseMax(b.lower).cwiseMin(b.upper);
                 },
                 [&](const Ball& b) -> Vector {
                   const Vector d = u - b.center;
                   const double norm = d.norm();
                   if (norm <= b.radius) return u;
                   return b.center + d * (b.radius / norm);
                 }},
      shape_);
}

double ConvexSet::support_gap_unchecked(const Vector& g, const Vector& u) const {
  require_dim(g, dim(), "support_gap: gradient");
  require_dim(u, dim(), "support_gap: point");
  return std::visit(
      Overloaded{[&](const Box& b) {
                   double gap = 0.0;
                   for (Eigen::Index i = 0; i < g.size(); ++i) {
                     gap += g[i] > 0.0 ? g[i] * (b.upper[i] - u[i])
                                       : g[i] * (b.lower[i] - u[i]);
                   }
                   return gap;
                 },
                 [&](const Ball& b) {
                   return g.dot(b.center - u) + b.radius * g.norm();
                 }},
      shape_);
}

double ConvexSet::support_gap(const Vector& g, const Vector& u) const {
  if (!contains(u)) throw DomainError("support_gap: point is outside the set");
  // Rounding can leave a tiny negative value at a maximiser.
  return std::max(0.0, support_gap_unchecked(g, u));
}

Vector ConvexSet::support_gap_components(const Vector& g, const Vector& u) const {
  if (!is_box()) throw UnsupportedCase("support_gap_components: box sets only");
  if (!contains(u)) throw DomainError("support_gap_components: point is outside the set");
  const Box& b = as_box();
  Vector out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    out[i] = std::max(0.0, g[i] > 0.0 ? g[i] * (b.upper[i] - u[i])
                                      : g[i] * (b.lower[i] - u[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ProblemDefinition

void ProblemDefinition::validate() const {
  if (state_dim < 1) throw InvalidArgument("problem: state dimension must be >= 1");
  if (control_dim < 1) throw InvalidArgument("problem: control dimension must be >= 1");
  if (!dynamics || !dynamics_jac_q || !dynamics_jac_u) {
    throw InvalidArgument("problem: dynamics and both Jacobians are required");
  }
  if (!running_cost || !cost_grad_q || !cost_grad_u) {
    throw InvalidArgument("problem: running cost and both gradients are required");
  }
  if (control_set.dim() != control_dim) {
    throw InvalidArgument("problem: control set dimension differs from m");
  }
  std::visit(Overloaded{[&](const FixedEndpoints& c) {
                          require_dim(c.q0, state_dim, "terminal q0");
                          require_dim(c.qf, state_dim, "terminal qf");
                        },
                        [&](const FixedInitialFreeFinal& c) {
                          require_dim(c.q0, state_dim, "terminal q0");
                        },
                        [&](const Periodic& c) {
                          require_dim(c.q0_guess, state_dim, "terminal q0_guess");
                        },
                        [&](const GeneralTerminal& c) {
                          if (c.j < 1 || !c.g || !c.jac_first || !c.jac_second) {
                            throw InvalidArgument("terminal: general g needs j >= 1 and Jacobians");
                          }
                          if (c.target.dim() != c.j) {
                            throw InvalidArgument("terminal: target set dimension differs from j");
                          }
                        }},
             terminal);
  const double tf = nominal_final_time();
  if (!(tf > 0.0) || !std::isfinite(tf)) {
    throw InvalidArgument("problem: final time must be positive");
  }
}

double ProblemDefinition::nominal_final_time() const {
  return std::visit(Overloaded{[](const FixedFinalTime& f) { return f.tf; },
                               [](const FreeFinalTime& f) { return f.tf_guess; }},
                    final_time_mode);
}

// ---------------------------------------------------------------------------
// Sampling

int floor_index(double t, double period) {
  if (!(period > 0.0)) throw InvalidArgument("floor_index: period must be positive");
  if (!(t >= 0.0)) throw InvalidArgument("floor_index: time must be nonnegative");
  return static_cast<int>(std::floor(snapped_ratio(t, period)));
}

int final_control_index(double tf, double period) {
  if (!(period > 0.0)) {
    throw InvalidArgument("final_control_index: period must be positive");
  }
  if (!(tf > 0.0)) throw InvalidArgument("final_control_index: tf must be positive");
  const double r = snapped_ratio(tf, period);
  const int e = static_cast<int>(std::floor(r));
  return r == std::floor(r) ? e - 1 : e;
}

SamplingGrid::SamplingGrid(double period, double final_time)
    : period_(period), final_time_(final_time) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw InvalidArgument("grid: period must be positive");
  }
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw InvalidArgument("grid: final time must be positive");
  }
  const int last = final_control_index(final_time, period);
  starts_.reserve(last + 1);
  lengths_.reserve(last + 1);
  for (int k = 0; k <= last; ++k) {
    const double start = k * period;
    starts_.push_back(start);
    lengths_.push_back(k < last ? period : final_time - start);
  }
}

bool SamplingGrid::uniform() const {
  const double r = snapped_ratio(final_time_, period_);
  return r == std::floor(r);
}

SamplingGrid build_grid(double tf, double period) { return SamplingGrid(period, tf); }

// ---------------------------------------------------------------------------
// Hamiltonian

namespace {
void check_h_args(const ProblemDefinition& problem, const Vector& q, const Vector& p,
                  const Vector& u) {
  require_dim(q, problem.state_dim, "hamiltonian: q");
  require_dim(p, problem.state_dim, "hamiltonian: p");
  require_dim(u, problem.control_dim, "hamiltonian: u");
}
}  // namespace

double hamiltonian(const ProblemDefinition& problem, double t, const Vector& q,
                   const Vector& p, double p0, const Vector& u) {
  check_h_args(problem, q, p, u);
  return p.dot(problem.dynamics(t, q, u)) + p0 * problem.running_cost(t, q, u);
}

Vector hamiltonian_grad_q(const ProblemDefinition& problem, double t,
                          const Vector& q, const Vector& p, double p0,
                          const Vector& u) {
  check_h_args(problem, q, p, u);
  return problem.dynamics_jac_q(t, q, u).transpose() * p +
         p0 * problem.cost_grad_q(t, q, u);
}

Vector hamiltonian_grad_u(const ProblemDefinition& problem, double t,
                          const Vector& q, const Vector& p, double p0,
                          const Vector& u) {
  check_h_args(problem, q, p, u);
  return problem.dynamics_jac_u(t, q, u).transpose() * p +
         p0 * problem.cost_grad_u(t, q, u);
}

// ---------------------------------------------------------------------------
// Terminal conditions

double terminal_feasibility(const TerminalCondition& terminal, const Vector& q_start,
                            const Vector& q_end) {
  return std::visit(
      Overloaded{[&](const FixedEndpoints& c) {
                   return (q_start - c.q0).norm() + (q_end - c.qf).norm();
                 },
                 [&](const FixedInitialFreeFinal& c) { return (q_start - c.q0).norm(); },
                 [&](const Periodic&) { return (q_start - q_end).norm(); },
                 [&](const GeneralTerminal& c) {
                   return c.target.distance(c.g(q_start, q_end));
                 }},
      terminal);
}

std::optional<Vector> fixed_initial_state(const TerminalCondition& terminal) {
  return std::visit(
      Overloaded{[](const FixedEndpoints& c) -> std::optional<Vector> { return c.q0; },
                 [](const FixedInitialFreeFinal& c) -> std::optional<Vector> {
                   return c.q0;
                 },
                 [](const Periodic&) -> std::optional<Vector> { return std::nullopt; },
                 [](const GeneralTerminal&) -> std::optional<Vector> {
                   return std::nullopt;
                 }},
      terminal);
}

std::string terminal_variant_name(const TerminalCondition& terminal) {
  return std::visit(
      Overloaded{[](const FixedEndpoints&) { return std::string("fixed_endpoints"); },
                 [](const FixedInitialFreeFinal&) {
                   return std::string("fixed_initial_free_final");
                 },
                 [](const Periodic&) { return std::string("periodic"); },
                 [](const GeneralTerminal&) { return std::string("general"); }},
      terminal);
}

}  // namespace sampled_pmp

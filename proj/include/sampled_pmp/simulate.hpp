#ifndef SAMPLED_PMP_SIMULATE_HPP
#define SAMPLED_PMP_SIMULATE_HPP

#include <vector>

#include "sampled_pmp/problem.hpp"

namespace sampled_pmp {

inline constexpr int kDefaultSubsteps = 16;
/// Node norms beyond this abort integration.
inline constexpr double kBlowUpBound = 1e12;

/// Uniform RK4 nodes on one sampling interval (substeps + 1 of them).
struct IntervalNodes {
  std::vector<double> t;
  std::vector<Vector> q;
};

struct Trajectory {
  std::vector<IntervalNodes> intervals;
  double cost = 0.0;

  const Vector& initial_state() const { return intervals.front().q.front(); }
  const Vector& final_state() const { return intervals.back().q.back(); }
};

/// Adjoint values on the trajectory's nodes, plus the cost multiplier.
struct AdjointArc {
  std::vector<std::vector<Vector>> p;
  double p0 = -1.0;

  const Vector& initial() const { return p.front().front(); }
  const Vector& final() const { return p.back().back(); }
};

/// (q, p, p0, u) on a common grid.
struct Extremal {
  SamplingGrid grid;
  ControlSequence controls;
  Trajectory trajectory;
  AdjointArc adjoint;
};

enum class MembershipCheck { kEnforce, kSkip };

/// RK4 with fixed step delta / substeps and the control frozen at u.
IntervalNodes integrate_interval(const ProblemDefinition& problem, double t_start,
                                 double delta, const Vector& q_start, const Vector& u,
                                 int substeps = kDefaultSubsteps);

/// Sample-and-hold state integration and the running cost (composite Simpson
/// on the RK4 nodes; substeps must be even).
Trajectory simulate(const ProblemDefinition& problem, const SamplingGrid& grid,
                    const ControlSequence& controls, const Vector& q0,
                    int substeps = kDefaultSubsteps);

/// State and adjoint integrated forward together from (q0, p(0)). The state
/// part performs exactly the arithmetic of simulate().
Extremal integrate_extremal_forward(const ProblemDefinition& problem,
                                    const SamplingGrid& grid,
                                    const ControlSequence& controls, const Vector& q0,
                                    const Vector& p_init, double p0,
                                    int substeps = kDefaultSubsteps,
                                    MembershipCheck check = MembershipCheck::kEnforce);

/// State and adjoint nodes of a single interval.
struct ExtremalInterval {
  IntervalNodes nodes;
  std::vector<Vector> p;
};

ExtremalInterval integrate_extremal_interval(const ProblemDefinition& problem,
                                             double t_start, double delta,
                                             const Vector& q_start, const Vector& p_start,
                                             double p0, const Vector& u, int substeps);

/// (1/delta) * int of d_u H over the interval, Simpson on the nodes.
Vector interval_average_gradient(const ProblemDefinition& problem,
                                 const ExtremalInterval& arc, double p0, const Vector& u);

/// Averaged control gradient on interval k of an extremal.
Vector average_u_gradient(const ProblemDefinition& problem, const Extremal& extremal,
                          int k);

/// (1/delta_k) * int of H(t, q(t), p(t), p0, y) over interval k, with the
/// extremal's arc held fixed and only the control argument replaced by y.
double average_hamiltonian(const ProblemDefinition& problem, const Extremal& extremal,
                           int k, const Vector& y);

/// Composite Simpson over uniformly spaced samples (odd count >= 3).
double simpson(const std::vector<double>& values, double h);

}  // namespace sampled_pmp

#endif  // SAMPLED_PMP_SIMULATE_HPP

#include "sampled_pmp/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sampled_pmp/detail/overloaded.hpp"
#include "sampled_pmp/errors.hpp"

namespace sampled_pmp {

using detail::Overloaded;

double Certificate::max_interval_residual() const {
  double out = 0.0;
  for (const auto& iv : intervals) out = std::max(out, iv.r);
  return out;
}

double interval_residual(const ProblemDefinition& problem, const Extremal& extremal,
                         int k) {
  const Vector g = average_u_gradient(problem, extremal, k);
  const Vector& u = extremal.controls[k];
  const ControlSet& omega = problem.control_set;
  if (omega.contains(u)) return omega.support_gap(g, u);
  return std::max(0.0, omega.support_gap_unchecked(g, u)) + omega.distance(u);
}

double transversality_residual(const TerminalCondition& terminal, const Vector& p_start,
                               const Vector& p_end) {
  if (std::holds_alternative<GeneralTerminal>(terminal)) {
    throw UnsupportedCase(
        "transversality_residual: general terminal data needs the boundary states");
  }
  return transversality_residual(terminal, p_start, p_end, Vector(), Vector());
}

double transversality_residual(const TerminalCondition& terminal, const Vector& p_start,
                               const Vector& p_end, const Vector& q_start,
                               const Vector& q_end) {
  return std::visit(
      Overloaded{[](const FixedEndpoints&) { return 0.0; },
                 [&](const FixedInitialFreeFinal&) { return p_end.norm(); },
                 [&](const Periodic&) { return (p_start - p_end).norm(); },
                 [&](const GeneralTerminal& c) {
                   if (!c.psi) {
                     throw UnsupportedCase(
                         "transversality_residual: general terminal data without psi");
                   }
                   const Vector& psi = *c.psi;
                   const Matrix d1 = c.jac_first(q_start, q_end);
                   const Matrix d2 = c.jac_second(q_start, q_end);
                   return (p_start + d1.transpose() * psi).norm() +
                          (p_end - d2.transpose() * psi).norm();
                 }},
      terminal);
}

double free_time_residual(const ProblemDefinition& problem, const Extremal& extremal) {
  if (!problem.free_final_time()) {
    throw UnsupportedCase("free_time_residual: the final time is fixed");
  }
  const double tf = extremal.grid.final_time();
  const int kf = final_control_index(tf, extremal.grid.period());
  return std::abs(hamiltonian(problem, tf, extremal.trajectory.final_state(),
                              extremal.adjoint.final(), extremal.adjoint.p0,
                              extremal.controls.at(kf)));
}

Certificate check_certificate(const ProblemDefinition& problem, const Extremal& extremal,
                              double tol) {
  Certificate cert;
  cert.tol = tol;
  const double p0 = extremal.adjoint.p0;
  cert.normalization = p0 < 0.0 ? -p0 : 1.0;
  const double scale = cert.normalization;

  cert.nontrivial = extremal.adjoint.final().norm() + std::abs(p0) > 0.0;
  if (!cert.nontrivial) cert.violations.emplace_back("nontriviality: (p, p0) = (0, 0)");

  for (int k = 0; k < extremal.grid.size(); ++k) {
    IntervalResidual iv;
    iv.k = k;
    iv.t = extremal.grid.start(k);
    iv.control_admissible = problem.control_set.contains(extremal.controls[k]);
    iv.raw_r = interval_residual(problem, extremal, k);
    iv.r = iv.raw_r / scale;
    if (!iv.control_admissible) {
      cert.violations.push_back("u ∉ Ω at interval " + std::to_string(k));
    }
    if (iv.r > tol) {
      cert.violations.push_back("maximization condition at interval " + std::to_string(k));
    }
    cert.intervals.push_back(iv);
  }

  const auto& terminal = problem.terminal;
  const Vector& q_start = extremal.trajectory.initial_state();
  const Vector& q_end = extremal.trajectory.final_state();
  const bool general_without_psi =
      std::holds_alternative<GeneralTerminal>(terminal) &&
      !std::get<GeneralTerminal>(terminal).psi;
  if (!general_without_psi) {
    cert.transversality = transversality_residual(terminal, extremal.adjoint.initial(),
                                                  extremal.adjoint.final(), q_start, q_end) /
                          scale;
    if (cert.transversality > tol) cert.violations.emplace_back("transversality");
  }

  if (problem.free_final_time()) {
    cert.free_time = free_time_residual(problem, extremal) / scale;
    if (*cert.free_time > tol) cert.violations.emplace_back("free final time");
  }

  cert.feasibility = terminal_feasibility(terminal, q_start, q_end);
  if (cert.feasibility > tol) cert.violations.emplace_back("terminal constraint");

  cert.pass = cert.violations.empty();
  return cert;
}

}  // namespace sampled_pmp

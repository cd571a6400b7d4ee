// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "sampled_pmp/builtins.hpp"
#include "sampled_pmp/certificate.hpp"
#include "sampled_pmp/parking.hpp"
#include "sampled_pmp/simulate.hpp"

using namespace sampled_pmp;

namespace {

/// Collects failure messages for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream os;
      os.precision(15);
      os << what << ": got " << got << ", want " << want << " +- " << tol;
      failures_.push_back(os.str());
    }
  }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

std::string str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Runs one criterion, prints its line and returns whether it passed.
bool criterion(int id, const char* title, double budget_s, const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check.expect(elapsed < budget_s,
               "runtime " + str(elapsed) + " s exceeds budget " + str(budget_s) + " s");
  const bool ok = check.failures().empty();
  std::printf("%s %d %s (%.3f s)\n", ok ? "PASS" : "FAIL", id, title, elapsed);
  for (const auto& f : check.failures()) std::printf("    %s\n", f.c_str());
  std::fflush(stdout);
  return ok;
}

void closed_forms(Check& c) {
  c.near(parking::permanent_control(2.0, 4.0, 0.0), -0.75, 1e-12, "u*(0), (2, 4)");
  c.near(parking::permanent_control(2.0, 4.0, 4.0), 0.75, 1e-12, "u*(4), (2, 4)");
  const double t1 = parking::switching_time(2.0, 3.0);
  c.near(t1, (3.0 - std::sqrt(3.0)) / 2.0, 1e-12, "t1, (2, 3)");
  c.near(parking::permanent_control(2.0, 3.0, t1), -1.0, 1e-12, "u*(t1), (2, 3)");
}

void small_case(Check& c, double tf, double T, const std::vector<double>& expected) {
  const std::string tag = "(2, " + str(tf) + ", " + str(T) + ")";
  const auto start = std::chrono::steady_clock::now();
  const parking::Solution s = parking::solve(2.0, tf, T);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(elapsed < 0.1, tag + " took " + str(elapsed) + " s");
  const parking::QpResult qp = parking::qp_oracle(2.0, tf, T);
  c.expect(s.controls.size() == expected.size(), tag + " control count");
  for (std::size_t k = 0; k < expected.size() && k < s.controls.size(); ++k) {
    c.near(qp.controls[k], expected[k], 1e-7, tag + " oracle u_" + std::to_string(k));
    c.near(s.controls[k][0], expected[k], 1e-7, tag + " u_" + std::to_string(k));
  }
  c.expect(s.terminal_residual <= 1e-10, tag + " terminal residual " + str(s.terminal_residual));
  c.expect(s.certificate.max_interval_residual() <= 1e-8,
           tag + " interval residual " + str(s.certificate.max_interval_residual()));
  c.expect(s.certificate.pass, tag + " certificate");
}

void oracle_equivalence(Check& c) {
  for (double tf : {3.0, 3.2, 4.0, 5.0}) {
    for (int K = 2; K <= 8; ++K) {
      const double T = tf / K;
      const std::string tag = "tf = " + str(tf) + ", K = " + std::to_string(K);
      const parking::Solution s = parking::solve(2.0, tf, T);
      const parking::QpResult qp = parking::qp_oracle(2.0, tf, T);
      if (static_cast<int>(s.controls.size()) != K) {
        c.expect(false, tag + ": control count");
        continue;
      }
      for (int k = 0; k < K; ++k) {
        c.near(s.controls[k][0], qp.controls[k], 1e-7, tag + " u_" + std::to_string(k));
      }
      c.near(s.cost, qp.cost, 1e-8, tag + " cost");
    }
  }
}

void sweep_reproduction(Check& c) {
  const std::vector<double> periods = {1.0, 0.5, 0.1, 0.01};
  for (auto [tf, bound] : {std::pair{3.0, 2e-2}, std::pair{4.0, 1e-3}}) {
    const std::string tag = "(2, " + str(tf) + ")";
    const std::vector<parking::SweepRow> rows = parking::sweep(2.0, tf, periods);
    for (const auto& row : rows) {
      c.expect(row.status == "ok", tag + " T = " + str(row.T) + ": " + row.status);
      c.expect(row.terminal_residual <= 1e-9,
               tag + " T = " + str(row.T) + " terminal residual " + str(row.terminal_residual));
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      c.expect(rows[i + 1].sup_dev < rows[i].sup_dev,
               tag + " deviation not strictly decreasing from T = " + str(rows[i].T) + " (" +
                   str(rows[i].sup_dev) + ") to T = " + str(rows[i + 1].T) + " (" +
                   str(rows[i + 1].sup_dev) + ")");
    }
    c.expect(rows.back().sup_dev <= bound,
             tag + " deviation at T = 0.01 is " + str(rows.back().sup_dev));
  }
}

void certificate_soundness(Check& c) {
  const std::vector<std::pair<double, double>> cases = {
      {4.0, 2.0}, {3.0, 1.0}, {3.0, 0.5}, {4.0, 0.5}, {3.2, 0.4}, {5.0, 1.0}, {3.0, 0.1}, {4.0, 0.1}};
  int perturbed = 0;
  for (auto [tf, T] : cases) {
    const std::string tag = "(2, " + str(tf) + ", " + str(T) + ")";
    const ProblemDefinition problem = make_parking(2.0, tf);
    const parking::Solution s = parking::solve(2.0, tf, T);
    const Vector p_init = s.extremal.adjoint.initial();
    const Certificate base = check_certificate(problem, s.extremal, 1e-8);
    c.expect(base.pass, tag + " certificate of the solution");
    for (std::size_t k = 0; k < s.controls.size(); ++k) {
      if (std::abs(s.controls[k][0]) >= 1.0 - 1e-9) continue;
      ControlSequence u = s.controls;
      u[k][0] += 0.1;
      const Extremal ex = integrate_extremal_forward(problem, s.extremal.grid, u, vec({2.0, 0.0}),
                                                     p_init, -1.0, kDefaultSubsteps,
                                                     MembershipCheck::kSkip);
      const Certificate cert = check_certificate(problem, ex, 1e-8);
      ++perturbed;
      c.expect(!cert.pass, tag + " perturbed u_" + std::to_string(k) + " still passes");
      c.expect(cert.intervals[k].r > 0.0, tag + " perturbed u_" + std::to_string(k) +
                                               " residual " + str(cert.intervals[k].r));
    }
  }
  c.expect(perturbed > 0, "no interior controls were perturbed");
}

/// p(0) with p(tf) = 0; the adjoint end value is affine in p(0).
Vector transversal_adjoint(const ProblemDefinition& problem, const SamplingGrid& grid,
                           const ControlSequence& u, const Vector& q0) {
  auto end = [&](const Vector& p_init) {
    return integrate_extremal_forward(problem, grid, u, q0, p_init, -1.0).adjoint.final();
  };
  const int n = problem.state_dim;
  const Vector offset = end(Vector::Zero(n));
  Matrix phi(n, n);
  for (int i = 0; i < n; ++i) phi.col(i) = end(Vector::Unit(n, i)) - offset;
  return phi.fullPivLu().solve(-offset);
}

void gradient_identity(Check& c) {
  const double tf = 4.0;
  const int K = 5;
  const ProblemDefinition problem = make_parking_free_end(2.0, tf);
  const SamplingGrid grid = build_grid(tf, tf / K);
  const Vector q0 = vec({2.0, 0.0});
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  for (int trial = 0; trial < 5; ++trial) {
    ControlSequence u;
    for (int k = 0; k < K; ++k) u.push_back(vec({dist(rng)}));
    const Extremal ex =
        integrate_extremal_forward(problem, grid, u, q0, transversal_adjoint(problem, grid, u, q0), -1.0);
    c.expect(ex.adjoint.final().norm() <= 1e-12, "p(tf) = 0 not met");
    for (int k = 0; k < K; ++k) {
      const double h = 1e-5;
      ControlSequence up = u, um = u;
      up[k][0] += h;
      um[k][0] -= h;
      const double fd =
          (simulate(problem, grid, up, q0).cost - simulate(problem, grid, um, q0).cost) / (2 * h);
      const double adjoint = -grid.length(k) * average_u_gradient(problem, ex, k)[0];
      c.expect(std::abs(fd - adjoint) <= 1e-6 * std::abs(fd),
               "trial " + std::to_string(trial) + " k = " + std::to_string(k) + ": fd " + str(fd) +
                   ", adjoint " + str(adjoint));
    }
  }
}

void integrator_order(Check& c) {
  // Undamped unit oscillator: q = (cos t, -sin t) from (1, 0).
  LtiData d;
  d.A = Matrix{{0.0, 1.0}, {-1.0, 0.0}};
  d.B = Matrix::Zero(2, 1);
  d.Q = Matrix::Zero(2, 2);
  d.R = Matrix::Zero(1, 1);
  const ProblemDefinition oscillator =
      make_lti("oscillator", d, ConvexSet::uniform_box(1, -1.0, 1.0),
               FixedInitialFreeFinal{vec({1.0, 0.0})}, FixedFinalTime{2.0});
  const double span = 2.0;
  const Vector exact = vec({std::cos(span), -std::sin(span)});
  std::vector<double> err;
  for (int steps : {8, 16, 32, 64}) {
    err.push_back(
        (integrate_interval(oscillator, 0.0, span, vec({1.0, 0.0}), vec({0.0}), steps).q.back() -
         exact)
            .norm());
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    c.expect(ratio >= 14.0 && ratio <= 18.0, "error ratio " + str(ratio) + " at halving " +
                                                  std::to_string(i + 1));
  }
}

void structural_invariants(Check& c) {
  for (auto [tf, T] : {std::pair{3.0, 0.1}, std::pair{4.0, 0.1}, std::pair{4.0, 0.5}}) {
    const std::string tag = "(2, " + str(tf) + ", " + str(T) + ")";
    const parking::Solution s = parking::solve(2.0, tf, T);
    const Extremal& ex = s.extremal;
    const double p1 = ex.adjoint.initial()[0];
    const double p2_end = ex.adjoint.final()[1];
    double dev = 0.0;
    for (std::size_t k = 0; k < ex.adjoint.p.size(); ++k) {
      for (std::size_t i = 0; i < ex.adjoint.p[k].size(); ++i) {
        const double t = ex.trajectory.intervals[k].t[i];
        const Vector& p = ex.adjoint.p[k][i];
        dev = std::max(dev, std::abs(p[0] - p1));
        dev = std::max(dev, std::abs(p[1] - (p2_end + p1 * (tf - t))));
      }
    }
    c.expect(dev <= 1e-12, tag + " adjoint structure deviation " + str(dev));

    // Least-squares line through the unsaturated controls.
    std::vector<double> xs, ys;
    for (int k = 0; k < ex.grid.size(); ++k) {
      const double u = s.controls[k][0];
      if (std::abs(u) >= 1.0 - 1e-9) continue;
      xs.push_back(tf - ex.grid.start(k) - ex.grid.length(k) / 2.0);
      ys.push_back(u);
    }
    if (xs.size() < 3) {
      c.expect(false, tag + " fewer than 3 unsaturated controls");
      continue;
    }
    Matrix A(static_cast<Eigen::Index>(xs.size()), 2);
    Vector b(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      A(static_cast<Eigen::Index>(i), 0) = 1.0;
      A(static_cast<Eigen::Index>(i), 1) = xs[i];
      b[static_cast<Eigen::Index>(i)] = ys[i];
    }
    const Vector coef = A.colPivHouseholderQr().solve(b);
    const double fit = (A * coef - b).cwiseAbs().maxCoeff();
    c.expect(fit <= 1e-10, tag + " affine fit residual " + str(fit));
  }
}

}  // namespace

int main() {
  bool ok = true;
  ok &= criterion(1, "permanent closed forms", 1e-3, closed_forms);
  ok &= criterion(2, "sampled exact small cases", 0.2, [](Check& c) {
    small_case(c, 4.0, 2.0, {-0.5, 0.5});
    small_case(c, 3.0, 1.0, {-1.0, 0.0, 1.0});
  });
  ok &= criterion(3, "oracle equivalence", 10.0, oracle_equivalence);
  ok &= criterion(4, "sweep reproduction", 30.0, sweep_reproduction);
  ok &= criterion(5, "certificate soundness", 5.0, certificate_soundness);
  ok &= criterion(6, "adjoint gradient identity", 1.0, gradient_identity);
  ok &= criterion(7, "integrator order", 1.0, integrator_order);
  ok &= criterion(8, "structural invariants", 1.0, structural_invariants);
  std::printf("%s\n", ok ? "all criteria passed" : "some criteria failed");
  return ok ? 0 : 1;
}

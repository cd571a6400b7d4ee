#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sampled_pmp/builtins.hpp"
#include "sampled_pmp/errors.hpp"
#include "sampled_pmp/parking.hpp"
#include "sampled_pmp/solver.hpp"
#include "support.hpp"

using namespace sampled_pmp;
using test_support::vec;

namespace {

/// p(0) for parking multipliers (p1, p2(tf)).
Vector parking_p0(double p1, double p2f, double tf) { return vec({p1, p1 * tf + p2f}); }

ShootingUnknowns parking_unknowns(double p1, double p2f, double tf) {
  ShootingUnknowns u;
  u.p_init = parking_p0(p1, p2f, tf);
  return u;
}

}  // namespace

TEST(SolveIntervalControl, ParkingExamples) {
  const ProblemDefinition parking = make_parking(2.0, 4.0);
  const SolverConfig config;
  const Vector u = solve_interval_control(parking, 0.0, 2.0, vec({2, 0}), parking_p0(-1, 2, 4),
                                          -1.0, vec({0.0}), 0.25, config);
  // The map contracts by 1/2, so the error is at most twice the last step.
  EXPECT_NEAR(u[0], -0.5, 2e-12);

  InnerTrace trace;
  const Vector same = solve_interval_control(parking, 0.0, 2.0, vec({2, 0}),
                                             parking_p0(-1, 2, 4), -1.0, vec({-0.5}), 0.25,
                                             config, &trace);
  EXPECT_EQ(same[0], -0.5);
  EXPECT_EQ(trace.iterates.size(), 1u);

  const Vector clamped = solve_interval_control(parking, 0.0, 2.0, vec({2, 0}),
                                                parking_p0(0, 3, 4), -1.0, vec({0.0}), 0.25,
                                                config);
  EXPECT_EQ(clamped[0], 1.0);
}

TEST(SolveIntervalControl, ReportsNonConvergence) {
  const ProblemDefinition parking = make_parking(2.0, 4.0);
  SolverConfig config;
  config.inner_max_iter = 3;
  try {
    // A tiny step cannot reach the root in three iterations.
    solve_interval_control(parking, 0.0, 2.0, vec({2, 0}), parking_p0(-1, 2, 4), -1.0,
                           vec({0.9}), 1e-3, config);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.residual(), config.inner_tol);
    ASSERT_EQ(e.best_iterate().size(), 1);
    EXPECT_LT(e.best_iterate()[0], 0.9);
  }
}

TEST(SolveIntervalControl, RejectsOutsideStart) {
  const ProblemDefinition parking = make_parking(2.0, 4.0);
  EXPECT_THROW(solve_interval_control(parking, 0.0, 2.0, vec({2, 0}), parking_p0(-1, 2, 4),
                                      -1.0, vec({2.0}), 0.25, SolverConfig{}),
               InvalidArgument);
}

TEST(SolveIntervalControl, AverageHamiltonianIsNondecreasing) {
  const ProblemDefinition parking = make_parking(2.0, 3.0);
  const SamplingGrid grid = build_grid(3.0, 0.5);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> mult(-3.0, 3.0), start(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector p_init = parking_p0(mult(rng), mult(rng), 3.0);
    const int k = trial % grid.size();
    // Arrive at interval k with zero controls so (q_k, p_k) are known.
    ControlSequence zeros(grid.size(), vec({0.0}));
    const Extremal pre = integrate_extremal_forward(parking, grid, zeros, vec({2, 0}), p_init, -1.0);
    const Vector q_k = pre.trajectory.intervals[k].q.front();
    const Vector p_k = pre.adjoint.p[k].front();

    InnerTrace trace;
    const Vector u = solve_interval_control(parking, grid.start(k), grid.length(k), q_k, p_k,
                                            -1.0, vec({start(rng)}), 0.25, SolverConfig{},
                                            &trace);
    ControlSequence converged = zeros;
    converged[k] = u;
    const Extremal ex =
        integrate_extremal_forward(parking, grid, converged, vec({2, 0}), p_init, -1.0);
    double prev = -1e300;
    for (const auto& it : trace.iterates) {
      const double h = average_hamiltonian(parking, ex, k, it);
      EXPECT_GE(h, prev - 1e-13);
      prev = h;
    }
  }
}

TEST(EstimateInnerStep, ParkingIsAQuarter) {
  const ProblemDefinition parking = make_parking(2.0, 4.0);
  EXPECT_NEAR(estimate_inner_step(parking, build_grid(4.0, 2.0), parking_unknowns(-1, 2, 4),
                                  SolverConfig{}),
              0.25, 1e-6);
}

TEST(ShootingResidual, ParkingExamples) {
  const ProblemDefinition parking = make_parking(2.0, 4.0);
  const SamplingGrid grid = build_grid(4.0, 2.0);
  const SolverConfig config;
  // Control errors up to 2e-12 move q1(tf) by up to 6x that.
  EXPECT_LE(shooting_residual(parking, grid, parking_unknowns(-1, 2, 4), config).norm(), 2e-11);
  EXPECT_LE((shooting_residual(parking, grid, parking_unknowns(0, 0, 4), config) - vec({2, 0}))
                .norm(),
            1e-12);
  EXPECT_LE((shooting_residual(parking, grid, parking_unknowns(0, 3, 4), config) - vec({10, 4}))
                .norm(),
            1e-12);
}

TEST(ShootingResidual, InnerFailureNamesTheInterval) {
  const ProblemDefinition parking = make_parking(2.0, 4.0);
  SolverConfig config;
  config.inner_max_iter = 2;
  config.inner_step = 1e-3;
  try {
    shoot(parking, build_grid(4.0, 2.0), parking_unknowns(-1, 2, 4), config, 1e-3);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.interval(), 0);
    EXPECT_NE(std::string(e.what()).find("interval 0"), std::string::npos);
  }
}

TEST(ShootingUnknowns, PackLayout) {
  ShootingUnknowns u;
  u.p_init = vec({1, 2});
  u.tf = 3.0;
  EXPECT_EQ(u.pack(), vec({1, 2, 3}));
  const ProblemDefinition free_time = make_parking_time_energy(2.0, 1.0, 3.0);
  const ShootingUnknowns back = ShootingUnknowns::unpack(free_time, vec({1, 2, 3}));
  EXPECT_EQ(back.p_init, vec({1, 2}));
  EXPECT_EQ(*back.tf, 3.0);
  const ProblemDefinition periodic = make_forced_oscillator(0.5, 2.0, 6.0);
  const ShootingUnknowns guess = ShootingUnknowns::initial_for(periodic);
  EXPECT_EQ(guess.pack().size(), 4);
  EXPECT_THROW(ShootingUnknowns::unpack(periodic, vec({1, 2, 3})), InvalidArgument);
}

TEST(Solve, ParkingExamples) {
  const ProblemDefinition a = make_parking(2.0, 4.0);
  const SolveResult ra =
      solve(a, build_grid(4.0, 2.0), ShootingUnknowns::initial_for(a, parking_p0(-0.75, 1.5, 4)));
  EXPECT_NEAR(ra.extremal.controls[0][0], -0.5, 1e-9);
  EXPECT_NEAR(ra.extremal.controls[1][0], 0.5, 1e-9);
  EXPECT_TRUE(ra.certificate.pass);
  EXPECT_LE(ra.report.residual.norm(), 1e-10);

  const ProblemDefinition b = make_parking(2.0, 3.0);
  const SolveResult rb = solve(b, build_grid(3.0, 1.0),
                               ShootingUnknowns::initial_for(b, parking_p0(-48.0 / 27, 24.0 / 9, 3)));
  EXPECT_NEAR(rb.extremal.controls[0][0], -1.0, 1e-9);
  EXPECT_NEAR(rb.extremal.controls[1][0], 0.0, 1e-9);
  EXPECT_NEAR(rb.extremal.controls[2][0], 1.0, 1e-9);
  EXPECT_TRUE(rb.certificate.pass);
}

TEST(Solve, SingleIntervalCannotPark) {
  const ProblemDefinition p = make_parking(2.0, 4.0);
  try {
    solve(p, build_grid(4.0, 4.0), ShootingUnknowns::initial_for(p, parking_p0(-0.75, 1.5, 4)));
    FAIL() << "expected non-convergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.residual(), 1e-3);
    EXPECT_FALSE(e.residual_history().empty());
    EXPECT_FALSE(e.active_sets().empty());
  }
}

TEST(Solve, ZeroGuessUsesRegularisedFirstStep) {
  const ProblemDefinition p = make_parking(2.0, 4.0);
  const SolveResult r = solve(p, build_grid(4.0, 1.0), ShootingUnknowns::initial_for(p));
  EXPECT_TRUE(r.certificate.pass);
  const parking::QpResult qp = parking::qp_oracle(2.0, 4.0, 1.0);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.extremal.controls[k][0], qp.controls[k], 1e-7);
}

TEST(Solve, ZeroGuessWithSaturatedStart) {
  // At p(0) = 0 the state cost already pushes the later controls onto the
  // bound; a full first step lands where every control saturates.
  LtiData d;
  d.A = Matrix{{0.0, 1.0}, {-1.0, -0.3}};
  d.B = Matrix{{0.0}, {1.0}};
  d.Q = Matrix{{1.0, 0.0}, {0.0, 0.5}};
  d.R = Matrix{{1.0}};
  const ProblemDefinition p =
      make_lti("damped", d, ConvexSet::uniform_box(1, -1.0, 1.0),
               FixedEndpoints{vec({1.0, 0.0}), vec({0.0, 0.0})}, FixedFinalTime{3.0});
  const SolveResult r = solve(p, build_grid(3.0, 0.5), ShootingUnknowns::initial_for(p));
  EXPECT_TRUE(r.certificate.pass);
  // Exact discretisation (tests/oracles/damped_lq_oracle.py).
  const double expected[] = {-1.197004792095e-01, 3.223129191742e-01, 5.197658105585e-01,
                              5.212757825676e-01,  3.845275496185e-01, 1.546672293328e-01};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(r.extremal.controls[k][0], expected[k], 1e-7);
}

TEST(Solve, BroydenConverges) {
  const ProblemDefinition p = make_parking(2.0, 3.2);
  SolverConfig config;
  config.use_broyden = true;
  const SolveResult r = solve(p, build_grid(3.2, 0.4),
                              ShootingUnknowns::initial_for(p, parking_p0(-24 * 2 / 32.768, 24 / 10.24, 3.2)),
                              config);
  EXPECT_TRUE(r.certificate.pass);
  const parking::QpResult qp = parking::qp_oracle(2.0, 3.2, 0.4);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(r.extremal.controls[k][0], qp.controls[k], 1e-7);
}

TEST(Solve, WarmStartIndependence) {
  const ProblemDefinition p = make_parking(2.0, 3.0);
  const SamplingGrid grid = build_grid(3.0, 0.5);
  const ShootingUnknowns guess = ShootingUnknowns::initial_for(p, parking_p0(-48.0 / 27, 24.0 / 9, 3));
  const SolveResult base = solve(p, grid, guess);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    SolverConfig config;
    config.initial_control = p.control_set.project(test_support::random_vector(rng, 1, -2, 2));
    const SolveResult r = solve(p, grid, guess, config);
    for (int k = 0; k < grid.size(); ++k) {
      EXPECT_NEAR(r.extremal.controls[k][0], base.extremal.controls[k][0], 1e-9);
    }
  }
}

TEST(Solve, PartialLastIntervalMatchesGenericPath) {
  const parking::Solution sol = parking::solve(2.0, 3.0, 0.7);
  EXPECT_FALSE(sol.closed_form);
  EXPECT_TRUE(sol.certificate.pass);
  EXPECT_EQ(sol.controls.size(), 5u);
  EXPECT_LE(sol.extremal.trajectory.final_state().norm(), 1e-9);
}

TEST(Solve, FreeFinalTime) {
  // Parking with cost w + u^2 and free tf.
  const ProblemDefinition p = make_parking_time_energy(2.0, 0.5, 4.0);
  const SamplingGrid grid = build_grid(4.0, 0.25);
  const SolveResult r =
      solve(p, grid, ShootingUnknowns::initial_for(p, parking_p0(-0.75, 1.5, 4)));
  ASSERT_TRUE(r.certificate.pass);
  ASSERT_TRUE(r.certificate.free_time.has_value());
  EXPECT_LE(*r.certificate.free_time, 1e-8);
  ASSERT_TRUE(r.unknowns.tf.has_value());
  EXPECT_GT(*r.unknowns.tf, 2.0 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r.extremal.grid.final_time(), *r.unknowns.tf);
  EXPECT_LE(r.extremal.trajectory.final_state().norm(), 1e-9);
}

TEST(Solve, PeriodicForcedOscillator) {
  const ProblemDefinition p = make_forced_oscillator(0.5, 0.5, 2.0 * M_PI);
  const SamplingGrid grid = build_grid(2.0 * M_PI, 2.0 * M_PI / 12);
  const SolveResult r = solve(p, grid, ShootingUnknowns::initial_for(p));
  ASSERT_TRUE(r.certificate.pass);
  ASSERT_TRUE(r.unknowns.q_init.has_value());
  const Vector& q0 = r.extremal.trajectory.initial_state();
  EXPECT_LE((q0 - r.extremal.trajectory.final_state()).norm(), 1e-9);
  EXPECT_LE((r.extremal.adjoint.initial() - r.extremal.adjoint.final()).norm(), 1e-8);
}

TEST(Solve, PendulumFixedEndpoints) {
  const ProblemDefinition p = make_builtin({"pendulum", {{"theta0", 0.0}, {"thetaf", 1.0}}, 3.0});
  const SolveResult r = solve(p, build_grid(3.0, 0.3), ShootingUnknowns::initial_for(p));
  ASSERT_TRUE(r.certificate.pass);
  EXPECT_LE((r.extremal.trajectory.final_state() - vec({1.0, 0.0})).norm(), 1e-9);
}

TEST(Solve, GeneralTerminalIsUnsupported) {
  ProblemDefinition p = make_parking(2.0, 4.0);
  GeneralTerminal g;
  g.j = 1;
  g.g = [](const Vector& a, const Vector&) -> Vector { return a.head(1); };
  g.jac_first = [](const Vector&, const Vector&) -> Matrix { return Matrix{{1.0, 0.0}}; };
  g.jac_second = [](const Vector&, const Vector&) -> Matrix { return Matrix::Zero(1, 2); };
  p.terminal = g;
  EXPECT_THROW(solve(p, build_grid(4.0, 2.0), ShootingUnknowns{vec({0, 0}), {}, {}}),
               UnsupportedCase);
}

TEST(SolverConfig, RejectsNonpositiveSettings) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.inner_tol = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.substeps = 7;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.inner_step = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(NewtonSolve, LinearSystemInOneStep) {
  const Matrix A{{2.0, 1.0}, {1.0, 3.0}};
  const Vector b = vec({1.0, -2.0});
  NewtonOptions opts;
  const NewtonReport r =
      newton_solve([&](const Vector& x) -> Vector { return A * x - b; }, vec({0, 0}), opts);
  EXPECT_LE((A * r.solution - b).norm(), 1e-10);
  EXPECT_LE(r.iterations, 2);
  EXPECT_FALSE(r.residual_history.empty());
}

TEST(NewtonSolve, StagnationRaisesWithBestIterate) {
  NewtonOptions opts;
  opts.max_iter = 20;
  // x^2 + 1 has no real root; the best iterate approaches 0.
  try {
    newton_solve([](const Vector& x) -> Vector { return vec({x[0] * x[0] + 1.0}); }, vec({3.0}),
                 opts);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergence& e) {
    EXPECT_NEAR(e.residual(), 1.0, 1e-2);
    EXPECT_LT(std::abs(e.best_iterate()[0]), 0.2);
  }
}

TEST(ActiveSetSignature, Box) {
  const ConvexSet box = ConvexSet::uniform_box(1, -1.0, 1.0);
  EXPECT_EQ(active_set_signature(box, test_support::scalar_controls({-1.0, 0.2, 1.0, 0.0})),
            "-0+0");
}

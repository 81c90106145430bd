#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace driftlab;

namespace {

JointState scalar_state(double phi, double theta) {
  return JointState(PlayerVector{phi}, PlayerVector{theta});
}

GameDefinition bilinear() {
  return make_quadratic_zero_sum(
      QuadraticGameParams{Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)});
}

/// f = -phi, g = -theta.
GameDefinition decay() {
  return make_quadratic_common_payoff(
      QuadraticGameParams{Matrix::Identity(1, 1), Matrix::Zero(1, 1), Matrix::Identity(1, 1)});
}

}  // namespace

TEST(SimultaneousEuler, LinearToyStep) {
  const JointState next =
      step_simultaneous(make_linear_toy(0.0, 0.0), scalar_state(1.0, 0.0), StepSizes(0.1));
  EXPECT_DOUBLE_EQ(next.phi[0], 1.0);
  EXPECT_DOUBLE_EQ(next.theta[0], -0.1);
}

TEST(SimultaneousEuler, BilinearStepGrowsTheNorm) {
  const JointState next = step_simultaneous(bilinear(), scalar_state(1.0, 0.0), StepSizes(0.2));
  EXPECT_DOUBLE_EQ(next.phi[0], 1.0);
  EXPECT_DOUBLE_EQ(next.theta[0], -0.2);
  EXPECT_DOUBLE_EQ(next.stacked().squaredNorm(), 1.04);
}

TEST(SimultaneousEuler, UsesPerPlayerRates) {
  const JointState next =
      step_simultaneous(bilinear(), scalar_state(1.0, 2.0), StepSizes(0.1, 2.0, 3.0));
  EXPECT_DOUBLE_EQ(next.phi[0], 1.0 + 0.2 * 2.0);
  EXPECT_DOUBLE_EQ(next.theta[0], 2.0 - 0.30000000000000004 * 1.0);
}

TEST(AllSchemes, EquilibriumIsAFixedPoint) {
  for (const GameDefinition& game : oracle::catalog()) {
    const JointState origin(Vector(Vector::Zero(game.phi_dim)),
                            Vector(Vector::Zero(game.theta_dim)));
    for (const Scheme& s : {Scheme::simultaneous(), Scheme::alternating(2, 3), Scheme::rk4()}) {
      EXPECT_EQ(step(game.field(), s, origin, StepSizes(0.1, 1.0, 2.0)), origin) << game.name;
    }
  }
}

TEST(AlternatingEuler, SecondPlayerSeesTheUpdatedFirstPlayer) {
  const GameDefinition game = make_linear_toy(0.0, 0.0);
  const JointState alt = step_alternating(game, scalar_state(0.0, 1.0), StepSizes(0.1), {1, 1});
  EXPECT_DOUBLE_EQ(alt.phi[0], 0.1);
  EXPECT_DOUBLE_EQ(alt.theta[0], 0.99);
  const JointState sim = step_simultaneous(game, scalar_state(0.0, 1.0), StepSizes(0.1));
  EXPECT_DOUBLE_EQ(sim.theta[0], 1.0);
}

TEST(AlternatingEuler, InnerStepsComposeAsDocumented) {
  // m = 2, k = 3: two phi updates of size alpha h / 2, then three theta updates of size lambda h / 3.
  const GameDefinition game = make_random_polynomial_game(17, 2, 2, 3);
  const StepSizes rates(0.05, 1.5, 0.7);
  for (const JointState& s : oracle::random_states(2, 2, 10, 3, 1.0)) {
    Vector phi = s.phi.values();
    Vector theta = s.theta.values();
    for (int i = 0; i < 2; ++i) phi = phi + (rates.phi_rate() / 2) * game.f(phi, theta);
    for (int j = 0; j < 3; ++j) theta = theta + (rates.theta_rate() / 3) * game.g(phi, theta);
    const JointState got = step_alternating(game, s, rates, {2, 3});
    EXPECT_LT(oracle::rel_diff(got.phi.values(), phi), 1e-15);
    EXPECT_LT(oracle::rel_diff(got.theta.values(), theta), 1e-15);
  }
}

TEST(Rk4, DecayMatchesTaylorPolynomial) {
  const JointState next = step_rk4(decay(), scalar_state(1.0, 1.0), StepSizes(0.1));
  const double h = 0.1;
  const double expected = 1.0 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
  EXPECT_NEAR(next.phi[0], expected, 1e-15);
  EXPECT_NEAR(next.theta[0], expected, 1e-15);
  EXPECT_NEAR(next.phi[0], 0.9048375, 1e-7);
}

TEST(Rk4, EqualRatesMatchClassicRk4OnTheJointField) {
  const GameDefinition game = make_random_polynomial_game(23, 2, 3, 3);
  const JointField field = game.field();
  for (const JointState& s : oracle::random_states(2, 3, 10, 4, 1.0)) {
    const Vector expected = oracle::rk4_step(
        [&](const Vector& x) { return oracle::stacked_value(field, x); }, s.stacked(), 0.07);
    const JointState got = step_rk4(game, s, StepSizes(0.07));
    EXPECT_LT(oracle::rel_diff(got.stacked(), expected), 1e-14);
  }
}

TEST(Rk4, UnequalRatesScalePerPlayer) {
  // With f depending only on theta and g only on phi, each stage scales per player.
  const GameDefinition game = bilinear();
  const StepSizes rates(0.1, 1.0, 2.0);
  const JointState got = step_rk4(game, scalar_state(1.0, 0.5), rates);
  Vector x(2);
  x << 1.0, 0.5;
  auto fn = [](const Vector& y) {
    Vector d(2);
    d << 0.1 * y[1], -0.2 * y[0];
    return d;
  };
  const Vector expected = oracle::rk4_step(fn, x, 1.0);
  EXPECT_LT(oracle::rel_diff(got.stacked(), expected), 1e-15);
}

TEST(Step, RejectsMismatchedDimensions) {
  EXPECT_THROW(step_simultaneous(make_linear_toy(0.0, 0.0),
                                 JointState(PlayerVector{1.0, 2.0}, PlayerVector{0.0}), StepSizes(0.1)),
               ContractViolation);
}

TEST(Step, NonFiniteStateIsAnOverflowWithStepIndex) {
  const GameDefinition game = make_linear_toy(-1e300, 0.0);
  try {
    step(game.field(), Scheme::simultaneous(), scalar_state(1e10, 0.0), StepSizes(1.0), 17);
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_EQ(e.last_finite_step(), 16);
  }
}

TEST(Rollout, ZeroStepsReturnsTheStart) {
  const Trajectory t =
      rollout(make_linear_toy(0.1, 0.1), Scheme::simultaneous(), scalar_state(1, 1), StepSizes(0.1), 0);
  ASSERT_EQ(t.points.size(), 1u);
  EXPECT_EQ(t.points[0].step, 0);
  EXPECT_TRUE(t.completed());
}

TEST(Rollout, LinearToySimDivergesAndAltConverges) {
  const GameDefinition game = make_linear_toy(0.09, 0.09);
  const JointState start = scalar_state(1.0, 1.0);
  const StepSizes rates(0.2);
  const Trajectory sim = rollout(game, Scheme::simultaneous(), start, rates, 500);
  const Trajectory alt = rollout(game, Scheme::alternating(1, 1), start, rates, 500);
  ASSERT_EQ(sim.points.size(), 501u);
  ASSERT_EQ(alt.points.size(), 501u);
  EXPECT_GT(sim.final_state().stacked().norm(), 100.0 * start.stacked().norm());
  EXPECT_LT(alt.final_state().stacked().norm(), start.stacked().norm());
  for (std::size_t i = 0; i < sim.points.size(); ++i) {
    ASSERT_EQ(sim.points[i].step, static_cast<long>(i));
  }
}

TEST(Rollout, StopsEarlyOnOverflowKeepingFiniteStates) {
  const GameDefinition game = make_linear_toy(-10.0, 10.0);
  const Trajectory t =
      rollout(game, Scheme::simultaneous(), scalar_state(1.0, 1.0), StepSizes(1.0), 10000);
  EXPECT_FALSE(t.completed());
  EXPECT_LT(t.last_step(), 10000);
  EXPECT_GT(t.last_step(), 10);
  for (const TrajectoryPoint& p : t.points) {
    ASSERT_TRUE(p.state.stacked().allFinite());
  }
}

TEST(Rollout, IsDeterministic) {
  const GameDefinition game = make_random_polynomial_game(2, 2, 2, 2, true);
  const JointState s = oracle::random_states(2, 2, 1, 6, 0.3)[0];
  const Trajectory a = rollout(game, Scheme::alternating(2, 1), s, StepSizes(0.05), 200);
  const Trajectory b = rollout(game, Scheme::alternating(2, 1), s, StepSizes(0.05), 200);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    ASSERT_EQ(a.points[i].state, b.points[i].state);
  }
}

TEST(Flow, ZeroDurationReturnsTheStart) {
  const JointState s = scalar_state(0.3, -0.4);
  EXPECT_EQ(flow(make_dirac_gan().field(), s, 0.0), s);
}

TEST(Flow, ExponentialDecay) {
  const JointState out = flow(decay().field(), scalar_state(1.0, 1.0), 1.0, 1000);
  EXPECT_NEAR(out.phi[0], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(out.theta[0], std::exp(-1.0), 1e-12);
}

TEST(Flow, NegativeDurationRunsBackward) {
  const JointState out = flow(decay().field(), scalar_state(1.0, 1.0), -1.0, 1000);
  EXPECT_NEAR(out.phi[0], std::exp(1.0), 1e-11);
}

TEST(Flow, RotationPreservesTheNorm) {
  const JointState out = flow(make_linear_toy(0.0, 0.0).field(), scalar_state(1.0, 0.0), 1.0);
  EXPECT_NEAR(out.stacked().norm(), 1.0, 1e-10);
  EXPECT_NEAR(out.phi[0], std::cos(1.0), 1e-12);
  EXPECT_NEAR(out.theta[0], -std::sin(1.0), 1e-12);
}

TEST(Flow, RefinementConvergesAtFourthOrder) {
  const JointField field = make_dirac_gan().field();
  const JointState s = scalar_state(1.5, -1.5);
  const Vector x8 = flow(field, s, 1.0, 8).stacked();
  const Vector x16 = flow(field, s, 1.0, 16).stacked();
  const Vector x32 = flow(field, s, 1.0, 32).stacked();
  const double ratio = (x8 - x16).norm() / (x16 - x32).norm();
  EXPECT_NEAR(ratio, 16.0, 16.0 * 0.2);
}

TEST(Flow, PerPlayerReadsEachPlayerAtItsOwnTime) {
  const JointField field = decay().field();
  const JointState out = flow_per_player(field, scalar_state(1.0, 1.0), 0.5, 1.0, 1000);
  EXPECT_NEAR(out.phi[0], std::exp(-0.5), 1e-12);
  EXPECT_NEAR(out.theta[0], std::exp(-1.0), 1e-12);
}

TEST(Flow, BlowUpIsAnOverflow) {
  // phi' = phi^2 blows up at t = 1 from phi = 1.
  JointField field{1, 1, [](const Vector& p, const Vector&) {
                     return FieldValue{p.cwiseProduct(p), Vector::Zero(1)};
                   }};
  EXPECT_THROW(flow(field, scalar_state(1.0, 0.0), 5.0, 64), OverflowError);
}

TEST(Flow, RejectsBadArguments) {
  const JointField field = decay().field();
  EXPECT_THROW(flow(field, scalar_state(1.0, 1.0), 1.0, 0), ContractViolation);
  EXPECT_THROW(flow(field, scalar_state(1.0, 1.0), std::nan("")), ContractViolation);
}

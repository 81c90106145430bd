#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace driftlab;

namespace {

const JointState kScalarOrigin(PlayerVector{0.0}, PlayerVector{0.0});

GameDefinition bilinear() {
  return make_quadratic_zero_sum(
      QuadraticGameParams{Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)});
}

Vector stacked(const std::pair<PlayerVector, PlayerVector>& v) {
  Vector out(v.first.dim() + v.second.dim());
  out << v.first.values(), v.second.values();
  return out;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(RegularizerSpec, Coefficients) {
  const StepSizes r(0.2, 1.0, 3.0);
  const double a = 0.2 / 4;
  const double l = 0.6000000000000001 / 4;
  EXPECT_EQ(RegularizerSpec::none().coefficients(r), (RegularizerCoefficients{}));
  EXPECT_EQ(RegularizerSpec::cancel_interaction_sim().coefficients(r), (RegularizerCoefficients{a, l, 0, 0}));
  EXPECT_EQ(RegularizerSpec::cancel_interaction_alt().coefficients(r),
            (RegularizerCoefficients{a, l * (1 - 2.0 / 3.0), 0, 0}));
  EXPECT_EQ(RegularizerSpec::cancel_first_player_interaction_only().coefficients(r),
            (RegularizerCoefficients{a, 0, 0, 0}));
  EXPECT_EQ(RegularizerSpec::strengthen_self().coefficients(r), (RegularizerCoefficients{0, 0, a, l}));
  EXPECT_EQ(RegularizerSpec::sga(0.5).coefficients(r), (RegularizerCoefficients{0.5, 0.5, 0, 0}));
  EXPECT_EQ(RegularizerSpec::consensus(0.3).coefficients(r), (RegularizerCoefficients{0.3, 0.3, 0.3, 0.3}));
  const RegularizerCoefficients single{0.0, 0.7, 0.0, 0.0};
  EXPECT_EQ(RegularizerSpec::with_coefficients(single).coefficients(r), single);
}

TEST(RegularizerSpec, CombineSumsCoefficientsAndNames) {
  const RegularizerSpec both =
      combine(RegularizerSpec::cancel_interaction_sim(), RegularizerSpec::strengthen_self());
  const StepSizes r(0.1);
  EXPECT_EQ(both.coefficients(r), (RegularizerCoefficients{0.025, 0.025, 0.025, 0.025}));
  EXPECT_EQ(both.name(), "cancel-interaction-sim+strengthen-self");
  EXPECT_EQ(combine(RegularizerSpec::none(), RegularizerSpec::sga(1.0)).name(), "sga");
  EXPECT_EQ(combine(both, RegularizerSpec::sga(1.0)).parts.size(), 3u);
}

TEST(AdjustedFields, ZeroSpecIsBitwiseUnadjusted) {
  const GameDefinition game = make_quadratic_zero_sum(QuadraticGameParams::random(1, 2, 3));
  for (const JointState& s : oracle::random_states(2, 3, 20, 1)) {
    const Vector plain = stacked(eval_fields(game, s));
    EXPECT_TRUE(bitwise_equal(stacked(adjusted_fields(game, s, StepSizes(0.1), RegularizerSpec::none())), plain));
    EXPECT_TRUE(bitwise_equal(stacked(adjusted_fields(game, s, RegularizerCoefficients{})), plain));
    EXPECT_TRUE(bitwise_equal(stacked(sga_adjusted_fields(game, s, 0.0)), plain));
    EXPECT_TRUE(bitwise_equal(stacked(consensus_adjusted_fields(game, s, 0.0)), plain));
  }
}

TEST(AdjustedFields, BilinearCancelInteraction) {
  const double h = 0.1;
  for (const JointState& s : oracle::random_states(1, 1, 10, 2)) {
    const auto [f, g] = adjusted_fields(bilinear(), s, StepSizes(h), RegularizerSpec::cancel_interaction_sim());
    EXPECT_NEAR(f[0], s.theta[0] - h * s.phi[0] / 2, 1e-15);
    EXPECT_NEAR(g[0], -s.phi[0] - h * s.theta[0] / 2, 1e-15);
    // The interaction drift of the unregularized modified field is +h phi / 2 and +h theta / 2.
    const DriftTerms d = drift_simultaneous(bilinear(), s, StepSizes(h));
    EXPECT_NEAR(f[0] + h * d.interaction_f[0], s.theta[0], 1e-15);
  }
}

TEST(AdjustedFields, SgaIdentities) {
  const GameDefinition game = make_quadratic_zero_sum(QuadraticGameParams::random(3, 2, 2));
  const StepSizes r(0.12, 1.0, 1.0);
  for (const JointState& s : oracle::random_states(2, 2, 20, 3)) {
    for (double c : {0.5, 0.03, 1.7}) {
      EXPECT_LT(oracle::rel_diff(stacked(sga_adjusted_fields(game, s, c)),
                                 stacked(adjusted_fields(game, s, RegularizerCoefficients{c, c, 0, 0}))),
                1e-15);
    }
    EXPECT_LT(oracle::rel_diff_floor(stacked(sga_adjusted_fields(game, s, r.phi_rate() / 4)),
                                     stacked(adjusted_fields(game, s, r, RegularizerSpec::cancel_interaction_sim()))),
              1e-12);
  }
}

TEST(AdjustedFields, SgaHalfIsTheZeroSumReduction) {
  // coef 1/2 on E = phi theta: f = theta - phi, g = -phi - theta.
  for (const JointState& s : oracle::random_states(1, 1, 5, 4)) {
    const auto [f, g] = sga_adjusted_fields(bilinear(), s, 0.5);
    EXPECT_NEAR(f[0], s.theta[0] - s.phi[0], 1e-15);
    EXPECT_NEAR(g[0], -s.phi[0] - s.theta[0], 1e-15);
  }
}

TEST(AdjustedFields, ConsensusIdentities) {
  const GameDefinition game = make_quadratic_zero_sum(QuadraticGameParams::random(5, 3, 2));
  const StepSizes r(0.1);
  for (const JointState& s : oracle::random_states(3, 2, 20, 5)) {
    for (double gamma : {0.0, 0.025, 0.8}) {
      EXPECT_LT(oracle::rel_diff_floor(stacked(consensus_adjusted_fields(game, s, gamma)),
                                       stacked(adjusted_fields(game, s, RegularizerCoefficients{gamma, gamma, gamma, gamma}))),
                1e-12);
    }
    const RegularizerSpec both =
        combine(RegularizerSpec::strengthen_self(), RegularizerSpec::cancel_interaction_sim());
    EXPECT_LT(oracle::rel_diff_floor(stacked(consensus_adjusted_fields(game, s, 0.025)),
                                     stacked(adjusted_fields(game, s, r, both))),
              1e-12);
  }
}

TEST(AdjustedFields, MatchFiniteDifferenceOfRegularizedLosses) {
  std::vector<GameDefinition> games{make_quadratic_zero_sum(QuadraticGameParams::random(6, 2, 2)),
                                    make_dirac_gan()};
  const RegularizerCoefficients c{0.07, 0.11, 0.05, 0.13};
  for (const GameDefinition& game : games) {
    const Index m = game.phi_dim;
    for (const JointState& s : oracle::random_states(m, game.theta_dim, 20, 6)) {
      auto l1 = [&](const Vector& x) { return regularized_losses(game, JointState::from_stacked(x, m), c).first; };
      auto l2 = [&](const Vector& x) { return regularized_losses(game, JointState::from_stacked(x, m), c).second; };
      const Vector d1 = oracle::fd_gradient(l1, s.stacked());
      const Vector d2 = oracle::fd_gradient(l2, s.stacked());
      const auto [f, g] = adjusted_fields(game, s, c);
      ASSERT_LT(oracle::rel_diff_floor(f.values(), Vector(-d1.head(m)), 1.0), 1e-5) << game.name;
      ASSERT_LT(oracle::rel_diff_floor(g.values(), Vector(-d2.tail(game.theta_dim)), 1.0), 1e-5) << game.name;
    }
  }
}

TEST(AdjustedFields, RequireZeroSumAndFiniteCoefficients) {
  const JointState s(PlayerVector{0.1}, PlayerVector{0.2});
  EXPECT_THROW(adjusted_fields(make_linear_toy(0.1, 0.1), s, StepSizes(0.1), RegularizerSpec::sga(1.0)),
               UnsupportedGameClass);
  const GameDefinition cp = make_quadratic_common_payoff(QuadraticGameParams::random(1, 1, 1));
  EXPECT_THROW(sga_adjusted_fields(cp, s, 1.0), UnsupportedGameClass);
  EXPECT_THROW(consensus_adjusted_fields(cp, s, 1.0), UnsupportedGameClass);
  EXPECT_THROW(adjusted_fields(bilinear(), s, RegularizerCoefficients{INFINITY, 0, 0, 0}), ContractViolation);
}

TEST(RegularizedJacobian, DiracCancelInteractionIsTheMarginalThreshold) {
  const GameDefinition game = make_dirac_gan();
  for (const StepSizes& r : {StepSizes(0.1), StepSizes(0.2, 0.5, 2.0)}) {
    const RegularizedModifiedJacobian rj = regularized_modified_jacobian(
        game, kScalarOrigin, Scheme::simultaneous(), r, RegularizerSpec::cancel_interaction_sim());
    const DiracRegularizedResult ref = dirac_regularized_jacobian(r.phi_rate() / 4, r.theta_rate() / 4, r);
    EXPECT_LT((rj.matrix - ref.matrix).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(analyze(rj.matrix).classification, Classification::Marginal);
  }
}

TEST(RegularizedJacobian, MatchesDiracClosedFormForAnyPenalties) {
  const GameDefinition game = make_dirac_gan();
  const StepSizes r(0.1, 1.5, 0.5);
  for (double u : {0.0, 0.01, 0.05, 0.2}) {
    for (double nu : {0.0, 0.02, 0.3}) {
      const RegularizedModifiedJacobian rj = regularized_modified_jacobian(
          game, kScalarOrigin, Scheme::simultaneous(), r,
          RegularizerSpec::with_coefficients({u, nu, 0.0, 0.0}));
      EXPECT_LT((rj.matrix - dirac_regularized_jacobian(u, nu, r).matrix).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(RegularizedJacobian, AdjustmentJacobianMatchesFiniteDifferences) {
  const GameDefinition game = make_quadratic_zero_sum(QuadraticGameParams::random(8, 2, 3));
  const JointState eq(Vector(Vector::Zero(2)), Vector(Vector::Zero(3)));
  const RegularizerCoefficients c{0.03, 0.05, 0.07, 0.02};
  const JointField adjusted{2, 3, [&](const Vector& p, const Vector& t) {
                              auto [f, g] = adjusted_fields(game, JointState(p, t), c);
                              return FieldValue{f.values(), g.values()};
                            }};
  const Matrix expected = oracle::fd_field_jacobian(adjusted, eq.stacked()) -
                          oracle::fd_field_jacobian(game.field(), eq.stacked());
  const Matrix got = regularizer_jacobian_at_equilibrium(jacobian_blocks(game, eq), c);
  EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RegularizedJacobian, DiracConsensusLargeGammaIsStable) {
  const GameDefinition game = make_dirac_gan();
  const StepSizes r(0.1, 1.0, 2.0);
  const double threshold = std::max(r.phi_rate(), r.theta_rate()) / 4;
  const auto strong = regularized_modified_jacobian(game, kScalarOrigin, Scheme::simultaneous(), r,
                                                    RegularizerSpec::consensus(2.0 * threshold));
  EXPECT_EQ(analyze(strong.matrix).classification, Classification::AsymptoticallyStable);
  const auto none = regularized_modified_jacobian(game, kScalarOrigin, Scheme::simultaneous(), r,
                                                  RegularizerSpec::consensus(0.0));
  EXPECT_EQ(analyze(none.matrix).classification, Classification::Unstable);
}

TEST(Regularized, FirstOrderCancellationLeavesOnlySelfDrift) {
  // One regularized step against the flow of the original field plus the
  // self part of the drift: the interaction drift is removed at O(h^2), so
  // the local error drops to O(h^3).
  const GameDefinition game = make_quadratic_zero_sum(QuadraticGameParams::random(9, 2, 2));
  const JointState s0(Vector(Vector::Constant(2, 0.5)), Vector(Vector::Constant(2, -0.5)));
  const std::vector<double> grid = geometric_grid(0.1, 5);
  struct Case {
    Scheme scheme;
    RegularizerSpec spec;
    StepSizes rates;
  };
  const std::vector<Case> cases{
      {Scheme::simultaneous(), RegularizerSpec::cancel_interaction_sim(), StepSizes(1.0)},
      {Scheme::simultaneous(), RegularizerSpec::cancel_interaction_sim(), StepSizes(1.0, 0.5, 1.5)},
      {Scheme::alternating(1, 1), RegularizerSpec::cancel_interaction_alt(), StepSizes(1.0, 0.7, 1.2)},
  };
  for (const Case& c : cases) {
    auto discrete = [&](double h) {
      const StepSizes r = c.rates.with_h(h);
      return step(regularized_field(game, r, c.spec), c.scheme, s0, r);
    };
    auto reference = [&](double h) {
      const StepSizes r = c.rates.with_h(h);
      const JointField self = modified_field(game, c.scheme, r, DriftPart::SelfOnly).as_field();
      return flow_per_player(self, s0, r.phi_rate(), r.theta_rate());
    };
    auto unregularized = [&](double h) {
      return step(game.field(), c.scheme, s0, c.rates.with_h(h));
    };
    const OrderFit fit = local_error_order(discrete, reference, grid);
    EXPECT_NEAR(fit.slope, 3.0, 0.3) << c.scheme.name();
    const OrderFit plain = local_error_order(unregularized, reference, grid);
    EXPECT_NEAR(plain.slope, 2.0, 0.3) << c.scheme.name();
  }
}

TEST(Regularized, RolloutWithZeroSpecIsThePlainRollout) {
  const GameDefinition game = make_dirac_gan();
  const JointState s(PlayerVector{0.5}, PlayerVector{0.5});
  const Trajectory a = rollout(game, Scheme::simultaneous(), s, StepSizes(0.1), 50);
  const Trajectory b = rollout(game, Scheme::simultaneous(), s, StepSizes(0.1), 50, RegularizerSpec::none());
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) ASSERT_EQ(a.points[i].state, b.points[i].state);
  EXPECT_EQ(a.game_name, b.game_name);
}

TEST(Regularized, ConsensusRolloutConvergesOnDirac) {
  const GameDefinition game = make_dirac_gan();
  const JointState s(PlayerVector{0.5}, PlayerVector{0.5});
  const Trajectory plain = rollout(game, Scheme::simultaneous(), s, StepSizes(0.1), 2000);
  const Trajectory reg = rollout(game, Scheme::simultaneous(), s, StepSizes(0.1), 2000, RegularizerSpec::consensus(0.5));
  EXPECT_GT(plain.final_state().stacked().norm(), s.stacked().norm());
  EXPECT_LT(reg.final_state().stacked().norm(), 0.1 * s.stacked().norm());
  EXPECT_EQ(reg.game_name, game.name + "+consensus");
}

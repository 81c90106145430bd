#pragma once

// First-order discretization drift: correction terms (f1, g1), their
// self/interaction split, modified vector fields, and the modified-loss
// gradients of zero-sum and common-payoff games.
//
// Scaling convention for the Euler schemes: alpha (resp. lambda) is folded
// into f1 (resp. g1) and the modified field is (f + h f1, g + h g1):
//   simultaneous: f1 = -(alpha/2)(Jpf f + Jtf g),        g1 = -(lambda/2)(Jpg f + Jtg g)
//   alternating:  f1 = -(alpha/2)(Jpf f / m + Jtf g),    g1 = -(lambda/2)(c Jpg f + Jtg g / k)
// with c = 1 - 2 alpha / lambda and Jpf = df/dphi, Jtf = df/dtheta, etc.
//
// RK4 with unequal rates: f1 = (lambda/alpha - 1) Jtf g / 2 and
// g1 = (alpha/lambda - 1) Jpg f / 2 as matched against per-player flow
// times alpha h and lambda h, so the modified field is (f + alpha h f1, g + lambda h g1).

#include "driftlab/core.hpp"
#include "driftlab/integrators.hpp"

namespace driftlab {

struct DriftTerms {
  PlayerVector f1;
  PlayerVector g1;
  PlayerVector self_f;
  PlayerVector interaction_f;
  PlayerVector self_g;
  PlayerVector interaction_g;
};

namespace detail {

struct RawDrift {
  Vector self_f, interaction_f, self_g, interaction_g;

  Vector f1() const { return self_f + interaction_f; }
  Vector g1() const { return self_g + interaction_g; }

  DriftTerms terms() const {
    return {PlayerVector(f1()),          PlayerVector(g1()),   PlayerVector(self_f),
            PlayerVector(interaction_f), PlayerVector(self_g), PlayerVector(interaction_g)};
  }
};

/// Euler drift with self weights (1/m, 1/k) and player-2 interaction weight c.
inline RawDrift euler_drift(const Vector& f, const Vector& g, const JacobianBlocks& b,
                            const StepSizes& rates, double inv_m, double inv_k,
                            double interaction_weight) {
  const double a = rates.alpha;
  const double l = rates.lambda;
  RawDrift d;
  d.self_f = (-0.5 * a * inv_m) * (b.d_phi_f * f);
  d.interaction_f = (-0.5 * a) * (b.d_theta_f * g);
  d.self_g = (-0.5 * l * inv_k) * (b.d_theta_g * g);
  d.interaction_g = (-0.5 * l * interaction_weight) * (b.d_phi_g * f);
  return d;
}

inline RawDrift rk4_drift(const Vector& f, const Vector& g, const JacobianBlocks& b,
                          const StepSizes& rates) {
  const double a = rates.alpha;
  const double l = rates.lambda;
  RawDrift d;
  d.self_f = Vector::Zero(f.size());
  d.self_g = Vector::Zero(g.size());
  d.interaction_f = (0.5 * (l / a - 1.0)) * (b.d_theta_f * g);
  d.interaction_g = (0.5 * (a / l - 1.0)) * (b.d_phi_g * f);
  return d;
}

inline double alternating_interaction_weight(const StepSizes& rates) {
  return 1.0 - 2.0 * rates.alpha / rates.lambda;
}

inline RawDrift raw_drift(const Scheme& scheme, const Vector& f, const Vector& g,
                          const JacobianBlocks& b, const StepSizes& rates) {
  switch (scheme.variant) {
    case Scheme::Variant::SimultaneousEuler: return euler_drift(f, g, b, rates, 1.0, 1.0, 1.0);
    case Scheme::Variant::AlternatingEuler:
      return euler_drift(f, g, b, rates, 1.0 / scheme.counts.m, 1.0 / scheme.counts.k,
                         alternating_interaction_weight(rates));
    case Scheme::Variant::RungeKutta4: return rk4_drift(f, g, b, rates);
  }
  throw ContractViolation("unknown scheme");
}

inline RawDrift raw_drift_at(const GameDefinition& game, const Scheme& scheme, const Vector& phi,
                             const Vector& theta, const StepSizes& rates, Vector& f, Vector& g) {
  f = game.f(phi, theta);
  g = game.g(phi, theta);
  const JacobianBlocks b =
      game.has_analytic_jacobian()
          ? (*game.jacobian)(phi, theta)
          : jacobian_blocks(game, JointState(phi, theta), DerivativeMode::FiniteDifference);
  return raw_drift(scheme, f, g, b, rates);
}

}  // namespace detail

inline DriftTerms drift(const GameDefinition& game, const JointState& state, const Scheme& scheme,
                        const StepSizes& rates) {
  game.check_state(state);
  Vector f, g;
  return detail::raw_drift_at(game, scheme, state.phi.values(), state.theta.values(), rates, f, g)
      .terms();
}

inline DriftTerms drift_simultaneous(const GameDefinition& game, const JointState& state,
                                     const StepSizes& rates) {
  return drift(game, state, Scheme::simultaneous(), rates);
}

inline DriftTerms drift_alternating(const GameDefinition& game, const JointState& state,
                                    const StepSizes& rates, const UpdateCounts& counts) {
  return drift(game, state, Scheme::alternating(counts), rates);
}

inline DriftTerms drift_rk4_unequal(const GameDefinition& game, const JointState& state,
                                    const StepSizes& rates) {
  return drift(game, state, Scheme::rk4(), rates);
}

/// Which part of the drift a modified field adds to the original field.
enum class DriftPart { Total, SelfOnly, InteractionOnly };

/// The modified continuous system that one step of `scheme` follows to O(h^3).
/// At every equilibrium of the game the modified field vanishes.
struct ModifiedField {
  GameDefinition game;
  Scheme scheme;
  StepSizes rates;
  DriftPart part = DriftPart::Total;

  FieldValue operator()(const Vector& phi, const Vector& theta) const {
    FieldValue out;
    const detail::RawDrift d =
        detail::raw_drift_at(game, scheme, phi, theta, rates, out.f, out.g);
    const double phi_scale = scheme.is_rk4() ? rates.phi_rate() : rates.h;
    const double theta_scale = scheme.is_rk4() ? rates.theta_rate() : rates.h;
    switch (part) {
      case DriftPart::Total:
        out.f += phi_scale * d.f1();
        out.g += theta_scale * d.g1();
        break;
      case DriftPart::SelfOnly:
        out.f += phi_scale * d.self_f;
        out.g += theta_scale * d.self_g;
        break;
      case DriftPart::InteractionOnly:
        out.f += phi_scale * d.interaction_f;
        out.g += theta_scale * d.interaction_g;
        break;
    }
    return out;
  }

  FieldValue at(const JointState& state) const {
    game.check_state(state);
    return (*this)(state.phi.values(), state.theta.values());
  }

  JointField as_field() const {
    return {game.phi_dim, game.theta_dim,
            [self = *this](const Vector& p, const Vector& t) { return self(p, t); }};
  }
};

inline ModifiedField modified_field(const GameDefinition& game, const Scheme& scheme,
                                    const StepSizes& rates, DriftPart part = DriftPart::Total) {
  return ModifiedField{game, scheme, rates, part};
}

// ---------------------------------------------------------------------------
// Modified losses (corollary route)
//
// L1~ = s1 E + p1 ||grad_phi E||^2 + q1 ||grad_theta E||^2
// L2~ = s2 E + p2 ||grad_phi E||^2 + q2 ||grad_theta E||^2
// with (s1, s2) = (-1, +1) for zero-sum and (+1, +1) for common-payoff games.

struct ModifiedLossCoefficients {
  double p1 = 0.0;  ///< player 1, ||grad_phi E||^2
  double q1 = 0.0;  ///< player 1, ||grad_theta E||^2
  double p2 = 0.0;  ///< player 2, ||grad_phi E||^2
  double q2 = 0.0;  ///< player 2, ||grad_theta E||^2
};

inline ModifiedLossCoefficients zero_sum_loss_coefficients(const StepSizes& r, const Scheme& scheme) {
  const double a = r.phi_rate() / 4.0;
  const double l = r.theta_rate() / 4.0;
  if (scheme.is_simultaneous()) {
    return {a, -a, -l, l};
  }
  if (scheme.is_alternating()) {
    return {a / scheme.counts.m, -a, -l * detail::alternating_interaction_weight(r),
            l / scheme.counts.k};
  }
  throw ContractViolation("modified losses are defined for the Euler schemes only");
}

inline ModifiedLossCoefficients common_payoff_loss_coefficients(const StepSizes& r,
                                                                const Scheme& scheme) {
  const double a = r.phi_rate() / 4.0;
  const double l = r.theta_rate() / 4.0;
  if (scheme.is_simultaneous()) {
    return {a, a, l, l};
  }
  if (scheme.is_alternating()) {
    return {a / scheme.counts.m, a, l * detail::alternating_interaction_weight(r),
            l / scheme.counts.k};
  }
  throw ContractViolation("modified losses are defined for the Euler schemes only");
}

namespace detail {

inline std::pair<PlayerVector, PlayerVector> modified_loss_gradients(
    const GameDefinition& game, const JointState& state, const ModifiedLossCoefficients& c) {
  const auto [grad_phi, grad_theta] = potential_gradient(game, state);
  const double s1 = game.kind == GameKind::ZeroSum ? -1.0 : 1.0;
  const Vector pp = grad_norm_gradient(game, state, Player::Phi, Player::Phi).values();
  const Vector pt = grad_norm_gradient(game, state, Player::Phi, Player::Theta).values();
  const Vector tp = grad_norm_gradient(game, state, Player::Theta, Player::Phi).values();
  const Vector tt = grad_norm_gradient(game, state, Player::Theta, Player::Theta).values();
  Vector f_mod = -(s1 * grad_phi + c.p1 * pp + c.q1 * pt);
  Vector g_mod = -(grad_theta + c.p2 * tp + c.q2 * tt);
  return {PlayerVector(std::move(f_mod)), PlayerVector(std::move(g_mod))};
}

}  // namespace detail

/// (-grad_phi L1~, -grad_theta L2~) for a zero-sum game.
inline std::pair<PlayerVector, PlayerVector> zero_sum_modified_gradients(const GameDefinition& game,
                                                                         const JointState& state,
                                                                         const StepSizes& rates,
                                                                         const Scheme& scheme) {
  if (game.kind != GameKind::ZeroSum || !game.potential) {
    throw UnsupportedGameClass("zero_sum_modified_gradients: '" + game.name + "' is " +
                               to_string(game.kind));
  }
  game.check_state(state);
  return detail::modified_loss_gradients(game, state, zero_sum_loss_coefficients(rates, scheme));
}

/// (-grad_phi L1~, -grad_theta L2~) for a common-payoff game.
inline std::pair<PlayerVector, PlayerVector> common_payoff_modified_gradients(
    const GameDefinition& game, const JointState& state, const StepSizes& rates,
    const Scheme& scheme) {
  if (game.kind != GameKind::CommonPayoff || !game.potential) {
    throw UnsupportedGameClass("common_payoff_modified_gradients: '" + game.name + "' is " +
                               to_string(game.kind));
  }
  game.check_state(state);
  return detail::modified_loss_gradients(game, state,
                                         common_payoff_loss_coefficients(rates, scheme));
}

/// Scalar modified losses (L1~, L2~) at the state.
inline std::pair<double, double> modified_losses(const GameDefinition& game, const JointState& state,
                                                 const StepSizes& rates, const Scheme& scheme) {
  if (!game.has_potential()) {
    throw UnsupportedGameClass("modified_losses: '" + game.name + "' has no potential");
  }
  game.check_state(state);
  const bool zero_sum = game.kind == GameKind::ZeroSum;
  const ModifiedLossCoefficients c = zero_sum ? zero_sum_loss_coefficients(rates, scheme)
                                              : common_payoff_loss_coefficients(rates, scheme);
  const double e = (*game.potential)(state.phi.values(), state.theta.values());
  const auto [gp, gt] = potential_gradient(game, state);
  const double np = gp.squaredNorm();
  const double nt = gt.squaredNorm();
  return {(zero_sum ? -e : e) + c.p1 * np + c.q1 * nt, e + c.p2 * np + c.q2 * nt};
}

}  // namespace driftlab

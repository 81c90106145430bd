#pragma once

// Explicit gradient-norm regularizers for zero-sum games, applied as
// adjustments of the update fields:
//   L1 = -E + c1 ||grad_theta E||^2 + s1 ||grad_phi E||^2
//   L2 =  E + c2 ||grad_phi E||^2   + s2 ||grad_theta E||^2
//   f_adj = -grad_phi L1,  g_adj = -grad_theta L2.

#include "driftlab/core.hpp"
#include "driftlab/drift.hpp"
#include "driftlab/integrators.hpp"
#include "driftlab/stability.hpp"

#include <string>
#include <vector>

namespace driftlab {

struct RegularizerCoefficients {
  double c1 = 0.0;  ///< player 1, ||grad_theta E||^2 (interaction)
  double c2 = 0.0;  ///< player 2, ||grad_phi E||^2 (interaction)
  double s1 = 0.0;  ///< player 1, ||grad_phi E||^2 (self)
  double s2 = 0.0;  ///< player 2, ||grad_theta E||^2 (self)

  bool is_zero() const { return c1 == 0.0 && c2 == 0.0 && s1 == 0.0 && s2 == 0.0; }

  RegularizerCoefficients operator+(const RegularizerCoefficients& o) const {
    return {c1 + o.c1, c2 + o.c2, s1 + o.s1, s2 + o.s2};
  }

  friend bool operator==(const RegularizerCoefficients& a, const RegularizerCoefficients& b) {
    return a.c1 == b.c1 && a.c2 == b.c2 && a.s1 == b.s1 && a.s2 == b.s2;
  }
};

/// A regularizer whose coefficients may depend on the step sizes.
struct RegularizerSpec {
  enum class Kind {
    None,
    CancelInteractionSim,
    CancelInteractionAlt,
    CancelFirstPlayerInteractionOnly,
    SGA,
    Consensus,
    StrengthenSelf,
    Custom,
    Combined,
  };

  Kind kind = Kind::None;
  double parameter = 0.0;            ///< SGA coefficient or consensus gamma
  RegularizerCoefficients custom{};  ///< Custom only
  std::vector<RegularizerSpec> parts;  ///< Combined only

  static RegularizerSpec of(Kind kind, double parameter = 0.0, RegularizerCoefficients c = {}) {
    RegularizerSpec s;
    s.kind = kind;
    s.parameter = parameter;
    s.custom = c;
    return s;
  }
  static RegularizerSpec none() { return {}; }
  static RegularizerSpec cancel_interaction_sim() { return of(Kind::CancelInteractionSim); }
  static RegularizerSpec cancel_interaction_alt() { return of(Kind::CancelInteractionAlt); }
  static RegularizerSpec cancel_first_player_interaction_only() {
    return of(Kind::CancelFirstPlayerInteractionOnly);
  }
  static RegularizerSpec sga(double coef) { return of(Kind::SGA, coef); }
  static RegularizerSpec consensus(double gamma) { return of(Kind::Consensus, gamma); }
  static RegularizerSpec strengthen_self() { return of(Kind::StrengthenSelf); }
  /// Any fixed set of coefficients, e.g. a single-sided penalty.
  static RegularizerSpec with_coefficients(RegularizerCoefficients c) {
    return of(Kind::Custom, 0.0, c);
  }

  RegularizerCoefficients coefficients(const StepSizes& rates) const {
    const double a = rates.phi_rate() / 4.0;
    const double l = rates.theta_rate() / 4.0;
    switch (kind) {
      case Kind::None: return {};
      case Kind::CancelInteractionSim: return {a, l, 0.0, 0.0};
      case Kind::CancelInteractionAlt:
        return {a, l * detail::alternating_interaction_weight(rates), 0.0, 0.0};
      case Kind::CancelFirstPlayerInteractionOnly: return {a, 0.0, 0.0, 0.0};
      case Kind::SGA: return {parameter, parameter, 0.0, 0.0};
      case Kind::Consensus: return {parameter, parameter, parameter, parameter};
      case Kind::StrengthenSelf: return {0.0, 0.0, a, l};
      case Kind::Custom: return custom;
      case Kind::Combined: {
        RegularizerCoefficients sum;
        for (const RegularizerSpec& p : parts) {
          sum = sum + p.coefficients(rates);
        }
        return sum;
      }
    }
    throw ContractViolation("unknown regularizer kind");
  }

  std::string name() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::CancelInteractionSim: return "cancel-interaction-sim";
      case Kind::CancelInteractionAlt: return "cancel-interaction-alt";
      case Kind::CancelFirstPlayerInteractionOnly: return "cancel-first-player-interaction";
      case Kind::SGA: return "sga";
      case Kind::Consensus: return "consensus";
      case Kind::StrengthenSelf: return "strengthen-self";
      case Kind::Custom: return "custom";
      case Kind::Combined: {
        std::string out;
        for (const RegularizerSpec& p : parts) {
          out += (out.empty() ? "" : "+") + p.name();
        }
        return out.empty() ? "none" : out;
      }
    }
    return "?";
  }
};

inline RegularizerSpec combine(const RegularizerSpec& a, const RegularizerSpec& b) {
  RegularizerSpec out = RegularizerSpec::of(RegularizerSpec::Kind::Combined);
  for (const RegularizerSpec* s : {&a, &b}) {
    if (s->kind == RegularizerSpec::Kind::Combined) {
      out.parts.insert(out.parts.end(), s->parts.begin(), s->parts.end());
    } else if (s->kind != RegularizerSpec::Kind::None) {
      out.parts.push_back(*s);
    }
  }
  return out;
}

namespace detail {

inline void require_zero_sum(const GameDefinition& game, const char* what) {
  if (game.kind != GameKind::ZeroSum || !game.potential) {
    throw UnsupportedGameClass(std::string(what) + ": requires a zero-sum game; '" + game.name +
                               "' is " + to_string(game.kind));
  }
}

inline void require_finite(const RegularizerCoefficients& c) {
  if (!std::isfinite(c.c1) || !std::isfinite(c.c2) || !std::isfinite(c.s1) ||
      !std::isfinite(c.s2)) {
    throw ContractViolation("regularizer coefficients must be finite");
  }
}

/// Coefficient-level adjustment; terms with a zero coefficient are skipped so
/// that an all-zero set returns the unadjusted fields bit for bit.
inline std::pair<PlayerVector, PlayerVector> adjust(const GameDefinition& game,
                                                    const JointState& state,
                                                    const RegularizerCoefficients& c) {
  require_finite(c);
  auto [f, g] = eval_fields(game, state);
  if (c.is_zero()) {
    return {std::move(f), std::move(g)};
  }
  Vector fa = f.values();
  Vector ga = g.values();
  if (c.c1 != 0.0) fa -= c.c1 * grad_norm_gradient(game, state, Player::Phi, Player::Theta).values();
  if (c.s1 != 0.0) fa -= c.s1 * grad_norm_gradient(game, state, Player::Phi, Player::Phi).values();
  if (c.c2 != 0.0) ga -= c.c2 * grad_norm_gradient(game, state, Player::Theta, Player::Phi).values();
  if (c.s2 != 0.0) ga -= c.s2 * grad_norm_gradient(game, state, Player::Theta, Player::Theta).values();
  return {PlayerVector(std::move(fa)), PlayerVector(std::move(ga))};
}

}  // namespace detail

inline std::pair<PlayerVector, PlayerVector> adjusted_fields(const GameDefinition& game,
                                                             const JointState& state,
                                                             const StepSizes& rates,
                                                             const RegularizerSpec& spec) {
  detail::require_zero_sum(game, "adjusted_fields");
  return detail::adjust(game, state, spec.coefficients(rates));
}

inline std::pair<PlayerVector, PlayerVector> adjusted_fields(const GameDefinition& game,
                                                             const JointState& state,
                                                             const RegularizerCoefficients& c) {
  detail::require_zero_sum(game, "adjusted_fields");
  return detail::adjust(game, state, c);
}

/// f_adj = grad_phi E - coef grad_phi ||grad_theta E||^2,
/// g_adj = -grad_theta E - coef grad_theta ||grad_phi E||^2.
inline std::pair<PlayerVector, PlayerVector> sga_adjusted_fields(const GameDefinition& game,
                                                                 const JointState& state,
                                                                 double coef) {
  detail::require_zero_sum(game, "sga_adjusted_fields");
  return detail::adjust(game, state, {coef, coef, 0.0, 0.0});
}

inline std::pair<PlayerVector, PlayerVector> consensus_adjusted_fields(const GameDefinition& game,
                                                                       const JointState& state,
                                                                       double gamma) {
  detail::require_zero_sum(game, "consensus_adjusted_fields");
  return detail::adjust(game, state, {gamma, gamma, gamma, gamma});
}

/// Scalar regularized losses (L1, L2).
inline std::pair<double, double> regularized_losses(const GameDefinition& game,
                                                    const JointState& state,
                                                    const RegularizerCoefficients& c) {
  detail::require_zero_sum(game, "regularized_losses");
  game.check_state(state);
  const double e = (*game.potential)(state.phi.values(), state.theta.values());
  const auto [gp, gt] = potential_gradient(game, state);
  const double np = gp.squaredNorm();
  const double nt = gt.squaredNorm();
  return {-e + c.c1 * nt + c.s1 * np, e + c.c2 * np + c.s2 * nt};
}

/// The adjusted update fields as a joint field for the steppers.
inline JointField regularized_field(const GameDefinition& game, const StepSizes& rates,
                                    const RegularizerSpec& spec) {
  detail::require_zero_sum(game, "regularized_field");
  const RegularizerCoefficients c = spec.coefficients(rates);
  detail::require_finite(c);
  return {game.phi_dim, game.theta_dim, [game, c](const Vector& p, const Vector& t) {
            auto [f, g] = detail::adjust(game, JointState(p, t), c);
            return FieldValue{f.values(), g.values()};
          }};
}

inline Trajectory rollout(const GameDefinition& game, const Scheme& scheme, const JointState& state0,
                          const StepSizes& rates, long n_steps, const RegularizerSpec& spec) {
  game.check_state(state0);
  if (spec.coefficients(rates).is_zero()) {
    return rollout(game, scheme, state0, rates, n_steps);
  }
  return rollout(regularized_field(game, rates, spec), game.name + "+" + spec.name(), scheme,
                 state0, rates, n_steps);
}

/// Jacobian of the regularizer adjustment (f_adj - f, g_adj - g) at an
/// equilibrium, where the gradient of E vanishes and only products of Hessian
/// blocks remain. Hessian blocks of E: Hpp = Fp, Hpt = Ft, Htp = -Gp, Htt = -Gt.
inline Matrix regularizer_jacobian_at_equilibrium(const JacobianBlocks& b,
                                                  const RegularizerCoefficients& c) {
  const Matrix& hpp = b.d_phi_f;
  const Matrix& hpt = b.d_theta_f;
  const Matrix htp = -b.d_phi_g;
  const Matrix htt = -b.d_theta_g;
  JacobianBlocks r;
  r.d_phi_f = -2.0 * (c.c1 * (hpt * htp) + c.s1 * (hpp * hpp));
  r.d_theta_f = -2.0 * (c.c1 * (hpt * htt) + c.s1 * (hpp * hpt));
  r.d_phi_g = -2.0 * (c.c2 * (htp * hpp) + c.s2 * (htt * htp));
  r.d_theta_g = -2.0 * (c.c2 * (htp * hpt) + c.s2 * (htt * htt));
  return r.assembled();
}

/// Modified Jacobian of the drift of the original updates plus the Jacobian of
/// the explicit regularizer. The drift induced by the regularizer itself is
/// of higher order in h and is not included.
struct RegularizedModifiedJacobian {
  ModifiedJacobian modified;  ///< drift of the unregularized updates
  Matrix regularizer;         ///< Jacobian of the adjustment
  Matrix matrix;              ///< modified.matrix + regularizer
};

inline RegularizedModifiedJacobian regularized_modified_jacobian(const GameDefinition& game,
                                                                 const JointState& equilibrium,
                                                                 const Scheme& scheme,
                                                                 const StepSizes& rates,
                                                                 const RegularizerSpec& spec) {
  detail::require_zero_sum(game, "regularized_modified_jacobian");
  RegularizedModifiedJacobian out;
  out.modified = modified_jacobian(game, equilibrium, scheme, rates);
  const RegularizerCoefficients c = spec.coefficients(rates);
  detail::require_finite(c);
  out.regularizer =
      regularizer_jacobian_at_equilibrium(best_jacobian_blocks(game, equilibrium), c);
  out.matrix = out.modified.matrix + out.regularizer;
  return out;
}

}  // namespace driftlab

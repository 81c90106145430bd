#pragma once

// Discrete update schemes whose drift is studied (simultaneous and alternating
// Euler, two-player RK4) and a fixed-step RK4 reference flow.

#include "driftlab/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driftlab {

struct Scheme {
  enum class Variant { SimultaneousEuler, AlternatingEuler, RungeKutta4 };

  Variant variant = Variant::SimultaneousEuler;
  UpdateCounts counts{};  ///< only meaningful for AlternatingEuler

  static Scheme simultaneous() { return {Variant::SimultaneousEuler, {}}; }
  static Scheme alternating(int m = 1, int k = 1) {
    return {Variant::AlternatingEuler, UpdateCounts(m, k)};
  }
  static Scheme alternating(UpdateCounts counts) { return {Variant::AlternatingEuler, counts}; }
  static Scheme rk4() { return {Variant::RungeKutta4, {}}; }

  bool is_simultaneous() const { return variant == Variant::SimultaneousEuler; }
  bool is_alternating() const { return variant == Variant::AlternatingEuler; }
  bool is_rk4() const { return variant == Variant::RungeKutta4; }

  std::string name() const {
    switch (variant) {
      case Variant::SimultaneousEuler: return "sim";
      case Variant::AlternatingEuler:
        return "alt(" + std::to_string(counts.m) + "," + std::to_string(counts.k) + ")";
      case Variant::RungeKutta4: return "rk4";
    }
    return "?";
  }
};

namespace detail {

inline void require_finite_step(const Vector& phi, const Vector& theta, const char* scheme,
                                long step_index) {
  if (!phi.allFinite() || !theta.allFinite()) {
    std::ostringstream os;
    os << scheme << " step";
    if (step_index >= 0) {
      os << " " << step_index;
    }
    os << " produced a non-finite state";
    throw OverflowError(os.str(), step_index >= 0 ? step_index - 1 : -1);
  }
}

inline void check_field_dims(const JointField& field, const JointState& state) {
  if (state.phi_dim() != field.phi_dim || state.theta_dim() != field.theta_dim) {
    throw ContractViolation("state dims do not match the field");
  }
}

}  // namespace detail

/// phi' = phi + alpha h f(phi, theta), theta' = theta + lambda h g(phi, theta).
inline JointState step_simultaneous(const JointField& field, const JointState& state,
                                    const StepSizes& rates, long step_index = -1) {
  detail::check_field_dims(field, state);
  const Vector& phi = state.phi.values();
  const Vector& theta = state.theta.values();
  const FieldValue v = field.eval(phi, theta);
  Vector next_phi = phi + rates.phi_rate() * v.f;
  Vector next_theta = theta + rates.theta_rate() * v.g;
  detail::require_finite_step(next_phi, next_theta, "simultaneous Euler", step_index);
  return JointState(std::move(next_phi), std::move(next_theta));
}

/// m phi-updates of size alpha h / m against the frozen old theta, then k
/// theta-updates of size lambda h / k against the new phi.
inline JointState step_alternating(const JointField& field, const JointState& state,
                                   const StepSizes& rates, const UpdateCounts& counts,
                                   long step_index = -1) {
  detail::check_field_dims(field, state);
  const double phi_step = rates.phi_rate() / counts.m;
  const double theta_step = rates.theta_rate() / counts.k;
  Vector phi = state.phi.values();
  Vector theta = state.theta.values();
  for (int i = 0; i < counts.m; ++i) {
    phi += phi_step * field.eval(phi, theta).f;
  }
  for (int j = 0; j < counts.k; ++j) {
    theta += theta_step * field.eval(phi, theta).g;
  }
  detail::require_finite_step(phi, theta, "alternating Euler", step_index);
  return JointState(std::move(phi), std::move(theta));
}

/// Classic four-stage RK4 where each player advances its own coordinates with
/// its own effective step (alpha h for phi, lambda h for theta).
inline JointState step_rk4(const JointField& field, const JointState& state, const StepSizes& rates,
                           long step_index = -1) {
  detail::check_field_dims(field, state);
  const double hp = rates.phi_rate();
  const double ht = rates.theta_rate();
  const Vector& phi = state.phi.values();
  const Vector& theta = state.theta.values();

  const FieldValue k1 = field.eval(phi, theta);
  const FieldValue k2 = field.eval(phi + (hp / 2) * k1.f, theta + (ht / 2) * k1.g);
  const FieldValue k3 = field.eval(phi + (hp / 2) * k2.f, theta + (ht / 2) * k2.g);
  const FieldValue k4 = field.eval(phi + hp * k3.f, theta + ht * k3.g);

  Vector next_phi = phi + (hp / 6) * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
  Vector next_theta = theta + (ht / 6) * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
  detail::require_finite_step(next_phi, next_theta, "RK4", step_index);
  return JointState(std::move(next_phi), std::move(next_theta));
}

inline JointState step(const JointField& field, const Scheme& scheme, const JointState& state,
                       const StepSizes& rates, long step_index = -1) {
  switch (scheme.variant) {
    case Scheme::Variant::SimultaneousEuler:
      return step_simultaneous(field, state, rates, step_index);
    case Scheme::Variant::AlternatingEuler:
      return step_alternating(field, state, rates, scheme.counts, step_index);
    case Scheme::Variant::RungeKutta4:
      return step_rk4(field, state, rates, step_index);
  }
  throw ContractViolation("unknown scheme");
}

inline JointState step_simultaneous(const GameDefinition& game, const JointState& state,
                                    const StepSizes& rates) {
  game.check_state(state);
  return step_simultaneous(game.field(), state, rates);
}
inline JointState step_alternating(const GameDefinition& game, const JointState& state,
                                   const StepSizes& rates, const UpdateCounts& counts) {
  game.check_state(state);
  return step_alternating(game.field(), state, rates, counts);
}
inline JointState step_rk4(const GameDefinition& game, const JointState& state,
                           const StepSizes& rates) {
  game.check_state(state);
  return step_rk4(game.field(), state, rates);
}

// ---------------------------------------------------------------------------
// Rollouts

struct TrajectoryPoint {
  long step = 0;
  JointState state;
};

struct Trajectory {
  std::string game_name;
  Scheme scheme;
  StepSizes rates;
  std::vector<TrajectoryPoint> points;
  /// Set when the rollout stopped early on a non-finite state.
  std::optional<std::string> overflow;

  bool completed() const { return !overflow.has_value(); }
  long last_step() const { return points.empty() ? -1 : points.back().step; }
  const JointState& final_state() const { return points.back().state; }
};

/// Apply the scheme n_steps times, recording every state. A non-finite state
/// ends the rollout early; the trajectory keeps every finite state and
/// records the reason in `overflow`.
inline Trajectory rollout(const JointField& field, const std::string& name, const Scheme& scheme,
                          const JointState& state0, const StepSizes& rates, long n_steps) {
  if (n_steps < 0) {
    throw ContractViolation("rollout: n_steps must be >= 0");
  }
  detail::check_field_dims(field, state0);
  Trajectory traj{name, scheme, rates, {}, std::nullopt};
  traj.points.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.points.push_back({0, state0});
  JointState current = state0;
  for (long i = 1; i <= n_steps; ++i) {
    try {
      current = step(field, scheme, current, rates, i);
    } catch (const OverflowError& e) {
      traj.overflow = std::string(e.what()) + " (last finite step " + std::to_string(i - 1) + ")";
      break;
    }
    traj.points.push_back({i, current});
  }
  return traj;
}

inline Trajectory rollout(const GameDefinition& game, const Scheme& scheme, const JointState& state0,
                          const StepSizes& rates, long n_steps) {
  game.check_state(state0);
  return rollout(game.field(), game.name, scheme, state0, rates, n_steps);
}

// ---------------------------------------------------------------------------
// Reference flow

inline constexpr int kDefaultFlowSubsteps = 1024;

/// Integrate the joint field for `duration` with `substeps` equal classic RK4 steps.
inline JointState flow(const JointField& field, const JointState& state0, double duration,
                       int substeps = kDefaultFlowSubsteps) {
  if (substeps < 1) {
    throw ContractViolation("flow: substeps must be >= 1");
  }
  if (!std::isfinite(duration)) {
    throw ContractViolation("flow: duration must be finite");
  }
  detail::check_field_dims(field, state0);
  if (duration == 0.0) {
    return state0;
  }
  const double dt = duration / substeps;
  const Index m = field.phi_dim;
  Vector x = state0.stacked();
  Vector k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size());
  auto eval = [&](const Vector& at, Vector& out) {
    FieldValue v = field.eval(at.head(m), at.tail(at.size() - m));
    out << v.f, v.g;
  };
  for (int s = 0; s < substeps; ++s) {
    eval(x, k1);
    eval(x + (dt / 2) * k1, k2);
    eval(x + (dt / 2) * k2, k3);
    eval(x + dt * k3, k4);
    x += (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw OverflowError("flow: non-finite state at substep " + std::to_string(s), s - 1);
    }
  }
  return JointState::from_stacked(x, m);
}

/// Flow where phi is read off after duration phi_duration and theta after
/// theta_duration. Backward-error matching for unequal rates compares each
/// player's discrete update against the flow run for that player's own
/// effective step.
inline JointState flow_per_player(const JointField& field, const JointState& state0,
                                  double phi_duration, double theta_duration,
                                  int substeps = kDefaultFlowSubsteps) {
  if (phi_duration == theta_duration) {
    return flow(field, state0, phi_duration, substeps);
  }
  const JointState a = flow(field, state0, phi_duration, substeps);
  const JointState b = flow(field, state0, theta_duration, substeps);
  return JointState(a.phi, b.theta);
}

}  // namespace driftlab

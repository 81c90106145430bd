#pragma once

// Foundational types for two-player differentiable games: player vectors,
// joint states, step sizes, the game contract and derivative oracles.
//
// Vector convention: column vectors and standard Jacobians (row = output,
// column = input). An expression written in row-vector form as v * grad_x(w)
// is computed here as (dw/dx) * v.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace driftlab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or dimension violation by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedGameClass : public Error {
 public:
  using Error::Error;
};

/// Analytic and finite-difference derivatives disagree.
class DerivativeMismatch : public Error {
 public:
  DerivativeMismatch(const std::string& block, Index row, Index col, double analytic,
                     double numeric, double rel_error)
      : Error(describe(block, row, col, analytic, numeric, rel_error)),
        block_(block),
        row_(row),
        col_(col),
        rel_error_(rel_error) {}

  const std::string& block() const { return block_; }
  Index row() const { return row_; }
  Index col() const { return col_; }
  double relative_error() const { return rel_error_; }

 private:
  static std::string describe(const std::string& block, Index row, Index col, double a,
                              double n, double rel) {
    std::ostringstream os;
    os.precision(17);
    os << "derivative mismatch in " << block << "(" << row << "," << col << "): analytic " << a
       << " vs finite-difference " << n << " (relative error " << rel << ")";
    return os.str();
  }

  std::string block_;
  Index row_;
  Index col_;
  double rel_error_;
};

/// A state or field value left the finite range during a computation.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, long last_finite_step)
      : Error(what), last_finite_step_(last_finite_step) {}
  /// Index of the last step whose state was finite (-1 when unknown).
  long last_finite_step() const { return last_finite_step_; }

 private:
  long last_finite_step_;
};

class NotAnEquilibrium : public Error {
 public:
  NotAnEquilibrium(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// ---------------------------------------------------------------------------
// Domain types

/// Parameters of one player. Entries are finite by construction.
class PlayerVector {
 public:
  PlayerVector() = default;

  explicit PlayerVector(Vector values) : values_(std::move(values)) {
    if (!values_.allFinite()) {
      throw ContractViolation("PlayerVector: non-finite entry");
    }
  }

  PlayerVector(std::initializer_list<double> values)
      : PlayerVector(Vector::Map(values.begin(), static_cast<Index>(values.size()))) {}

  const Vector& values() const { return values_; }
  Index dim() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

  friend bool operator==(const PlayerVector& a, const PlayerVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

/// The parameter pair (phi, theta).
struct JointState {
  PlayerVector phi;
  PlayerVector theta;

  JointState() = default;
  JointState(PlayerVector p, PlayerVector t) : phi(std::move(p)), theta(std::move(t)) {}
  JointState(const Vector& p, const Vector& t) : phi(p), theta(t) {}

  Index phi_dim() const { return phi.dim(); }
  Index theta_dim() const { return theta.dim(); }
  Index dim() const { return phi.dim() + theta.dim(); }

  /// [phi; theta]
  Vector stacked() const {
    Vector out(dim());
    out << phi.values(), theta.values();
    return out;
  }

  static JointState from_stacked(const Vector& x, Index phi_dim) {
    if (phi_dim < 0 || phi_dim > x.size()) {
      throw ContractViolation("JointState::from_stacked: bad split");
    }
    return JointState(Vector(x.head(phi_dim)), Vector(x.tail(x.size() - phi_dim)));
  }

  friend bool operator==(const JointState& a, const JointState& b) {
    return a.phi == b.phi && a.theta == b.theta;
  }
};

/// Base step h and per-player multipliers; effective rates are alpha*h and lambda*h.
struct StepSizes {
  double h = 0.1;
  double alpha = 1.0;
  double lambda = 1.0;

  StepSizes() = default;
  StepSizes(double h_, double alpha_ = 1.0, double lambda_ = 1.0)
      : h(h_), alpha(alpha_), lambda(lambda_) {
    if (!(h > 0.0) || !(alpha > 0.0) || !(lambda > 0.0) || !std::isfinite(h) ||
        !std::isfinite(alpha) || !std::isfinite(lambda)) {
      throw ContractViolation("StepSizes: h, alpha and lambda must be finite and > 0");
    }
  }

  double phi_rate() const { return alpha * h; }
  double theta_rate() const { return lambda * h; }
  StepSizes with_h(double new_h) const { return StepSizes(new_h, alpha, lambda); }
};

/// Inner update counts for alternating updates.
struct UpdateCounts {
  int m = 1;
  int k = 1;

  UpdateCounts() = default;
  UpdateCounts(int m_, int k_) : m(m_), k(k_) {
    if (m < 1 || k < 1) {
      throw ContractViolation("UpdateCounts: m and k must be >= 1");
    }
  }
};

enum class GameKind { General, ZeroSum, CommonPayoff };

inline const char* to_string(GameKind kind) {
  switch (kind) {
    case GameKind::General: return "general";
    case GameKind::ZeroSum: return "zero-sum";
    case GameKind::CommonPayoff: return "common-payoff";
  }
  return "?";
}

/// Standard Jacobian blocks of (f, g).
struct JacobianBlocks {
  Matrix d_phi_f;    ///< m x m, df/dphi
  Matrix d_theta_f;  ///< m x n, df/dtheta
  Matrix d_phi_g;    ///< n x m, dg/dphi
  Matrix d_theta_g;  ///< n x n, dg/dtheta

  Index phi_dim() const { return d_phi_f.rows(); }
  Index theta_dim() const { return d_theta_g.rows(); }

  /// [[d_phi_f, d_theta_f], [d_phi_g, d_theta_g]]
  Matrix assembled() const {
    const Index m = phi_dim();
    const Index n = theta_dim();
    Matrix j(m + n, m + n);
    j.topLeftCorner(m, m) = d_phi_f;
    j.topRightCorner(m, n) = d_theta_f;
    j.bottomLeftCorner(n, m) = d_phi_g;
    j.bottomRightCorner(n, n) = d_theta_g;
    return j;
  }

  static JacobianBlocks from_assembled(const Matrix& j, Index phi_dim) {
    const Index m = phi_dim;
    const Index n = j.rows() - m;
    return {j.topLeftCorner(m, m), j.topRightCorner(m, n), j.bottomLeftCorner(n, m),
            j.bottomRightCorner(n, n)};
  }

  static JacobianBlocks zero(Index m, Index n) {
    return {Matrix::Zero(m, m), Matrix::Zero(m, n), Matrix::Zero(n, m), Matrix::Zero(n, n)};
  }
};

using PlayerField = std::function<Vector(const Vector& phi, const Vector& theta)>;
using JacobianOracle = std::function<JacobianBlocks(const Vector& phi, const Vector& theta)>;
using PotentialFn = std::function<double(const Vector& phi, const Vector& theta)>;

/// Value of a joint vector field at one point.
struct FieldValue {
  Vector f;
  Vector g;
};

/// A continuous joint vector field (phi' = f, theta' = g).
struct JointField {
  Index phi_dim = 0;
  Index theta_dim = 0;
  std::function<FieldValue(const Vector& phi, const Vector& theta)> eval;
};

/// The game contract: paired update fields, optional analytic Jacobian and an
/// optional shared potential E for zero-sum / common-payoff games.
///
/// ZeroSum: f = +grad_phi E, g = -grad_theta E.
/// CommonPayoff: f = -grad_phi E, g = -grad_theta E.
struct GameDefinition {
  std::string name;
  Index phi_dim = 0;
  Index theta_dim = 0;
  PlayerField f;
  PlayerField g;
  std::optional<JacobianOracle> jacobian;
  GameKind kind = GameKind::General;
  std::optional<PotentialFn> potential;

  bool has_analytic_jacobian() const { return jacobian.has_value(); }
  bool has_potential() const { return potential.has_value() && kind != GameKind::General; }

  void check_state(const JointState& s) const {
    if (s.phi_dim() != phi_dim || s.theta_dim() != theta_dim) {
      std::ostringstream os;
      os << "game '" << name << "' expects dims (" << phi_dim << ", " << theta_dim
         << "), got (" << s.phi_dim() << ", " << s.theta_dim() << ")";
      throw ContractViolation(os.str());
    }
  }

  JointField field() const {
    return {phi_dim, theta_dim, [f = f, g = g](const Vector& p, const Vector& t) {
              return FieldValue{f(p, t), g(p, t)};
            }};
  }
};

// ---------------------------------------------------------------------------
// Operations

/// (f, g) at the state. Throws ContractViolation on dim mismatch or a non-finite field value.
inline std::pair<PlayerVector, PlayerVector> eval_fields(const GameDefinition& game,
                                                         const JointState& state) {
  game.check_state(state);
  Vector fv = game.f(state.phi.values(), state.theta.values());
  Vector gv = game.g(state.phi.values(), state.theta.values());
  if (fv.size() != game.phi_dim || gv.size() != game.theta_dim) {
    throw ContractViolation("game '" + game.name + "' returned fields of the wrong size");
  }
  return {PlayerVector(std::move(fv)), PlayerVector(std::move(gv))};
}

namespace detail {

inline double fd_step(double x) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(x));
}

/// Central-difference Jacobian of a map R^d -> R^r evaluated at x.
template <class Map>
Matrix central_difference_jacobian(const Map& fn, const Vector& x) {
  const Vector y0 = fn(x);
  Matrix jac(y0.size(), x.size());
  Vector xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const double step = fd_step(x[j]);
    xp[j] = x[j] + step;
    const Vector yp = fn(xp);
    xp[j] = x[j] - step;
    const Vector ym = fn(xp);
    xp[j] = x[j];
    // divide by the realized step to absorb representation error in x +/- step
    jac.col(j) = (yp - ym) / ((x[j] + step) - (x[j] - step));
  }
  return jac;
}

/// Central-difference gradient of a scalar function R^d -> R.
template <class Scalar>
Vector central_difference_gradient(const Scalar& fn, const Vector& x) {
  Vector grad(x.size());
  Vector xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const double step = fd_step(x[j]);
    xp[j] = x[j] + step;
    const double up = fn(xp);
    xp[j] = x[j] - step;
    const double dn = fn(xp);
    xp[j] = x[j];
    grad[j] = (up - dn) / ((x[j] + step) - (x[j] - step));
  }
  return grad;
}

}  // namespace detail

/// Central-difference Jacobian of an arbitrary joint field on the stacked state.
inline Matrix finite_difference_jacobian(const JointField& field, const JointState& state) {
  const Index m = field.phi_dim;
  auto stacked_eval = [&](const Vector& x) {
    FieldValue v = field.eval(x.head(m), x.tail(x.size() - m));
    Vector out(v.f.size() + v.g.size());
    out << v.f, v.g;
    return out;
  };
  return detail::central_difference_jacobian(stacked_eval, state.stacked());
}

enum class DerivativeMode { Analytic, FiniteDifference, Checked };

/// Relative agreement required by DerivativeMode::Checked, scaled by the matrix max-norm.
inline constexpr double kJacobianCheckTolerance = 1e-5;

/// Compare two block sets elementwise; throws DerivativeMismatch naming the worst entry.
inline void check_blocks_agree(const JacobianBlocks& analytic, const JacobianBlocks& numeric,
                               double tol = kJacobianCheckTolerance) {
  const Matrix a = analytic.assembled();
  const Matrix n = numeric.assembled();
  if (a.rows() != n.rows() || a.cols() != n.cols()) {
    throw ContractViolation("analytic Jacobian has the wrong shape");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  Index wr = 0, wc = 0;
  const double worst = (a - n).cwiseAbs().maxCoeff(&wr, &wc) / scale;
  if (!(worst <= tol)) {
    const Index m = analytic.phi_dim();
    const char* block = wr < m ? (wc < m ? "d_phi_f" : "d_theta_f")
                               : (wc < m ? "d_phi_g" : "d_theta_g");
    throw DerivativeMismatch(block, wr < m ? wr : wr - m, wc < m ? wc : wc - m, a(wr, wc),
                             n(wr, wc), worst);
  }
}

inline JacobianBlocks jacobian_blocks(const GameDefinition& game, const JointState& state,
                                      DerivativeMode mode = DerivativeMode::Analytic) {
  game.check_state(state);
  if (mode != DerivativeMode::FiniteDifference && !game.has_analytic_jacobian()) {
    throw ContractViolation("game '" + game.name + "' has no analytic Jacobian");
  }
  if (mode == DerivativeMode::Analytic) {
    return (*game.jacobian)(state.phi.values(), state.theta.values());
  }
  const JacobianBlocks numeric =
      JacobianBlocks::from_assembled(finite_difference_jacobian(game.field(), state), game.phi_dim);
  if (mode == DerivativeMode::FiniteDifference) {
    return numeric;
  }
  JacobianBlocks analytic = (*game.jacobian)(state.phi.values(), state.theta.values());
  check_blocks_agree(analytic, numeric);
  return analytic;
}

/// Analytic blocks when the game provides them, central differences otherwise.
inline JacobianBlocks best_jacobian_blocks(const GameDefinition& game, const JointState& state) {
  return jacobian_blocks(game, state,
                         game.has_analytic_jacobian() ? DerivativeMode::Analytic
                                                      : DerivativeMode::FiniteDifference);
}

enum class Player { Phi, Theta };

/// grad_{wrt} ||grad_{of} E||^2 for a game with a potential.
///
/// grad_of E equals +/- the matching update field, and its derivative the
/// matching Jacobian row block with the same sign, so the signs cancel:
/// grad_wrt ||grad_of E||^2 = 2 (d u / d wrt)^T u with u = f (of = Phi) or g.
inline PlayerVector grad_norm_gradient(const GameDefinition& game, const JointState& state,
                                       Player wrt, Player of) {
  if (!game.has_potential()) {
    throw UnsupportedGameClass("grad_norm_gradient requires a zero-sum or common-payoff game; '" +
                               game.name + "' is " + to_string(game.kind));
  }
  game.check_state(state);
  const JacobianBlocks b = best_jacobian_blocks(game, state);
  const Vector u = of == Player::Phi ? game.f(state.phi.values(), state.theta.values())
                                     : game.g(state.phi.values(), state.theta.values());
  const Matrix& du = of == Player::Phi ? (wrt == Player::Phi ? b.d_phi_f : b.d_theta_f)
                                       : (wrt == Player::Phi ? b.d_phi_g : b.d_theta_g);
  return PlayerVector(Vector(2.0 * du.transpose() * u));
}

/// grad of the shared potential from the update fields and the game class.
inline std::pair<Vector, Vector> potential_gradient(const GameDefinition& game,
                                                    const JointState& state) {
  if (!game.has_potential()) {
    throw UnsupportedGameClass("game '" + game.name + "' has no potential");
  }
  const Vector fv = game.f(state.phi.values(), state.theta.values());
  const Vector gv = game.g(state.phi.values(), state.theta.values());
  if (game.kind == GameKind::ZeroSum) {
    return {fv, -gv};
  }
  return {-fv, -gv};
}

/// Check the class relations between the fields and E by central differences of E.
/// Returns the worst relative deviation.
inline double class_invariant_deviation(const GameDefinition& game, const JointState& state) {
  if (!game.has_potential()) {
    throw UnsupportedGameClass("game '" + game.name + "' has no potential");
  }
  const Index m = game.phi_dim;
  auto energy = [&](const Vector& x) { return (*game.potential)(x.head(m), x.tail(x.size() - m)); };
  const Vector grad = detail::central_difference_gradient(energy, state.stacked());
  const auto [gp, gt] = potential_gradient(game, state);
  Vector expected(grad.size());
  expected << gp, gt;
  const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
  return (grad - expected).cwiseAbs().maxCoeff() / scale;
}

}  // namespace driftlab

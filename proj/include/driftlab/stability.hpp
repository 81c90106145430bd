#pragma once

// Linear stability of the modified flow at an equilibrium: the K matrices,
// the modified Jacobian J - (h/2) K, a dense eigensolver and classification.
//
// K is written with standard Jacobian blocks Fp = df/dphi, Ft = df/dtheta,
// Gp = dg/dphi, Gt = dg/dtheta. Differentiating the modified field at a point
// where f = g = 0 only the terms (dF) * (f, g) survive, which gives
//   simultaneous: K = [[a (Fp Fp + Ft Gp),  a (Fp Ft + Ft Gt)],
//                      [l (Gp Fp + Gt Gp),  l (Gp Ft + Gt Gt)]]
//   alternating:  K = [[a (Fp Fp / m + Ft Gp),    a (Fp Ft / m + Ft Gt)],
//                      [l (c Gp Fp + Gt Gp / k),  l (c Gp Ft + Gt Gt / k)]]
// with a = alpha, l = lambda and c = 1 - 2 alpha / lambda.

#include "driftlab/core.hpp"
#include "driftlab/drift.hpp"
#include "driftlab/games.hpp"
#include "driftlab/integrators.hpp"

#include <algorithm>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace driftlab {

using Complex = std::complex<double>;

class EigensolverFailure : public Error {
 public:
  EigensolverFailure(const std::string& what, int iterations, Index unconverged)
      : Error(what), iterations_(iterations), unconverged_(unconverged) {}
  int iterations() const { return iterations_; }
  /// Size of the active block that failed to deflate.
  Index unconverged() const { return unconverged_; }

 private:
  int iterations_;
  Index unconverged_;
};

inline constexpr double kEquilibriumTolerance = 1e-9;
inline constexpr double kDefaultClassifyScale = 1e-9;

// ---------------------------------------------------------------------------
// K matrices

namespace detail {

inline Matrix assemble_k(const Matrix& k11, const Matrix& k12, const Matrix& k21,
                         const Matrix& k22) {
  const Index m = k11.rows();
  const Index n = k22.rows();
  Matrix k(m + n, m + n);
  k.topLeftCorner(m, m) = k11;
  k.topRightCorner(m, n) = k12;
  k.bottomLeftCorner(n, m) = k21;
  k.bottomRightCorner(n, n) = k22;
  return k;
}

}  // namespace detail

inline Matrix k_matrix_sim(const JacobianBlocks& b, const StepSizes& rates) {
  const double a = rates.alpha;
  const double l = rates.lambda;
  return detail::assemble_k(a * (b.d_phi_f * b.d_phi_f + b.d_theta_f * b.d_phi_g),
                            a * (b.d_phi_f * b.d_theta_f + b.d_theta_f * b.d_theta_g),
                            l * (b.d_phi_g * b.d_phi_f + b.d_theta_g * b.d_phi_g),
                            l * (b.d_phi_g * b.d_theta_f + b.d_theta_g * b.d_theta_g));
}

inline Matrix k_matrix_alt(const JacobianBlocks& b, const StepSizes& rates,
                           const UpdateCounts& counts) {
  const double a = rates.alpha;
  const double l = rates.lambda;
  const double c = detail::alternating_interaction_weight(rates);
  const double inv_m = 1.0 / counts.m;
  const double inv_k = 1.0 / counts.k;
  return detail::assemble_k(
      a * (inv_m * (b.d_phi_f * b.d_phi_f) + b.d_theta_f * b.d_phi_g),
      a * (inv_m * (b.d_phi_f * b.d_theta_f) + b.d_theta_f * b.d_theta_g),
      l * (c * (b.d_phi_g * b.d_phi_f) + inv_k * (b.d_theta_g * b.d_phi_g)),
      l * (c * (b.d_phi_g * b.d_theta_f) + inv_k * (b.d_theta_g * b.d_theta_g)));
}

inline Matrix k_matrix(const JacobianBlocks& b, const StepSizes& rates, const Scheme& scheme) {
  if (scheme.is_simultaneous()) {
    return k_matrix_sim(b, rates);
  }
  if (scheme.is_alternating()) {
    return k_matrix_alt(b, rates, scheme.counts);
  }
  throw ContractViolation("K matrices are defined for the Euler schemes only");
}

// ---------------------------------------------------------------------------
// Modified Jacobian

struct ModifiedJacobian {
  Matrix matrix;  ///< J - (h/2) K
  Matrix j;
  Matrix k;
  Scheme scheme;
  StepSizes rates;
};

inline ModifiedJacobian modified_jacobian_from_blocks(const JacobianBlocks& blocks,
                                                      const Scheme& scheme,
                                                      const StepSizes& rates) {
  ModifiedJacobian out{Matrix(), blocks.assembled(), k_matrix(blocks, rates, scheme), scheme,
                       rates};
  out.matrix = out.j - (rates.h / 2.0) * out.k;
  return out;
}

/// Throws NotAnEquilibrium unless max(|f|, |g|) <= kEquilibriumTolerance.
inline void require_equilibrium(const GameDefinition& game, const JointState& state) {
  const auto [f, g] = eval_fields(game, state);
  double residual = 0.0;
  if (f.dim() > 0) residual = std::max(residual, f.values().cwiseAbs().maxCoeff());
  if (g.dim() > 0) residual = std::max(residual, g.values().cwiseAbs().maxCoeff());
  if (residual > kEquilibriumTolerance) {
    std::ostringstream os;
    os << "state is not an equilibrium of '" << game.name << "' (field residual " << residual
       << ")";
    throw NotAnEquilibrium(os.str(), residual);
  }
}

inline ModifiedJacobian modified_jacobian(const GameDefinition& game, const JointState& equilibrium,
                                          const Scheme& scheme, const StepSizes& rates) {
  game.check_state(equilibrium);
  require_equilibrium(game, equilibrium);
  return modified_jacobian_from_blocks(best_jacobian_blocks(game, equilibrium), scheme, rates);
}

// ---------------------------------------------------------------------------
// Eigenvalues

namespace detail {

/// Roots of x^2 - t x + d written around the midpoint to avoid cancellation.
inline std::vector<Complex> eigenvalues_2x2(double a, double b, double c, double d) {
  const double mid = 0.5 * (a + d);
  const double half_gap = 0.5 * (a - d);
  const double disc = half_gap * half_gap + b * c;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return {Complex(mid + r, 0.0), Complex(mid - r, 0.0)};
  }
  const double r = std::sqrt(-disc);
  return {Complex(mid, r), Complex(mid, -r)};
}

/// Householder reduction to upper Hessenberg form (in place).
inline void reduce_to_hessenberg(Matrix& a) {
  const Index n = a.rows();
  for (Index k = 0; k + 2 < n; ++k) {
    Vector v = a.col(k).tail(n - k - 1);
    const double norm = v.norm();
    if (norm == 0.0) {
      continue;
    }
    const double alpha = v[0] > 0.0 ? -norm : norm;
    v[0] -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) {
      continue;
    }
    v /= vnorm;
    auto rows = a.bottomRows(n - k - 1);
    rows -= 2.0 * v * (v.transpose() * rows);
    auto cols = a.rightCols(n - k - 1);
    cols -= 2.0 * (cols * v) * v.transpose();
    a.col(k).tail(n - k - 2).setZero();
    a(k + 1, k) = alpha;
  }
}

inline double sign_of(double magnitude, double sign) {
  return sign >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

/// Francis double-shift QR on an upper Hessenberg matrix. A subdiagonal entry
/// is treated as zero when it is below eps relative to its neighbours or below
/// `abs_tol`. Exceptional shifts are used after 10 and 20 stalled sweeps.
inline std::vector<Complex> hessenberg_qr(Matrix a, double abs_tol, int max_iterations) {
  const Index n = a.rows();
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j) {
      anorm += std::abs(a(i, j));
    }
  }
  std::vector<Complex> w(static_cast<std::size_t>(n));
  Index nn = n - 1;
  double t = 0.0;
  int total = 0;
  while (nn >= 0) {
    int its = 0;
    Index l = 0;
    do {
      for (l = nn; l > 0; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s || std::abs(a(l, l - 1)) <= abs_tol) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        w[static_cast<std::size_t>(nn)] = Complex(x + t, 0.0);
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double wv = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + wv;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            w[static_cast<std::size_t>(nn - 1)] = w[static_cast<std::size_t>(nn)] =
                Complex(x + z, 0.0);
            if (z != 0.0) w[static_cast<std::size_t>(nn)] = Complex(x - wv / z, 0.0);
          } else {
            w[static_cast<std::size_t>(nn)] = Complex(x + p, -z);
            w[static_cast<std::size_t>(nn - 1)] = Complex(x + p, z);
          }
          nn -= 2;
        } else {
          if (total >= max_iterations) {
            throw EigensolverFailure("eigenvalues: QR iteration did not converge after " +
                                         std::to_string(total) + " sweeps",
                                     total, nn - l + 1);
          }
          if (its == 10 || its == 20) {
            t += x;
            for (Index i = 0; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            wv = -0.4375 * s * s;
          }
          ++its;
          ++total;
          Index m = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - wv) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (Index i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (Index k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (Index j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k + 1 != nn) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const Index mmin = nn < k + 3 ? nn : k + 3;
              for (Index i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k + 1 != nn) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return w;
}

}  // namespace detail

/// All eigenvalues with multiplicity, complex pairs adjacent. Closed form up to
/// dimension 2; Householder Hessenberg reduction plus shifted QR above.
inline std::vector<Complex> eigenvalues(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw ContractViolation("eigenvalues: matrix must be square and non-empty");
  }
  if (!matrix.allFinite()) {
    throw ContractViolation("eigenvalues: matrix has non-finite entries");
  }
  const Index n = matrix.rows();
  if (n == 1) {
    return {Complex(matrix(0, 0), 0.0)};
  }
  if (n == 2) {
    return detail::eigenvalues_2x2(matrix(0, 0), matrix(0, 1), matrix(1, 0), matrix(1, 1));
  }
  Matrix h = matrix;
  detail::reduce_to_hessenberg(h);
  const double tol = 1e-12 * matrix.norm();
  return detail::hessenberg_qr(std::move(h), tol, static_cast<int>(100 * n));
}

// ---------------------------------------------------------------------------
// Classification

enum class Classification { AsymptoticallyStable, Unstable, Marginal };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::AsymptoticallyStable: return "asymptotically-stable";
    case Classification::Unstable: return "unstable";
    case Classification::Marginal: return "marginal";
  }
  return "?";
}

inline double classification_tolerance(const std::vector<Complex>& eigs, double tol_scale) {
  double largest = 0.0;
  for (const Complex& e : eigs) {
    largest = std::max(largest, std::abs(e));
  }
  return tol_scale * largest;
}

inline Classification classify(const std::vector<Complex>& eigs,
                               double tol_scale = kDefaultClassifyScale) {
  if (eigs.empty()) {
    throw ContractViolation("classify: no eigenvalues");
  }
  const double tol = classification_tolerance(eigs, tol_scale);
  bool all_negative = true;
  for (const Complex& e : eigs) {
    if (e.real() > tol) {
      return Classification::Unstable;
    }
    if (!(e.real() < -tol)) {
      all_negative = false;
    }
  }
  return all_negative ? Classification::AsymptoticallyStable : Classification::Marginal;
}

struct StabilityReport {
  Matrix matrix;
  std::vector<Complex> eigenvalues;
  double trace = 0.0;
  std::optional<double> determinant;  ///< only for dim <= 3
  Classification classification = Classification::Marginal;
  double tolerance = 0.0;
};

inline StabilityReport analyze(const Matrix& matrix, double tol_scale = kDefaultClassifyScale) {
  StabilityReport r;
  r.matrix = matrix;
  r.eigenvalues = eigenvalues(matrix);
  r.trace = matrix.trace();
  if (matrix.rows() <= 3) {
    r.determinant = matrix.determinant();
  }
  r.classification = classify(r.eigenvalues, tol_scale);
  r.tolerance = classification_tolerance(r.eigenvalues, tol_scale);
  return r;
}

inline StabilityReport stability_report(const GameDefinition& game, const JointState& equilibrium,
                                        const Scheme& scheme, const StepSizes& rates) {
  return analyze(modified_jacobian(game, equilibrium, scheme, rates).matrix);
}

// ---------------------------------------------------------------------------
// Trace diagnostics

struct TraceDiagnostics {
  double trace_modified = 0.0;
  /// Same trace written with Frobenius norms of the Hessian blocks of E (zero-sum only).
  std::optional<double> zero_sum_form;
};

inline TraceDiagnostics trace_diagnostics(const JacobianBlocks& b, const StepSizes& rates,
                                          const Scheme& scheme,
                                          GameKind kind = GameKind::General) {
  double self_phi = rates.alpha;
  double self_theta = rates.lambda;
  double cross = rates.alpha + rates.lambda;
  if (scheme.is_alternating()) {
    self_phi /= scheme.counts.m;
    self_theta /= scheme.counts.k;
    cross = rates.lambda - rates.alpha;
  } else if (!scheme.is_simultaneous()) {
    throw ContractViolation("trace diagnostics are defined for the Euler schemes only");
  }
  const double half_h = rates.h / 2.0;
  const double tr_j = b.d_phi_f.trace() + b.d_theta_g.trace();
  TraceDiagnostics out;
  out.trace_modified = tr_j -
                       half_h * (self_phi * (b.d_phi_f * b.d_phi_f).trace() +
                                 self_theta * (b.d_theta_g * b.d_theta_g).trace()) -
                       half_h * cross * (b.d_phi_g * b.d_theta_f).trace();
  if (kind == GameKind::ZeroSum) {
    // Hessian blocks of E: H_pp = Fp, H_pt = Ft, H_tt = -Gt.
    out.zero_sum_form = tr_j -
                        half_h * (self_phi * b.d_phi_f.squaredNorm() +
                                  self_theta * b.d_theta_g.squaredNorm()) +
                        half_h * cross * b.d_theta_f.squaredNorm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dirac-GAN with explicit gradient-norm penalties

struct DiracRegularizedResult {
  Matrix matrix;
  StabilityReport report;
  bool stable = false;
};

/// Modified Jacobian at the origin of the Dirac-GAN under simultaneous updates
/// with penalties u ||grad_theta E||^2 on the first player and
/// nu ||grad_phi E||^2 on the second.
inline DiracRegularizedResult dirac_regularized_jacobian(
    double u, double nu, const StepSizes& rates,
    const DiracLossProfile& profile = DiracLossProfile::saturating()) {
  if (!(u >= 0.0) || !(nu >= 0.0)) {
    throw ContractViolation("dirac_regularized_jacobian: u and nu must be >= 0");
  }
  const double d = profile.dl(0.0);
  const double d2 = d * d;
  Matrix m(2, 2);
  m << (rates.phi_rate() / 2.0 - 2.0 * u) * d2, d, -d, (rates.theta_rate() / 2.0 - 2.0 * nu) * d2;
  DiracRegularizedResult out{m, analyze(m), false};
  out.stable = out.report.classification == Classification::AsymptoticallyStable;
  return out;
}

}  // namespace driftlab

#pragma once

// Catalog of concrete games plus seeded random polynomial games.

#include "driftlab/core.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace driftlab {

// ---------------------------------------------------------------------------
// Deterministic random stream
//
// Counter-based SplitMix64: the i-th draw of stream `seed` is
//   mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)
// with the standard SplitMix64 finalizer. Draws are independent of call order,
// so any port that implements this formula regenerates identical games.

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix64(seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double unit(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  /// Uniform in [-1, 1).
  double symmetric(std::uint64_t counter) const { return 2.0 * unit(counter) - 1.0; }

  /// Child stream, for deriving independent sub-streams from one seed.
  CounterRng split(std::uint64_t tag) const { return CounterRng(bits(~tag)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Linear toy game: f = -eps1 phi + theta, g = eps2 theta - phi

struct LinearToyParams {
  double eps1 = 0.0;
  double eps2 = 0.0;
};

inline GameDefinition make_linear_toy(double eps1, double eps2) {
  GameDefinition game;
  std::ostringstream name;
  name << "linear-toy(" << eps1 << "," << eps2 << ")";
  game.name = name.str();
  game.phi_dim = 1;
  game.theta_dim = 1;
  game.f = [eps1](const Vector& p, const Vector& t) {
    return Vector::Constant(1, -eps1 * p[0] + t[0]);
  };
  game.g = [eps2](const Vector& p, const Vector& t) {
    return Vector::Constant(1, eps2 * t[0] - p[0]);
  };
  game.jacobian = [eps1, eps2](const Vector&, const Vector&) {
    return JacobianBlocks{Matrix::Constant(1, 1, -eps1), Matrix::Constant(1, 1, 1.0),
                          Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, eps2)};
  };
  game.kind = GameKind::General;
  return game;
}

inline GameDefinition make_linear_toy(const LinearToyParams& p) {
  return make_linear_toy(p.eps1, p.eps2);
}

// ---------------------------------------------------------------------------
// Dirac-GAN: E = l(theta*phi) + l(0), f = l'(theta phi) theta, g = -l'(theta phi) phi

struct DiracLossProfile {
  std::string name;
  std::function<double(double)> l;
  std::function<double(double)> dl;
  std::function<double(double)> d2l;

  /// l(z) = -log(1 + e^{-z}); l'(z) = 1/(1 + e^z); l''(z) = -l'(z)(1 - l'(z)).
  static DiracLossProfile saturating() {
    DiracLossProfile p;
    p.name = "saturating";
    p.l = [](double z) { return -(std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)))); };
    p.dl = [](double z) { return logistic(-z); };
    p.d2l = [](double z) { return -logistic(-z) * logistic(z); };
    return p;
  }

  static double logistic(double z) {
    if (z >= 0.0) {
      return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
  }
};

inline GameDefinition make_dirac_gan(const DiracLossProfile& profile = DiracLossProfile::saturating()) {
  if (!profile.l || !profile.dl || !profile.d2l) {
    throw ContractViolation("DiracLossProfile: l, l' and l'' are required");
  }
  if (profile.dl(0.0) == 0.0) {
    throw ContractViolation("DiracLossProfile: l'(0) must be nonzero");
  }
  GameDefinition game;
  game.name = "dirac-gan(" + profile.name + ")";
  game.phi_dim = 1;
  game.theta_dim = 1;
  const auto dl = profile.dl;
  const auto d2l = profile.d2l;
  const auto l = profile.l;
  game.f = [dl](const Vector& p, const Vector& t) {
    return Vector::Constant(1, dl(t[0] * p[0]) * t[0]);
  };
  game.g = [dl](const Vector& p, const Vector& t) {
    return Vector::Constant(1, -dl(t[0] * p[0]) * p[0]);
  };
  game.jacobian = [dl, d2l](const Vector& p, const Vector& t) {
    const double phi = p[0];
    const double theta = t[0];
    const double z = theta * phi;
    const double d1 = dl(z);
    const double d2 = d2l(z);
    const double mixed = d1 + d2 * z;
    return JacobianBlocks{Matrix::Constant(1, 1, d2 * theta * theta), Matrix::Constant(1, 1, mixed),
                          Matrix::Constant(1, 1, -mixed), Matrix::Constant(1, 1, -d2 * phi * phi)};
  };
  game.kind = GameKind::ZeroSum;
  game.potential = [l](const Vector& p, const Vector& t) { return l(t[0] * p[0]) + l(0.0); };
  return game;
}

// ---------------------------------------------------------------------------
// Quadratic games

struct QuadraticGameParams {
  Matrix A;  ///< symmetric, m x m
  Matrix B;  ///< m x n
  Matrix C;  ///< symmetric, n x n

  void validate() const {
    const Index m = A.rows();
    const Index n = C.rows();
    if (A.cols() != m || C.cols() != n || B.rows() != m || B.cols() != n || m < 1 || n < 1) {
      throw ContractViolation("QuadraticGameParams: inconsistent shapes");
    }
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
        (C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ContractViolation("QuadraticGameParams: A and C must be symmetric");
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite()) {
      throw ContractViolation("QuadraticGameParams: non-finite entry");
    }
  }

  /// Symmetric A, C and dense B with entries drawn in [-1, 1) from the counter stream.
  static QuadraticGameParams random(std::uint64_t seed, Index m, Index n) {
    const CounterRng rng(seed);
    std::uint64_t c = 0;
    QuadraticGameParams p{Matrix(m, m), Matrix(m, n), Matrix(n, n)};
    for (Index i = 0; i < m; ++i) {
      for (Index j = i; j < m; ++j) {
        p.A(i, j) = p.A(j, i) = rng.symmetric(c++);
      }
    }
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) {
        p.B(i, j) = rng.symmetric(c++);
      }
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) {
        p.C(i, j) = p.C(j, i) = rng.symmetric(c++);
      }
    }
    return p;
  }
};

/// E = 1/2 phi'A phi + phi'B theta - 1/2 theta'C theta; f = A phi + B theta, g = C theta - B' phi.
inline GameDefinition make_quadratic_zero_sum(const QuadraticGameParams& params) {
  params.validate();
  GameDefinition game;
  game.name = "quadratic-zero-sum";
  game.phi_dim = params.A.rows();
  game.theta_dim = params.C.rows();
  const auto q = std::make_shared<const QuadraticGameParams>(params);
  game.f = [q](const Vector& p, const Vector& t) -> Vector { return q->A * p + q->B * t; };
  game.g = [q](const Vector& p, const Vector& t) -> Vector {
    return q->C * t - q->B.transpose() * p;
  };
  game.jacobian = [q](const Vector&, const Vector&) {
    return JacobianBlocks{q->A, q->B, -q->B.transpose(), q->C};
  };
  game.kind = GameKind::ZeroSum;
  game.potential = [q](const Vector& p, const Vector& t) {
    return 0.5 * p.dot(q->A * p) + p.dot(q->B * t) - 0.5 * t.dot(q->C * t);
  };
  return game;
}

/// E = 1/2 phi'A phi + phi'B theta + 1/2 theta'C theta; f = -grad_phi E, g = -grad_theta E.
inline GameDefinition make_quadratic_common_payoff(const QuadraticGameParams& params) {
  params.validate();
  GameDefinition game;
  game.name = "quadratic-common-payoff";
  game.phi_dim = params.A.rows();
  game.theta_dim = params.C.rows();
  const auto q = std::make_shared<const QuadraticGameParams>(params);
  game.f = [q](const Vector& p, const Vector& t) -> Vector { return -(q->A * p + q->B * t); };
  game.g = [q](const Vector& p, const Vector& t) -> Vector {
    return -(q->B.transpose() * p + q->C * t);
  };
  game.jacobian = [q](const Vector&, const Vector&) {
    return JacobianBlocks{-q->A, -q->B, Matrix(-q->B.transpose()), -q->C};
  };
  game.kind = GameKind::CommonPayoff;
  game.potential = [q](const Vector& p, const Vector& t) {
    return 0.5 * p.dot(q->A * p) + p.dot(q->B * t) + 0.5 * t.dot(q->C * t);
  };
  return game;
}

// ---------------------------------------------------------------------------
// Random polynomial games
//
// Variables are the stacked state x = [phi; theta] of dimension d = m + n.
// Monomials of total degree 0..D are listed by degree, then as non-decreasing
// index tuples (i1 <= i2 <= ...) in lexicographic order, e.g. for d = 2, D = 2:
//   1, x0, x1, x0x0, x0x1, x1x1.
// Output component r (f components first, then g) takes the coefficient of
// monomial j from draw r * num_monomials + j of CounterRng(seed), mapped to
// [-1, 1). With equilibrium_at_origin the constant coefficients are zeroed
// (their draws are still consumed).

struct Monomial {
  std::vector<Index> vars;  ///< non-decreasing variable indices; empty = constant
};

inline std::vector<Monomial> enumerate_monomials(Index num_vars, int degree) {
  std::vector<Monomial> out;
  out.push_back({});
  std::vector<Monomial> prev{Monomial{}};
  for (int t = 1; t <= degree; ++t) {
    std::vector<Monomial> next;
    for (const auto& mono : prev) {
      const Index start = mono.vars.empty() ? 0 : mono.vars.back();
      for (Index v = start; v < num_vars; ++v) {
        Monomial grown = mono;
        grown.vars.push_back(v);
        next.push_back(std::move(grown));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    prev = std::move(next);
  }
  return out;
}

struct PolynomialTable {
  Index phi_dim = 0;
  Index theta_dim = 0;
  int degree = 1;
  std::vector<Monomial> monomials;
  Matrix coefficients;  ///< (m + n) x num_monomials

  static PolynomialTable generate(std::uint64_t seed, Index m, Index n, int degree,
                                  bool equilibrium_at_origin) {
    PolynomialTable table;
    table.phi_dim = m;
    table.theta_dim = n;
    table.degree = degree;
    table.monomials = enumerate_monomials(m + n, degree);
    const auto count = static_cast<Index>(table.monomials.size());
    table.coefficients.resize(m + n, count);
    const CounterRng rng(seed);
    for (Index r = 0; r < m + n; ++r) {
      for (Index j = 0; j < count; ++j) {
        table.coefficients(r, j) = rng.symmetric(static_cast<std::uint64_t>(r * count + j));
      }
      if (equilibrium_at_origin) {
        table.coefficients(r, 0) = 0.0;
      }
    }
    return table;
  }

  Vector eval(const Vector& x) const {
    Vector mono_values(static_cast<Index>(monomials.size()));
    for (std::size_t j = 0; j < monomials.size(); ++j) {
      double v = 1.0;
      for (Index var : monomials[j].vars) {
        v *= x[var];
      }
      mono_values[static_cast<Index>(j)] = v;
    }
    return coefficients * mono_values;
  }

  /// d(output)/dx, (m + n) x (m + n).
  Matrix jacobian(const Vector& x) const {
    const Index d = phi_dim + theta_dim;
    Matrix dmono = Matrix::Zero(static_cast<Index>(monomials.size()), d);
    for (std::size_t j = 0; j < monomials.size(); ++j) {
      const auto& vars = monomials[j].vars;
      for (std::size_t drop = 0; drop < vars.size(); ++drop) {
        double v = 1.0;
        for (std::size_t q = 0; q < vars.size(); ++q) {
          if (q != drop) {
            v *= x[vars[q]];
          }
        }
        dmono(static_cast<Index>(j), vars[drop]) += v;
      }
    }
    return coefficients * dmono;
  }
};

inline GameDefinition make_random_polynomial_game(std::uint64_t seed, Index phi_dim, Index theta_dim,
                                                  int degree, bool equilibrium_at_origin = false) {
  if (degree < 1 || degree > 3) {
    throw ContractViolation("random polynomial game: degree must be 1, 2 or 3");
  }
  if (phi_dim < 1 || theta_dim < 1) {
    throw ContractViolation("random polynomial game: dims must be positive");
  }
  const auto table = std::make_shared<const PolynomialTable>(
      PolynomialTable::generate(seed, phi_dim, theta_dim, degree, equilibrium_at_origin));
  auto stack = [](const Vector& p, const Vector& t) {
    Vector x(p.size() + t.size());
    x << p, t;
    return x;
  };
  GameDefinition game;
  std::ostringstream name;
  name << "random-polynomial(seed=" << seed << ",dims=" << phi_dim << "x" << theta_dim
       << ",degree=" << degree << ")";
  game.name = name.str();
  game.phi_dim = phi_dim;
  game.theta_dim = theta_dim;
  game.f = [table, stack](const Vector& p, const Vector& t) -> Vector {
    return table->eval(stack(p, t)).head(table->phi_dim);
  };
  game.g = [table, stack](const Vector& p, const Vector& t) -> Vector {
    return table->eval(stack(p, t)).tail(table->theta_dim);
  };
  game.jacobian = [table, stack](const Vector& p, const Vector& t) {
    return JacobianBlocks::from_assembled(table->jacobian(stack(p, t)), table->phi_dim);
  };
  game.kind = GameKind::General;
  return game;
}

}  // namespace driftlab

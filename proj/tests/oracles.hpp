#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numerical routines; it re-derives values from first principles.

#include "driftlab/driftlab.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using driftlab::Index;
using driftlab::Matrix;
using driftlab::Vector;

/// Plain SplitMix64 stream: state += golden; output = finalizer(state).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double symmetric() { return 2.0 * (static_cast<double>(next() >> 11) / 9007199254740992.0) - 1.0; }

 private:
  std::uint64_t state_;
};

/// Random states with coordinates uniform in [-r, r], from std::mt19937_64.
inline std::vector<driftlab::JointState> random_states(Index m, Index n, int count,
                                                       std::uint64_t seed, double r = 2.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<driftlab::JointState> out;
  for (int i = 0; i < count; ++i) {
    Vector p(m), t(n);
    for (Index j = 0; j < m; ++j) p[j] = u(gen);
    for (Index j = 0; j < n; ++j) t[j] = u(gen);
    out.emplace_back(p, t);
  }
  return out;
}

/// Stacked field value [f; g].
inline Vector stacked_value(const driftlab::JointField& field, const Vector& x) {
  const auto v = field.eval(x.head(field.phi_dim), x.tail(field.theta_dim));
  Vector out(x.size());
  out << v.f, v.g;
  return out;
}

/// Five-point central difference Jacobian with a fixed relative step.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                          double step = 1e-3) {
  const Vector f0 = fn(x);
  Matrix j(f0.size(), x.size());
  for (Index c = 0; c < x.size(); ++c) {
    const double h = step * std::max(1.0, std::abs(x[c]));
    auto at = [&](double k) {
      Vector y = x;
      y[c] += k * h;
      return fn(y);
    };
    j.col(c) = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
  }
  return j;
}

inline Matrix fd_field_jacobian(const driftlab::JointField& field, const Vector& x,
                                double step = 1e-3) {
  return fd_jacobian([&](const Vector& y) { return stacked_value(field, y); }, x, step);
}

/// Five-point central difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& fn, const Vector& x,
                          double step = 1e-3) {
  Vector g(x.size());
  for (Index c = 0; c < x.size(); ++c) {
    const double h = step * std::max(1.0, std::abs(x[c]));
    auto at = [&](double k) {
      Vector y = x;
      y[c] += k * h;
      return fn(y);
    };
    g[c] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
  }
  return g;
}

/// One classic RK4 step on a stacked autonomous system.
inline Vector rk4_step(const std::function<Vector(const Vector&)>& fn, const Vector& x, double h) {
  const Vector k1 = fn(x);
  const Vector k2 = fn(x + 0.5 * h * k1);
  const Vector k3 = fn(x + 0.5 * h * k2);
  const Vector k4 = fn(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Eigenvalues from Eigen's general solver, sorted for multiset comparison.
inline std::vector<std::complex<double>> eigen_eigenvalues(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  std::vector<std::complex<double>> out;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

/// Greedy multiset distance: max over a of min |a - b| with b removed once used.
inline double multiset_distance(std::vector<std::complex<double>> a,
                                std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const auto& x : a) {
    auto best = std::min_element(b.begin(), b.end(), [&](const auto& p, const auto& q) {
      return std::abs(p - x) < std::abs(q - x);
    });
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

inline double rel_diff(const Vector& a, const Vector& b) {
  const double scale = std::max({1e-300, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max({1e-300, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Scale-aware relative difference that treats tiny vectors against a unit floor.
inline double rel_diff_floor(const Vector& a, const Vector& b, double floor = 1.0) {
  const double scale = std::max({floor, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// l(z) = -log(1 + e^{-z}) and its derivatives written directly.
inline double dirac_l(double z) { return -std::log1p(std::exp(-z)); }
inline double dirac_dl(double z) { return 1.0 / (1.0 + std::exp(z)); }
inline double dirac_d2l(double z) {
  const double e = std::exp(z);
  return -e / ((1.0 + e) * (1.0 + e));
}

/// The catalog of built-in games used by property tests, each with a state
/// that is an equilibrium (the origin).
inline std::vector<driftlab::GameDefinition> catalog() {
  using namespace driftlab;
  std::vector<GameDefinition> out;
  out.push_back(make_linear_toy(0.09, 0.09));
  out.push_back(make_linear_toy(0.03, -0.05));
  out.push_back(make_dirac_gan());
  out.push_back(make_quadratic_zero_sum(QuadraticGameParams::random(11, 2, 3)));
  out.push_back(make_quadratic_common_payoff(QuadraticGameParams::random(12, 3, 2)));
  out.push_back(make_random_polynomial_game(13, 2, 2, 3, true));
  out.push_back(make_random_polynomial_game(14, 1, 3, 2, true));
  return out;
}

}  // namespace oracle

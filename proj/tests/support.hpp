#pragma once

// Shared helpers for the unit and acceptance tests: a tiny deterministic RNG
// and brute-force oracles that deliberately avoid the library's code paths.

#include "linbai/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <vector>

namespace testing_support {

using linbai::Matrix;
using linbai::Vector;

// splitmix64; independent of the simulator's noise stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  Vector normal_vector(std::size_t d) {
    Vector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal();
    return v;
  }
  Vector unit_vector(std::size_t d) {
    Vector v = normal_vector(d);
    return v / v.norm();
  }
  std::vector<double> simplex(std::size_t k) {
    std::vector<double> w(k);
    double s = 0.0;
    for (auto& x : w) {
      x = -std::log(std::max(uniform(), 1e-300));
      s += x;
    }
    for (auto& x : w) x /= s;
    return w;
  }

 private:
  std::uint64_t state_;
};

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline std::vector<Vector> basis_vectors(std::size_t d) {
  std::vector<Vector> arms;
  for (std::size_t i = 0; i < d; ++i) arms.push_back(Vector::Unit(static_cast<Eigen::Index>(d), i));
  return arms;
}

// The counter-example: e_1..e_d plus (cos a, sin a, 0, ...).
inline std::vector<Vector> counterexample_arms(std::size_t d, double alpha) {
  auto arms = basis_vectors(d);
  Vector extra = Vector::Zero(static_cast<Eigen::Index>(d));
  extra[0] = std::cos(alpha);
  extra[1] = std::sin(alpha);
  arms.push_back(extra);
  return arms;
}

inline Matrix naive_design(const std::vector<Vector>& arms, const std::vector<double>& w) {
  const auto d = arms.front().size();
  Matrix v = Matrix::Zero(d, d);
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) v(i, j) += w[a] * arms[a][i] * arms[a][j];
    }
  }
  return v;
}

// Minimizes a unimodal-ish function on [lo, hi] by repeated grid zooming.
inline double grid_minimize_1d(const std::function<double(double)>& f, double lo, double hi,
                               int points = 2001, int rounds = 6, double* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  double best_x = lo;
  for (int r = 0; r < rounds; ++r) {
    const double step = (hi - lo) / (points - 1);
    for (int k = 0; k < points; ++k) {
      const double x = lo + step * k;
      const double fx = f(x);
      if (fx < best) {
        best = fx;
        best_x = x;
      }
    }
    lo = best_x - 2 * step;
    hi = best_x + 2 * step;
  }
  if (argmin) *argmin = best_x;
  return best;
}

// inf over {<lambda, y> >= x} of 1/2 ||theta - lambda||_V^2 for d = 2, by a
// grid search along the boundary line (the interior only matters when theta
// itself is feasible).
inline double grid_halfspace_value_2d(const Vector& theta, const Vector& y, double x,
                                      const Matrix& v) {
  if (theta.dot(y) >= x) return 0.0;
  const Vector base = x * y / y.squaredNorm();
  Vector perp(2);
  perp << -y[1], y[0];
  perp /= perp.norm();
  auto f = [&](double s) {
    const Vector diff = theta - base - s * perp;
    return 0.5 * diff.dot(v * diff);
  };
  const double span = 10.0 * (1.0 + theta.norm() + base.norm());
  return grid_minimize_1d(f, -span, span);
}

// Projected gradient on {<lambda, y> <= 0, ||lambda|| <= M}. The halfspace is
// a cone through the origin, so projecting onto it and then onto the ball is
// the exact projection onto the intersection.
inline double projected_gradient_bounded(const Vector& theta, const Vector& y, const Matrix& v,
                                         double M, int iters = 200000) {
  auto project = [&](Vector z) {
    const double s = z.dot(y);
    if (s > 0.0) z -= s / y.squaredNorm() * y;
    const double n = z.norm();
    if (n > M) z *= M / n;
    return z;
  };
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(v).eigenvalues().maxCoeff();
  const double step = 1.0 / lmax;
  Vector lambda = project(theta);
  Vector prev = lambda;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= iters; ++k) {
    // FISTA momentum
    const Vector z = lambda + (k - 1.0) / (k + 2.0) * (lambda - prev);
    prev = lambda;
    lambda = project(z - step * (v * (z - theta)));
    const Vector diff = theta - lambda;
    best = std::min(best, 0.5 * diff.dot(v * diff));
  }
  return best;
}

// Visits every point of the simplex over k coordinates on a grid of the given step.
inline void for_each_simplex_point(std::size_t k, double step,
                                   const std::function<void(const std::vector<double>&)>& visit) {
  const auto n = static_cast<long>(std::llround(1.0 / step));
  std::vector<double> w(k, 0.0);
  std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
    if (i + 1 == k) {
      w[i] = static_cast<double>(left) / static_cast<double>(n);
      visit(w);
      return;
    }
    for (long c = 0; c <= left; ++c) {
      w[i] = static_cast<double>(c) / static_cast<double>(n);
      rec(i + 1, left - c);
    }
  };
  rec(0, n);
}

// max_b ||b||^2_{V_w^{-1}} with an explicit inverse; +inf when V_w is singular.
inline double explicit_design_value(const std::vector<Vector>& arms, const std::vector<double>& w,
                                    const std::vector<Vector>& targets) {
  if (arms.front().size() == 2) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t k = 0; k < arms.size(); ++k) {
      a += w[k] * arms[k][0] * arms[k][0];
      b += w[k] * arms[k][0] * arms[k][1];
      c += w[k] * arms[k][1] * arms[k][1];
    }
    const double det = a * c - b * b;
    if (!(det > 1e-14 * (a + c) * (a + c))) return std::numeric_limits<double>::infinity();
    double best = 0.0;
    for (const auto& t : targets) {
      best = std::max(best, (c * t[0] * t[0] - 2 * b * t[0] * t[1] + a * t[1] * t[1]) / det);
    }
    return best;
  }
  const Matrix v = naive_design(arms, w);
  Eigen::FullPivLU<Matrix> lu(v);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  const Matrix inv = lu.inverse();
  double best = 0.0;
  for (const auto& b : targets) best = std::max(best, b.dot(inv * b));
  return best;
}

// Grid minimum of max_b ||b||^2_{V_w^{-1}} over the simplex.
inline double grid_design_value(const std::vector<Vector>& arms, const std::vector<Vector>& targets,
                                double step) {
  double best = std::numeric_limits<double>::infinity();
  for_each_simplex_point(arms.size(), step, [&](const std::vector<double>& w) {
    best = std::min(best, explicit_design_value(arms, w, targets));
  });
  return best;
}

}  // namespace testing_support

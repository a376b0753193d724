#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace linbai {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Returned by inverse quadratic forms when the direction leaves range(V).
inline constexpr double kInfiniteNorm = std::numeric_limits<double>::infinity();

/// Finite set of arms in R^d. The arms must span R^d.
class ArmSet {
 public:
  explicit ArmSet(std::vector<Vector> arms);

  std::size_t size() const { return arms_.size(); }
  std::size_t dim() const { return dim_; }
  /// Largest Euclidean norm over the arms.
  double norm_bound() const { return norm_bound_; }

  const Vector& operator[](std::size_t i) const { return arms_[i]; }
  const std::vector<Vector>& arms() const { return arms_; }

 private:
  std::vector<Vector> arms_;
  std::size_t dim_ = 0;
  double norm_bound_ = 0.0;
};

/// Symmetric PSD matrix, optionally shifted by ridge * I when inverted.
struct DesignMatrix {
  Matrix matrix;
  double ridge = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
  Matrix regularized() const;
};

/// Nonnegative weights summing to one.
class SimplexWeights {
 public:
  SimplexWeights() = default;
  explicit SimplexWeights(std::vector<double> values);

  static SimplexWeights uniform(std::size_t n);
  static SimplexWeights point_mass(std::size_t n, std::size_t k);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

enum class NormMode { kDirect, kInverse };

/// Sum_a w^a a a^T. Weights need not be normalized (pull counts are fine).
DesignMatrix design_matrix(const ArmSet& arms, std::span<const double> weights);

/// Factorization of (V + ridge I) reused across many inverse solves.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(const DesignMatrix& v);

  /// z with (V + ridge I) z = x, or nullopt when x is outside the range
  /// (only possible for ridge = 0).
  std::optional<Vector> solve(const Vector& x) const;
  /// x^T (V + ridge I)^+ x, or kInfiniteNorm outside the range.
  double inverse_quad(const Vector& x) const;

  std::size_t dim() const { return static_cast<std::size_t>(regularized_.rows()); }

 private:
  Matrix regularized_;
  Eigen::LDLT<Matrix> ldlt_;
  double trace_ = 0.0;
  bool singular_possible_ = true;
};

/// x^T V x (direct) or x^T (V + ridge I)^+ x (inverse, kInfiniteNorm when
/// x has a component outside range(V)).
double quad_norm(const DesignMatrix& v, const Vector& x, NormMode mode);

/// (V_N + eta I)^{-1} sum_s Y_s a_s; zero vector for an empty history.
Vector regularized_lse(const ArmSet& arms, std::span<const std::size_t> pulls,
                       std::span<const double> rewards, double eta);

/// Sherman-Morrison: (V + a a^T)^{-1} from V^{-1}.
Matrix rank_one_inverse_update(const Matrix& v_inv, const Vector& a);

}  // namespace linbai

#include "linbai/linalg.hpp"

#include "linbai/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace linbai {

ArmSet::ArmSet(std::vector<Vector> arms) : arms_(std::move(arms)) {
  if (arms_.empty()) throw PreconditionError("ArmSet: at least one arm required");
  dim_ = static_cast<std::size_t>(arms_.front().size());
  if (dim_ == 0) throw PreconditionError("ArmSet: dimension must be >= 1");
  Matrix stacked(static_cast<Eigen::Index>(arms_.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (static_cast<std::size_t>(arms_[i].size()) != dim_) {
      throw DimensionError("ArmSet: arm " + std::to_string(i) + " has dimension " +
                           std::to_string(arms_[i].size()) + ", expected " + std::to_string(dim_));
    }
    if (!arms_[i].allFinite()) throw PreconditionError("ArmSet: non-finite arm coordinate");
    stacked.row(static_cast<Eigen::Index>(i)) = arms_[i].transpose();
    norm_bound_ = std::max(norm_bound_, arms_[i].norm());
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) != dim_) {
    throw PreconditionError("ArmSet: arms do not span R^" + std::to_string(dim_));
  }
}

Matrix DesignMatrix::regularized() const {
  Matrix out = matrix;
  if (ridge != 0.0) out.diagonal().array() += ridge;
  return out;
}

SimplexWeights::SimplexWeights(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw PreconditionError("SimplexWeights: empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0)) throw PreconditionError("SimplexWeights: negative or NaN entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw PreconditionError("SimplexWeights: entries sum to " + std::to_string(sum));
  }
  // absorb rounding so the sum is within 1e-12
  for (double& v : values_) v /= sum;
}

SimplexWeights SimplexWeights::uniform(std::size_t n) {
  return SimplexWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexWeights SimplexWeights::point_mass(std::size_t n, std::size_t k) {
  std::vector<double> v(n, 0.0);
  v.at(k) = 1.0;
  return SimplexWeights(std::move(v));
}

DesignMatrix design_matrix(const ArmSet& arms, std::span<const double> weights) {
  if (weights.size() != arms.size()) {
    throw DimensionError("design_matrix: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(arms.size()) + " arms");
  }
  const auto d = static_cast<Eigen::Index>(arms.dim());
  DesignMatrix out{Matrix::Zero(d, d), 0.0};
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (weights[a] < 0.0) throw PreconditionError("design_matrix: negative weight");
    if (weights[a] == 0.0) continue;
    out.matrix.selfadjointView<Eigen::Lower>().rankUpdate(arms[a], weights[a]);
  }
  out.matrix.triangularView<Eigen::StrictlyUpper>() = out.matrix.transpose();
  return out;
}

SymmetricSolver::SymmetricSolver(const DesignMatrix& v)
    : regularized_(v.regularized()),
      ldlt_(regularized_),
      trace_(v.matrix.trace()),
      singular_possible_(v.ridge <= 0.0) {}

std::optional<Vector> SymmetricSolver::solve(const Vector& x) const {
  if (x.size() != regularized_.rows()) throw DimensionError("SymmetricSolver: dimension mismatch");
  Vector z = ldlt_.solve(x);
  if (singular_possible_) {
    const double residual = (regularized_ * z - x).norm();
    const bool finite = z.allFinite();
    if (!finite || residual > 1e-10 * x.norm() * trace_ || (trace_ == 0.0 && x.norm() > 0.0)) {
      return std::nullopt;
    }
  }
  return z;
}

double SymmetricSolver::inverse_quad(const Vector& x) const {
  auto z = solve(x);
  if (!z) return kInfiniteNorm;
  return std::max(0.0, x.dot(*z));
}

double quad_norm(const DesignMatrix& v, const Vector& x, NormMode mode) {
  if (x.size() != v.matrix.rows()) throw DimensionError("quad_norm: dimension mismatch");
  if (mode == NormMode::kDirect) return std::max(0.0, x.dot(v.matrix * x));
  return SymmetricSolver(v).inverse_quad(x);
}

Vector regularized_lse(const ArmSet& arms, std::span<const std::size_t> pulls,
                       std::span<const double> rewards, double eta) {
  if (pulls.size() != rewards.size()) throw DimensionError("regularized_lse: history length mismatch");
  if (!(eta > 0.0)) throw PreconditionError("regularized_lse: eta must be positive");
  const auto d = static_cast<Eigen::Index>(arms.dim());
  if (pulls.empty()) return Vector::Zero(d);
  Matrix v = eta * Matrix::Identity(d, d);
  Vector b = Vector::Zero(d);
  for (std::size_t s = 0; s < pulls.size(); ++s) {
    if (pulls[s] >= arms.size()) throw DimensionError("regularized_lse: arm index out of range");
    const Vector& a = arms[pulls[s]];
    v.noalias() += a * a.transpose();
    b += rewards[s] * a;
  }
  return v.ldlt().solve(b);
}

Matrix rank_one_inverse_update(const Matrix& v_inv, const Vector& a) {
  if (a.size() != v_inv.rows()) throw DimensionError("rank_one_inverse_update: dimension mismatch");
  const Vector u = v_inv * a;
  const double denom = 1.0 + a.dot(u);
  Matrix out = v_inv - (u * u.transpose()) / denom;
  return 0.5 * (out + out.transpose());
}

}  // namespace linbai

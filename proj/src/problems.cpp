#include "linbai/problems.hpp"

#include "linbai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace linbai {

namespace {

constexpr double kDegeneracyTol = 1e-12;
constexpr std::size_t kMaxThresholdCandidates = 64;

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kBAI: return "bai";
    case ProblemKind::kBoundedBAI: return "bounded_bai";
    case ProblemKind::kTransductiveBAI: return "transductive_bai";
    case ProblemKind::kThreshold: return "threshold";
    case ProblemKind::kTransductiveThreshold: return "transductive_threshold";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(std::string_view name) {
  for (auto k : {ProblemKind::kBAI, ProblemKind::kBoundedBAI, ProblemKind::kTransductiveBAI,
                 ProblemKind::kThreshold, ProblemKind::kTransductiveThreshold}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown problem kind '" + std::string(name) + "'");
}

bool is_bai_kind(ProblemKind kind) {
  return kind == ProblemKind::kBAI || kind == ProblemKind::kBoundedBAI ||
         kind == ProblemKind::kTransductiveBAI;
}

bool is_threshold_kind(ProblemKind kind) {
  return kind == ProblemKind::kThreshold || kind == ProblemKind::kTransductiveThreshold;
}

bool is_transductive(ProblemKind kind) {
  return kind == ProblemKind::kTransductiveBAI || kind == ProblemKind::kTransductiveThreshold;
}

ProblemSpec ProblemSpec::bai(ArmSet arms, std::optional<double> M) {
  ProblemSpec s{ProblemKind::kBAI, std::move(arms), M, 0.0, {}};
  s.validate();
  return s;
}

ProblemSpec ProblemSpec::bounded_bai(ArmSet arms, double M) {
  ProblemSpec s{ProblemKind::kBoundedBAI, std::move(arms), M, 0.0, {}};
  s.validate();
  return s;
}

ProblemSpec ProblemSpec::transductive_bai(ArmSet arms, std::vector<Vector> targets,
                                          std::optional<double> M) {
  ProblemSpec s{ProblemKind::kTransductiveBAI, std::move(arms), M, 0.0, std::move(targets)};
  s.validate();
  return s;
}

ProblemSpec ProblemSpec::threshold(ArmSet arms, double iota, std::optional<double> M) {
  ProblemSpec s{ProblemKind::kThreshold, std::move(arms), M, iota, {}};
  s.validate();
  return s;
}

ProblemSpec ProblemSpec::transductive_threshold(ArmSet arms, std::vector<Vector> targets,
                                                double iota, std::optional<double> M) {
  ProblemSpec s{ProblemKind::kTransductiveThreshold, std::move(arms), M, iota, std::move(targets)};
  s.validate();
  return s;
}

void ProblemSpec::validate() const {
  if (arms.size() < 2) throw PreconditionError("problem needs at least two arms");
  if (M && !(*M > 0.0)) throw PreconditionError("M must be positive");
  if (kind == ProblemKind::kBoundedBAI && !M) throw PreconditionError("bounded BAI requires M");
  if (is_threshold_kind(kind) && !std::isfinite(iota)) {
    throw PreconditionError("threshold kinds require a finite iota");
  }
  if (is_transductive(kind)) {
    if (targets.empty()) throw PreconditionError("transductive kinds require a nonempty target set");
    for (const auto& b : targets) {
      if (static_cast<std::size_t>(b.size()) != arms.dim()) {
        throw DimensionError("target dimension differs from arm dimension");
      }
    }
  } else if (!targets.empty()) {
    throw PreconditionError("targets given for a non-transductive kind");
  }
  if (is_threshold_kind(kind) && candidates().size() > kMaxThresholdCandidates) {
    throw PreconditionError("threshold kinds support at most 64 candidates");
  }
  if (kind == ProblemKind::kTransductiveBAI && targets.size() < 2) {
    throw PreconditionError("transductive BAI needs at least two targets");
  }
}

const std::vector<Vector>& ProblemSpec::candidates() const {
  return is_transductive(kind) ? targets : arms.arms();
}

namespace {

std::vector<double> candidate_means(const ProblemSpec& spec, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.dim()) {
    throw DimensionError("theta dimension differs from arm dimension");
  }
  const auto& cands = spec.candidates();
  std::vector<double> means(cands.size());
  for (std::size_t k = 0; k < cands.size(); ++k) means[k] = theta.dot(cands[k]);
  return means;
}

}  // namespace

CandidateAnswer candidate_answer(const ProblemSpec& spec, const Vector& theta) {
  const auto means = candidate_means(spec, theta);
  CandidateAnswer out;
  if (is_bai_kind(spec.kind)) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < means.size(); ++k) {
      if (means[k] > means[best]) best = k;
    }
    for (std::size_t k = 0; k < means.size(); ++k) {
      if (k != best && means[best] - means[k] <= kDegeneracyTol) out.degenerate = true;
    }
    out.answer.code = best;
  } else {
    for (std::size_t k = 0; k < means.size(); ++k) {
      if (means[k] >= spec.iota) out.answer.code |= (std::uint64_t{1} << k);
      if (std::abs(means[k] - spec.iota) <= kDegeneracyTol) out.degenerate = true;
    }
  }
  return out;
}

Answer correct_answer(const ProblemSpec& spec, const Vector& theta) {
  const auto c = candidate_answer(spec, theta);
  if (c.degenerate) throw DegenerateParameterError("parameter has no unique correct answer");
  return c.answer;
}

std::vector<Halfspace> alternative_halfspaces(const ProblemSpec& spec, Answer answer) {
  const auto& cands = spec.candidates();
  std::vector<Halfspace> out;
  if (is_bai_kind(spec.kind)) {
    if (answer.code >= cands.size()) throw PreconditionError("answer index out of range");
    const Vector& best = cands[answer.code];
    out.reserve(cands.size() - 1);
    for (std::size_t k = 0; k < cands.size(); ++k) {
      if (k == answer.code) continue;
      out.push_back({cands[k] - best, 0.0});
    }
  } else {
    if (cands.size() < 64 && (answer.code >> cands.size()) != 0) {
      throw PreconditionError("answer bitset has bits beyond the candidate set");
    }
    out.reserve(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const bool above = (answer.code >> k) & 1U;
      if (above) {
        out.push_back({-cands[k], -spec.iota});
      } else {
        out.push_back({cands[k], spec.iota});
      }
    }
  }
  return out;
}

namespace {

BestResponse project(const SymmetricSolver& solver, const Vector& theta, const Vector& y, double x) {
  BestResponse r;
  r.lambda = theta;
  const double gap = x - theta.dot(y);
  if (y.norm() == 0.0) {
    if (x > 0.0) throw InfeasibleHalfspaceError("halfspace with y = 0 and x > 0 is empty");
    return r;
  }
  if (gap <= 0.0) return r;
  auto z = solver.solve(y);
  if (!z) {
    r.attained = false;
    return r;
  }
  const double q = y.dot(*z);
  if (!(q > 0.0)) {
    r.attained = false;
    return r;
  }
  const double alpha = gap / q;
  r.value = gap * gap / (2.0 * q);
  r.lambda = theta + alpha * (*z);
  return r;
}

}  // namespace

BestResponse halfspace_projection(const Vector& theta, const Vector& y, double x,
                                  const DesignMatrix& v) {
  if (theta.size() != y.size() || static_cast<std::size_t>(y.size()) != v.dim()) {
    throw DimensionError("halfspace_projection: dimension mismatch");
  }
  return project(SymmetricSolver(v), theta, y, x);
}

namespace detail {

BoundedDual::BoundedDual(const DesignMatrix& v, const Vector& theta, double M)
    : theta_(theta), M_(M) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v.regularized());
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  const double scale = std::max(eigenvalues_.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    if (eigenvalues_[k] < 1e-12 * scale) eigenvalues_[k] = 0.0;
  }
  theta_eig_ = eigenvectors_.transpose() * theta;
}

double BoundedDual::objective(const Vector& y_eig, double gamma) const {
  double p = 0.0;
  double q = 0.0;
  double s = 0.0;
  bool q_infinite = false;
  const double y_scale = y_eig.norm();
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    const double mu = eigenvalues_[k];
    const double denom = mu + gamma;
    if (denom > 0.0) {
      const double shrink = mu / denom;
      p += theta_eig_[k] * shrink * y_eig[k];
      s += theta_eig_[k] * theta_eig_[k] * shrink;
      q += y_eig[k] * y_eig[k] / denom;
    } else if (std::abs(y_eig[k]) > 1e-12 * y_scale) {
      q_infinite = true;
    }
  }
  double first = 0.0;
  if (!q_infinite && q > 0.0 && p > 0.0) first = p * p / (2.0 * q);
  return first + 0.5 * gamma * s - 0.5 * gamma * M_ * M_;
}

BestResponse BoundedDual::solve(const Vector& y) const {
  const Vector y_eig = eigenvectors_.transpose() * y;
  auto f = [&](double g) { return objective(y_eig, g); };

  // Bracket the maximizer of the concave dual by doubling.
  std::vector<std::pair<double, double>> pts{{0.0, f(0.0)}, {1.0, f(1.0)}};
  auto decreasing_run = [&] {
    const std::size_t n = pts.size();
    return n >= 3 && pts[n - 3].second >= pts[n - 2].second && pts[n - 2].second >= pts[n - 1].second;
  };
  for (int i = 0; i < 200 && !decreasing_run(); ++i) {
    const double g = 2.0 * pts.back().first;
    pts.emplace_back(g, f(g));
  }
  const std::size_t n = pts.size();
  double lo = n >= 4 ? pts[n - 4].first : 0.0;
  double hi = n >= 2 ? pts[n - 2].first : pts.back().first;

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  double gamma = 0.5 * (lo + hi);
  double best = f(gamma);
  for (const auto& [g, val] : pts) {
    if (val > best) {
      best = val;
      gamma = g;
    }
  }

  // Primal recovery: lambda = (V + gamma I)^{-1} (V theta - alpha y).
  double p = 0.0;
  double q = 0.0;
  bool q_infinite = false;
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    const double denom = eigenvalues_[k] + gamma;
    if (denom > 0.0) {
      p += theta_eig_[k] * eigenvalues_[k] / denom * y_eig[k];
      q += y_eig[k] * y_eig[k] / denom;
    } else if (std::abs(y_eig[k]) > 1e-12 * y_eig.norm()) {
      q_infinite = true;
    }
  }
  const double alpha = (!q_infinite && q > 0.0 && p > 0.0) ? p / q : 0.0;
  Vector lambda_eig(theta_eig_.size());
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    const double denom = eigenvalues_[k] + gamma;
    lambda_eig[k] = denom > 0.0 ? (eigenvalues_[k] * theta_eig_[k] - alpha * y_eig[k]) / denom
                                : theta_eig_[k];
  }
  BestResponse r;
  r.value = std::max(0.0, best);
  r.lambda = eigenvectors_ * lambda_eig;
  r.gamma = gamma;
  r.attained = !q_infinite || alpha == 0.0;
  const double norm = r.lambda.norm();
  if (norm > M_) {
    if (norm > M_ * (1.0 + 1e-6)) r.attained = false;
    r.lambda *= M_ / norm;
  }
  return r;
}

}  // namespace detail

BestResponse best_response(const ProblemSpec& spec, const Vector& theta, Answer answer,
                           std::span<const double> w) {
  if (static_cast<std::size_t>(theta.size()) != spec.dim()) {
    throw DimensionError("best_response: theta dimension mismatch");
  }
  const DesignMatrix v = design_matrix(spec.arms, w);
  const auto halfspaces = alternative_halfspaces(spec, answer);
  BestResponse best;
  bool have = false;
  if (spec.kind == ProblemKind::kBoundedBAI) {
    const detail::BoundedDual dual(v, theta, *spec.M);
    for (std::size_t h = 0; h < halfspaces.size(); ++h) {
      auto r = dual.solve(-halfspaces[h].y);
      if (!have || r.value < best.value) {
        best = std::move(r);
        best.active_constraint = h;
        have = true;
      }
    }
    return best;
  }
  const SymmetricSolver solver(v);
  for (std::size_t h = 0; h < halfspaces.size(); ++h) {
    auto r = project(solver, theta, halfspaces[h].y, halfspaces[h].x);
    if (!have || r.value < best.value) {
      best = std::move(r);
      best.active_constraint = h;
      have = true;
    }
  }
  return best;
}

BestResponse bounded_best_response(const Vector& theta, const Vector& y, std::span<const double> w,
                                   double M, const ArmSet& arms) {
  if (!(M > 0.0)) throw PreconditionError("bounded_best_response: M must be positive");
  if (theta.norm() > M * (1.0 + 1e-12)) {
    throw PreconditionError("bounded_best_response: ||theta|| exceeds M");
  }
  if (theta.size() != y.size() || static_cast<std::size_t>(y.size()) != arms.dim()) {
    throw DimensionError("bounded_best_response: dimension mismatch");
  }
  const detail::BoundedDual dual(design_matrix(arms, w), theta, M);
  return dual.solve(y);
}

double min_gap(const ProblemSpec& spec, const Vector& theta) {
  if (!is_bai_kind(spec.kind)) throw PreconditionError("min_gap: BAI kinds only");
  const Answer best = correct_answer(spec, theta);
  const auto& cands = spec.candidates();
  const double top = theta.dot(cands[best.code]);
  double gap = kInfiniteNorm;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (k == best.code) continue;
    gap = std::min(gap, top - theta.dot(cands[k]));
  }
  return gap;
}

}  // namespace linbai

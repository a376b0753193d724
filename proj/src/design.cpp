#include "linbai/design.hpp"

#include "linbai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace linbai {

namespace {

// Explicit inverses drift under long runs of rank-one updates.
constexpr std::size_t kRefreshEvery = 1000;

Matrix stack_columns(const std::vector<Vector>& vs) {
  Matrix m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vs[j];
  return m;
}

SimplexWeights weights_from_counts(const std::vector<double>& counts, std::size_t total) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = counts[i] / static_cast<double>(total);
  return SimplexWeights(std::move(w));
}

}  // namespace

std::string_view to_string(TransductiveKind kind) {
  switch (kind) {
    case TransductiveKind::kG: return "G";
    case TransductiveKind::kXY: return "XY";
    case TransductiveKind::kABStar: return "ABstar";
    case TransductiveKind::kThresholdIota: return "threshold-iota";
  }
  return "unknown";
}

DesignProblem::DesignProblem(ArmSet arms_in, std::vector<Vector> targets_in)
    : arms(std::move(arms_in)), targets(std::move(targets_in)) {
  if (targets.empty()) throw PreconditionError("DesignProblem: empty target set");
  for (const auto& b : targets) {
    if (static_cast<std::size_t>(b.size()) != arms.dim()) {
      throw DimensionError("DesignProblem: target dimension differs from arm dimension");
    }
  }
}

std::vector<Vector> build_transductive_set(const ProblemSpec& spec, const Vector& theta,
                                           TransductiveKind kind) {
  const auto& arms = spec.arms.arms();
  std::vector<Vector> out;
  switch (kind) {
    case TransductiveKind::kG:
      out = arms;
      break;
    case TransductiveKind::kXY:
      for (std::size_t i = 0; i < arms.size(); ++i) {
        for (std::size_t j = 0; j < arms.size(); ++j) {
          if (i != j) out.push_back(arms[i] - arms[j]);
        }
      }
      break;
    case TransductiveKind::kABStar: {
      if (!is_bai_kind(spec.kind)) throw PreconditionError("ABstar set needs a BAI kind");
      const Answer best = correct_answer(spec, theta);
      const auto& cands = spec.candidates();
      const Vector& top = cands[best.code];
      for (std::size_t k = 0; k < cands.size(); ++k) {
        if (k == best.code) continue;
        const Vector dir = top - cands[k];
        const double gap = std::abs(theta.dot(dir));
        if (gap <= 1e-12) throw DegenerateParameterError("ABstar set: zero gap");
        out.push_back(dir / gap);
      }
      break;
    }
    case TransductiveKind::kThresholdIota: {
      if (!is_threshold_kind(spec.kind)) throw PreconditionError("threshold set needs a threshold kind");
      for (const auto& c : spec.candidates()) {
        const double gap = std::abs(spec.iota - theta.dot(c));
        if (gap <= 1e-12) throw DegenerateParameterError("threshold set: arm mean equals iota");
        out.push_back(c / gap);
      }
      break;
    }
  }
  return out;
}

double design_value(const DesignProblem& problem, const SimplexWeights& w) {
  const SymmetricSolver solver(design_matrix(problem.arms, w.values()));
  double value = 0.0;
  for (const auto& b : problem.targets) value = std::max(value, solver.inverse_quad(b));
  return value;
}

DesignSolution fw_design(const DesignProblem& problem, std::size_t max_iter, bool record_history) {
  if (max_iter < 1) throw PreconditionError("fw_design: max_iter must be >= 1");
  const auto d = static_cast<Eigen::Index>(problem.arms.dim());
  const Matrix targets = stack_columns(problem.targets);
  Matrix v = Matrix::Identity(d, d);
  Matrix v_inv = Matrix::Identity(d, d);
  std::vector<double> counts(problem.arms.size(), 0.0);
  DesignSolution sol;

  for (std::size_t t = 0; t < max_iter; ++t) {
    const Matrix vb = v_inv * targets;
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t a = 0; a < problem.arms.size(); ++a) {
      const double score = (problem.arms[a].transpose() * vb).cwiseAbs2().maxCoeff();
      if (score > best) {
        best = score;
        pick = a;
      }
    }
    const Vector& arm = problem.arms[pick];
    v.noalias() += arm * arm.transpose();
    v_inv = ((t + 1) % kRefreshEvery == 0) ? Matrix(v.ldlt().solve(Matrix::Identity(d, d)))
                                           : rank_one_inverse_update(v_inv, arm);
    counts[pick] += 1.0;
    if (record_history) {
      const double surrogate = (targets.transpose() * v_inv * targets).diagonal().maxCoeff();
      sol.history.push_back(static_cast<double>(t + 1) * surrogate);
    }
  }
  sol.weights = weights_from_counts(counts, max_iter);
  sol.value = design_value(problem, sol.weights);
  sol.iterations = max_iter;
  return sol;
}

DesignSolution saddle_fw_design(const DesignProblem& problem, std::size_t max_iter,
                                bool record_history) {
  if (max_iter < 1) throw PreconditionError("saddle_fw_design: max_iter must be >= 1");
  const auto d = static_cast<Eigen::Index>(problem.arms.dim());
  const Matrix arms = stack_columns(problem.arms.arms());
  const Matrix targets = stack_columns(problem.targets);
  Matrix v = Matrix::Identity(d, d);
  Matrix v_inv = Matrix::Identity(d, d);
  Matrix v_target = Matrix::Identity(d, d);
  std::vector<double> counts(problem.arms.size(), 0.0);
  DesignSolution sol;

  for (std::size_t t = 0; t < max_iter; ++t) {
    const Matrix sandwich = v_inv * v_target * v_inv;
    const Vector arm_scores = (arms.transpose() * sandwich * arms).diagonal();
    const Vector target_scores = (targets.transpose() * v_inv * targets).diagonal();
    Eigen::Index pick_arm = 0;
    Eigen::Index pick_target = 0;
    // maxCoeff returns the first maximizer, i.e. the lowest index on ties
    arm_scores.maxCoeff(&pick_arm);
    const double worst = target_scores.maxCoeff(&pick_target);
    if (record_history) sol.history.push_back(static_cast<double>(t) * worst);

    const Vector arm = arms.col(pick_arm);
    const Vector target = targets.col(pick_target);
    v.noalias() += arm * arm.transpose();
    v_target.noalias() += target * target.transpose();
    v_inv = ((t + 1) % kRefreshEvery == 0) ? Matrix(v.ldlt().solve(Matrix::Identity(d, d)))
                                           : rank_one_inverse_update(v_inv, arm);
    counts[static_cast<std::size_t>(pick_arm)] += 1.0;
  }
  sol.weights = weights_from_counts(counts, max_iter);
  sol.value = design_value(problem, sol.weights);
  sol.iterations = max_iter;
  return sol;
}

CharacteristicTime characteristic_time(const ProblemSpec& spec, const Vector& theta,
                                       std::size_t solver_iters) {
  const TransductiveKind kind =
      is_bai_kind(spec.kind) ? TransductiveKind::kABStar : TransductiveKind::kThresholdIota;
  const DesignProblem problem(spec.arms, build_transductive_set(spec, theta, kind));
  auto sol = saddle_fw_design(problem, solver_iters);
  return {2.0 * sol.value, std::move(sol.weights)};
}

double lower_bound_time(const ProblemSpec& spec, const Vector& theta, const SimplexWeights& w,
                        double delta) {
  if (!is_bai_kind(spec.kind)) throw PreconditionError("lower_bound_time: BAI kinds only");
  if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("lower_bound_time: delta not in (0,1]");
  const Answer best = correct_answer(spec, theta);
  const double log_term = std::log(1.0 / delta);
  if (log_term == 0.0) return 0.0;
  const auto& cands = spec.candidates();
  const SymmetricSolver solver(design_matrix(spec.arms, w.values()));
  double worst = 0.0;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (k == best.code) continue;
    const Vector dir = cands[best.code] - cands[k];
    const double gap = theta.dot(dir);
    worst = std::max(worst, 2.0 * solver.inverse_quad(dir) / (gap * gap));
  }
  return log_term * worst;
}

ComplexityReport complexity_report(const ProblemSpec& spec, const Vector& theta, double delta,
                                   std::size_t solver_iters) {
  if (spec.kind != ProblemKind::kBAI && spec.kind != ProblemKind::kBoundedBAI) {
    throw PreconditionError("complexity_report: BAI or bounded BAI only");
  }
  ComplexityReport r;
  r.dim = spec.dim();
  r.delta = delta;
  r.solver_iters = solver_iters;
  r.delta_min = min_gap(spec, theta);

  auto ct = characteristic_time(spec, theta, solver_iters);
  r.tstar = ct.tstar;
  r.w_abstar = std::move(ct.wstar);

  const DesignProblem g_problem(spec.arms, build_transductive_set(spec, theta, TransductiveKind::kG));
  auto g = saddle_fw_design(g_problem, solver_iters);
  r.g_value = g.value;
  r.w_g = std::move(g.weights);

  const DesignProblem xy_problem(spec.arms, build_transductive_set(spec, theta, TransductiveKind::kXY));
  auto xy = saddle_fw_design(xy_problem, solver_iters);
  r.xy_value = xy.value;
  r.w_xy = std::move(xy.weights);

  const double d2 = r.delta_min * r.delta_min;
  r.xy_chain = 2.0 * r.xy_value / d2;
  r.g_chain = 8.0 * r.g_value / d2;
  r.kw_chain = 8.0 * static_cast<double>(r.dim) / d2;

  r.tw_abstar = lower_bound_time(spec, theta, r.w_abstar, delta);
  r.tw_xy = lower_bound_time(spec, theta, r.w_xy, delta);
  r.tw_g = lower_bound_time(spec, theta, r.w_g, delta);

  constexpr double kSlack = 1.02;
  if (!(r.tstar <= kSlack * r.xy_chain) || !(r.xy_chain <= kSlack * r.g_chain) ||
      !(std::abs(r.g_chain - r.kw_chain) <= (kSlack - 1.0) * r.kw_chain)) {
    throw ConsistencyError("complexity chain violated: T*=" + std::to_string(r.tstar) +
                           " 2XY/D^2=" + std::to_string(r.xy_chain) +
                           " 8G/D^2=" + std::to_string(r.g_chain) +
                           " 8d/D^2=" + std::to_string(r.kw_chain));
  }
  return r;
}

}  // namespace linbai

#include "linbai/samplers.hpp"

#include "linbai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linbai {

double optimistic_gain(const Vector& theta_hat, const Vector& lambda, const Vector& a,
                       double a_inv_norm2, double h, double L, double M) {
  const double m = (theta_hat - lambda).dot(a);
  const double r = std::sqrt(2.0 * h * std::max(0.0, a_inv_norm2));
  const double u = std::abs(m) + r;
  return std::min(u * u, 4.0 * L * L * M * M);
}

double optimistic_gain(const Vector& theta_hat, const Vector& lambda, const Vector& a,
                       const DesignMatrix& v_reg, double h, double L, double M) {
  if (!(h >= 0.0)) throw PreconditionError("optimistic_gain: h must be >= 0");
  return optimistic_gain(theta_hat, lambda, a, quad_norm(v_reg, a, NormMode::kInverse), h, L, M);
}

namespace {

std::vector<double> inverse_norms(const ArmSet& arms, const Matrix& reg_inverse) {
  std::vector<double> out(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) out[a] = arms[a].dot(reg_inverse * arms[a]);
  return out;
}

Matrix counts_design(const ArmSet& arms, std::span<const std::uint64_t> counts, double ridge) {
  const auto d = static_cast<Eigen::Index>(arms.dim());
  Matrix v = ridge * Matrix::Identity(d, d);
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (counts[a] > 0) v.noalias() += static_cast<double>(counts[a]) * arms[a] * arms[a].transpose();
  }
  return v;
}

Matrix stack_columns(const std::vector<Vector>& vs) {
  Matrix m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vs[j];
  return m;
}

}  // namespace

std::size_t greedy_design_arm(const ArmSet& arms, const Matrix& v_inv, const Matrix& targets) {
  const Matrix vb = v_inv * targets;
  const Vector base = (targets.cwiseProduct(vb)).colwise().sum().transpose();
  std::size_t pick = 0;
  double best = std::numeric_limits<double>::infinity();
  double best_total = best;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const Vector u = v_inv * arms[a];
    const double denom = 1.0 + arms[a].dot(u);
    const Vector cross = vb.transpose() * arms[a];
    const Vector scores = base - cross.cwiseAbs2() / denom;
    const double score = scores.maxCoeff();
    const double total = scores.sum();
    // near-ties on the max (every arm leaves some direction at the ridge scale
    // early on) fall back to the total, otherwise the lowest index repeats forever
    const double tol = 1e-9 * std::abs(best);
    if (score < best - tol || (score <= best + tol && total < best_total)) {
      best = score;
      best_total = total;
      pick = a;
    }
  }
  return pick;
}

LinGameSampler::LinGameSampler(const ProblemSpec& spec, const ThresholdParams& params)
    : spec_(spec), params_(params), tracker_(spec.arms.size()) {}

StepOutcome LinGameSampler::step(const RoundView& view) {
  const auto cand = candidate_answer(spec_, view.theta_hat);
  auto& learner = learners_.try_emplace(cand.answer.code, spec_.arms.size()).first->second;
  const SimplexWeights w = learner.propose();
  const BestResponse br = best_response(spec_, view.theta_hat, cand.answer, w.values());

  const double h = exploration_rate(view.t, params_);
  const auto norms = inverse_norms(spec_.arms, view.reg_inverse);
  StepOutcome out;
  out.gains.resize(spec_.arms.size());
  for (std::size_t a = 0; a < spec_.arms.size(); ++a) {
    out.gains[a] = 0.5 * optimistic_gain(view.theta_hat, br.lambda, spec_.arms[a], norms[a], h,
                                         params_.L, params_.M);
  }
  learner.update(out.gains);
  out.arm = tracker_.track_select(w);
  out.fictitious_answer = cand.answer;
  out.degenerate_guess = cand.degenerate;
  ++pair_counts_[{out.arm, cand.answer.code}];
  return out;
}

LinGameCSampler::LinGameCSampler(const ProblemSpec& spec, const ThresholdParams& params)
    : spec_(spec), params_(params), learner_(1), tracker_(1) {
  const std::size_t arms = spec.arms.size();
  if (is_bai_kind(spec.kind)) {
    for (std::size_t i = 0; i < spec.num_candidates(); ++i) answers_.push_back(Answer{i});
    learner_ = AdaHedge(arms * answers_.size());
    tracker_ = Tracker(arms * answers_.size());
  }
}

void LinGameCSampler::ensure_answer(Answer a) {
  if (std::find(answers_.begin(), answers_.end(), a) != answers_.end()) return;
  const std::size_t arms = spec_.arms.size();
  if (answers_.empty()) {
    learner_ = AdaHedge(arms);
    tracker_ = Tracker(arms);
  } else {
    learner_.add_experts(arms);
    tracker_.add_indices(arms);
  }
  answers_.push_back(a);
}

StepOutcome LinGameCSampler::step(const RoundView& view) {
  const auto cand = candidate_answer(spec_, view.theta_hat);
  if (is_threshold_kind(spec_.kind)) ensure_answer(cand.answer);

  const std::size_t num_arms = spec_.arms.size();
  const SimplexWeights w = learner_.propose();
  last_min_weight_ = *std::min_element(w.values().begin(), w.values().end());
  const double h = exploration_rate(view.t, params_);
  const auto norms = inverse_norms(spec_.arms, view.reg_inverse);

  StepOutcome out;
  out.gains.resize(w.size());
  for (std::size_t b = 0; b < answers_.size(); ++b) {
    const std::span<const double> block(w.values().data() + b * num_arms, num_arms);
    const BestResponse br = best_response(spec_, view.theta_hat, answers_[b], block);
    for (std::size_t a = 0; a < num_arms; ++a) {
      out.gains[b * num_arms + a] = 0.5 * optimistic_gain(view.theta_hat, br.lambda, spec_.arms[a],
                                                          norms[a], h, params_.L, params_.M);
    }
  }
  learner_.update(out.gains);
  const std::size_t pair = tracker_.track_select(w);
  out.arm = pair % num_arms;
  out.fictitious_answer = answers_[pair / num_arms];
  out.degenerate_guess = cand.degenerate;
  return out;
}

StepOutcome UniformSampler::step(const RoundView& view) {
  StepOutcome out;
  out.arm = static_cast<std::size_t>((view.t - 1) % num_arms_);
  return out;
}

FixedWeightsSampler::FixedWeightsSampler(SimplexWeights wstar)
    : wstar_(std::move(wstar)), tracker_(wstar_.size()) {}

StepOutcome FixedWeightsSampler::step(const RoundView&) {
  StepOutcome out;
  out.arm = tracker_.track_select(wstar_);
  return out;
}

XYStaticSampler::XYStaticSampler(const ProblemSpec& spec, StaticFlavor flavor)
    : spec_(spec), flavor_(flavor) {
  const auto& arms = spec.arms.arms();
  if (flavor == StaticFlavor::kG) {
    targets_ = stack_columns(arms);
  } else {
    std::vector<Vector> dirs;
    for (std::size_t i = 0; i < arms.size(); ++i) {
      for (std::size_t j = 0; j < arms.size(); ++j) {
        if (i != j) dirs.push_back(arms[i] - arms[j]);
      }
    }
    targets_ = stack_columns(dirs);
  }
}

StepOutcome XYStaticSampler::step(const RoundView& view) {
  const Matrix v = counts_design(spec_.arms, view.counts, kGreedyRidge);
  const auto d = static_cast<Eigen::Index>(spec_.dim());
  const Matrix v_inv = v.ldlt().solve(Matrix::Identity(d, d));
  StepOutcome out;
  out.arm = greedy_design_arm(spec_.arms, v_inv, targets_);
  return out;
}

LinGapESampler::LinGapESampler(const ProblemSpec& spec, const ThresholdParams& params)
    : spec_(spec), params_(params) {}

StepOutcome LinGapESampler::step(const RoundView& view) {
  const auto& cands = spec_.candidates();
  const auto cand = candidate_answer(spec_, view.theta_hat);
  const std::size_t best = cand.answer.code;
  const double pulls = static_cast<double>(view.t - 1);
  const double radius = std::sqrt(2.0 * beta_threshold(pulls, view.delta, params_));

  std::vector<double> w(view.counts.begin(), view.counts.end());
  const SymmetricSolver solver(design_matrix(spec_.arms, w));
  std::size_t rival = best == 0 ? 1 : 0;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cands.size(); ++j) {
    if (j == best) continue;
    const Vector dir = cands[best] - cands[j];
    const double q = solver.inverse_quad(dir);
    const double index = -view.theta_hat.dot(dir) + (std::isinf(q) ? q : std::sqrt(q) * radius);
    if (index > top) {
      top = index;
      rival = j;
    }
  }

  const Matrix v = counts_design(spec_.arms, view.counts, kGreedyRidge);
  const auto d = static_cast<Eigen::Index>(spec_.dim());
  const Matrix v_inv = v.ldlt().solve(Matrix::Identity(d, d));
  Matrix target(d, 1);
  target.col(0) = cands[best] - cands[rival];
  StepOutcome out;
  out.arm = greedy_design_arm(spec_.arms, v_inv, target);
  out.fictitious_answer = cand.answer;
  out.degenerate_guess = cand.degenerate;
  return out;
}

const std::vector<std::string>& sampler_names() {
  static const std::vector<std::string> names{"lingame",      "lingame-c",    "uniform", "fixed-w",
                                              "xy-static-g", "xy-static-xy", "lingape"};
  return names;
}

std::string canonical_sampler_name(std::string_view name) {
  static const std::vector<std::pair<std::string_view, std::string_view>> aliases{
      {"CG", "lingame-c"}, {"Lk", "lingame"},       {"RR", "uniform"},  {"fix", "fixed-w"},
      {"GS", "xy-static-g"}, {"XYS", "xy-static-xy"}, {"LG", "lingape"}};
  for (const auto& n : sampler_names()) {
    if (n == name) return n;
  }
  for (const auto& [alias, canon] : aliases) {
    if (alias == name) return std::string(canon);
  }
  std::string msg = "unknown sampler '" + std::string(name) + "'; valid names:";
  for (const auto& n : sampler_names()) msg += " " + n;
  throw ConfigError(msg);
}

std::unique_ptr<Sampler> make_sampler(std::string_view name, const ProblemSpec& spec,
                                      const ThresholdParams& params,
                                      const std::optional<SimplexWeights>& fixed_weights) {
  const std::string canon = canonical_sampler_name(name);
  if (canon == "lingame") return std::make_unique<LinGameSampler>(spec, params);
  if (canon == "lingame-c") return std::make_unique<LinGameCSampler>(spec, params);
  if (canon == "uniform") return std::make_unique<UniformSampler>(spec.arms.size());
  if (canon == "fixed-w") {
    if (!fixed_weights) throw ConfigError("fixed-w needs target weights");
    if (fixed_weights->size() != spec.arms.size()) throw ConfigError("fixed-w weights size mismatch");
    return std::make_unique<FixedWeightsSampler>(*fixed_weights);
  }
  if (canon == "xy-static-g") return std::make_unique<XYStaticSampler>(spec, StaticFlavor::kG);
  if (canon == "xy-static-xy") return std::make_unique<XYStaticSampler>(spec, StaticFlavor::kXY);
  if (!is_bai_kind(spec.kind)) {
    throw ConfigError("lingape supports best-arm identification kinds only");
  }
  return std::make_unique<LinGapESampler>(spec, params);
}

}  // namespace linbai

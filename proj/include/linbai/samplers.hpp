#pragma once

#include "linbai/learners.hpp"
#include "linbai/linalg.hpp"
#include "linbai/problems.hpp"
#include "linbai/stopping.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linbai {

/// Everything a sampling rule may look at in round t (before the pull).
struct RoundView {
  std::uint64_t t = 1;                   // current round, t - 1 pulls made so far
  const Vector& theta_hat;               // regularized estimate after t - 1 pulls
  std::span<const std::uint64_t> counts;  // N_{t-1}
  const Matrix& reg_inverse;             // (V_{N_{t-1}} + eta I)^{-1}
  double delta = 0.1;
};

struct StepOutcome {
  std::size_t arm = 0;
  std::optional<Answer> fictitious_answer;
  std::vector<double> gains;  // what was fed to the learner, if any
  bool degenerate_guess = false;
};

/// min((|<theta_hat - lambda, a>| + sqrt(2 h) ||a||_{V_reg^{-1}})^2, 4 L^2 M^2).
double optimistic_gain(const Vector& theta_hat, const Vector& lambda, const Vector& a,
                       const DesignMatrix& v_reg, double h, double L, double M);
/// Same with ||a||^2_{V_reg^{-1}} precomputed.
double optimistic_gain(const Vector& theta_hat, const Vector& lambda, const Vector& a,
                       double a_inv_norm2, double h, double L, double M);

class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual StepOutcome step(const RoundView& view) = 0;
  virtual std::string_view name() const = 0;
};

/// One AdaHedge learner per guessed answer, arm-level tracking.
class LinGameSampler final : public Sampler {
 public:
  LinGameSampler(const ProblemSpec& spec, const ThresholdParams& params);
  StepOutcome step(const RoundView& view) override;
  std::string_view name() const override { return "lingame"; }

  std::size_t num_learners() const { return learners_.size(); }
  const Tracker& tracker() const { return tracker_; }
  /// N^{a,i}: arm a pulled while answer i was the guess.
  const std::map<std::pair<std::size_t, std::uint64_t>, std::uint64_t>& pair_counts() const {
    return pair_counts_;
  }

 private:
  const ProblemSpec& spec_;
  ThresholdParams params_;
  std::map<std::uint64_t, AdaHedge> learners_;
  Tracker tracker_;
  std::map<std::pair<std::size_t, std::uint64_t>, std::uint64_t> pair_counts_;
};

/// Single AdaHedge learner over (arm, answer) pairs, pair-level tracking.
/// Expert layout: index = block * A + arm, block indexing `answers()`.
class LinGameCSampler final : public Sampler {
 public:
  LinGameCSampler(const ProblemSpec& spec, const ThresholdParams& params);
  StepOutcome step(const RoundView& view) override;
  std::string_view name() const override { return "lingame-c"; }

  const std::vector<Answer>& answers() const { return answers_; }
  const AdaHedge& learner() const { return learner_; }
  const Tracker& tracker() const { return tracker_; }
  /// Smallest entry of the last proposal, for positivity audits.
  double last_min_weight() const { return last_min_weight_; }

 private:
  void ensure_answer(Answer a);

  const ProblemSpec& spec_;
  ThresholdParams params_;
  std::vector<Answer> answers_;
  AdaHedge learner_;
  Tracker tracker_;
  double last_min_weight_ = 0.0;
};

class UniformSampler final : public Sampler {
 public:
  explicit UniformSampler(std::size_t num_arms) : num_arms_(num_arms) {}
  StepOutcome step(const RoundView& view) override;
  std::string_view name() const override { return "uniform"; }

 private:
  std::size_t num_arms_;
};

/// C-tracks a fixed allocation (the oracle baseline tracks w*(theta)).
class FixedWeightsSampler final : public Sampler {
 public:
  explicit FixedWeightsSampler(SimplexWeights wstar);
  StepOutcome step(const RoundView& view) override;
  std::string_view name() const override { return "fixed-w"; }

 private:
  SimplexWeights wstar_;
  Tracker tracker_;
};

enum class StaticFlavor { kG, kXY };

/// Greedy static allocation: argmin_a max_b ||b||^2_{(V_N + a a^T + eps I)^{-1}}.
class XYStaticSampler final : public Sampler {
 public:
  XYStaticSampler(const ProblemSpec& spec, StaticFlavor flavor);
  StepOutcome step(const RoundView& view) override;
  std::string_view name() const override {
    return flavor_ == StaticFlavor::kG ? "xy-static-g" : "xy-static-xy";
  }

 private:
  const ProblemSpec& spec_;
  StaticFlavor flavor_;
  Matrix targets_;
};

/// Greedy LinGapE: most ambiguous competitor j_t, then the arm that most
/// reduces ||a_{i_t} - a_{j_t}||^2.
class LinGapESampler final : public Sampler {
 public:
  LinGapESampler(const ProblemSpec& spec, const ThresholdParams& params);
  StepOutcome step(const RoundView& view) override;
  std::string_view name() const override { return "lingape"; }

 private:
  const ProblemSpec& spec_;
  ThresholdParams params_;
};

inline constexpr double kGreedyRidge = 1e-9;

/// Canonical names: lingame, lingame-c, uniform, fixed-w, xy-static-g,
/// xy-static-xy, lingape. Plot abbreviations CG, Lk, RR, fix, GS, XYS, LG
/// are accepted as aliases.
std::string canonical_sampler_name(std::string_view name);
const std::vector<std::string>& sampler_names();

/// ConfigError on unknown names or sampler/problem mismatch. `fixed_weights`
/// is required for fixed-w.
std::unique_ptr<Sampler> make_sampler(std::string_view name, const ProblemSpec& spec,
                                      const ThresholdParams& params,
                                      const std::optional<SimplexWeights>& fixed_weights = {});

/// argmin_a max_b ||b||^2_{(V + a a^T)^{-1}} from V^{-1}; near-ties on the max go to the
/// smaller total over b, then the lowest index.
std::size_t greedy_design_arm(const ArmSet& arms, const Matrix& v_inv, const Matrix& targets);

}  // namespace linbai

#pragma once

#include "linbai/linalg.hpp"
#include "linbai/problems.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace linbai {

enum class TransductiveKind { kG, kXY, kABStar, kThresholdIota };

std::string_view to_string(TransductiveKind kind);

/// Arms to pull and the directions whose uncertainty is controlled.
struct DesignProblem {
  ArmSet arms;
  std::vector<Vector> targets;

  DesignProblem(ArmSet arms, std::vector<Vector> targets);
};

struct DesignSolution {
  SimplexWeights weights;
  double value = 0.0;  // max_b ||b||^2_{V_w^{-1}} at the returned weights
  std::size_t iterations = 0;
  std::vector<double> history;  // per-iteration surrogate value when requested
};

std::vector<Vector> build_transductive_set(const ProblemSpec& spec, const Vector& theta,
                                           TransductiveKind kind);

/// max_b ||b||^2_{V_w^{-1}}; kInfiniteNorm if a target leaves range(V_w).
double design_value(const DesignProblem& problem, const SimplexWeights& w);

/// Plain Frank-Wolfe heuristic: greedily adds the arm with the largest
/// max_b <a,b>^2_{V^{-1}} starting from V = I.
DesignSolution fw_design(const DesignProblem& problem, std::size_t max_iter,
                         bool record_history = false);

/// Saddle Frank-Wolfe: the agent adds argmax_a ||a||^2_{V^{-1} Vt V^{-1}}
/// while the targets accumulate their own counts Vt += b b^T with
/// b = argmax_b ||b||^2_{V^{-1}}.
DesignSolution saddle_fw_design(const DesignProblem& problem, std::size_t max_iter,
                                bool record_history = false);

struct CharacteristicTime {
  double tstar = 0.0;
  SimplexWeights wstar;
};

/// T*(theta) = 2 * min_w max_{b in B*(theta)} ||b||^2_{V_w^{-1}}.
CharacteristicTime characteristic_time(const ProblemSpec& spec, const Vector& theta,
                                       std::size_t solver_iters);

/// log(1/delta) * max_{a != a*} 2 ||a* - a||^2_{V_w^{-1}} / <theta, a* - a>^2.
double lower_bound_time(const ProblemSpec& spec, const Vector& theta, const SimplexWeights& w,
                        double delta);

struct ComplexityReport {
  std::size_t dim = 0;
  double delta = 0.0;
  double delta_min = 0.0;
  double tstar = 0.0;
  double g_value = 0.0;
  double xy_value = 0.0;
  double xy_chain = 0.0;       // 2 XY / delta_min^2
  double g_chain = 0.0;        // 8 G / delta_min^2
  double kw_chain = 0.0;       // 8 d / delta_min^2
  SimplexWeights w_abstar;
  SimplexWeights w_xy;
  SimplexWeights w_g;
  double tw_abstar = 0.0;
  double tw_xy = 0.0;
  double tw_g = 0.0;
  std::size_t solver_iters = 0;
};

/// Computes T*, XY and G designs and checks T* <= 2XY/D^2 <= 8G/D^2 = 8d/D^2
/// with 2% slack; throws ConsistencyError otherwise.
ComplexityReport complexity_report(const ProblemSpec& spec, const Vector& theta, double delta,
                                   std::size_t solver_iters = 10000);

}  // namespace linbai

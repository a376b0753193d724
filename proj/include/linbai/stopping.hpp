#pragma once

#include "linbai/linalg.hpp"
#include "linbai/problems.hpp"

#include <cstdint>
#include <span>

namespace linbai {

struct ThresholdParams {
  std::size_t d = 1;
  double L = 1.0;      // arm norm bound
  double eta = 1.0;    // ridge of the least-squares estimator
  double M = 1.0;      // parameter norm bound
  double alpha_explore = 3.0;

  void validate() const;
};

/// beta(t, delta) = (sqrt(log(1/delta) + d/2 log(1 + t L^2 / (eta d))) + sqrt(eta/2) M)^2
double beta_threshold(double t, double delta, const ThresholdParams& p);

/// h(t) = beta(t, min(t^-alpha, 1/2)); t >= 1.
double exploration_rate(std::uint64_t t, const ThresholdParams& p);

struct StopDecision {
  bool stop = false;
  Answer answer;
  double statistic = 0.0;
  double threshold = 0.0;
  bool degenerate = false;
};

/// GLR test: inf over the alternative of the empirical best answer of
/// 1/2 ||theta_hat - lambda||^2_{V_N} against beta(sum N, delta).
StopDecision glr_stopping(const ProblemSpec& spec, const Vector& theta_hat,
                          std::span<const std::uint64_t> counts, double delta,
                          const ThresholdParams& p);

}  // namespace linbai

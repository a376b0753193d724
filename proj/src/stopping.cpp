#include "linbai/stopping.hpp"

#include "linbai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace linbai {

void ThresholdParams::validate() const {
  if (d < 1) throw PreconditionError("ThresholdParams: d must be >= 1");
  if (!(L > 0.0)) throw PreconditionError("ThresholdParams: L must be positive");
  if (!(eta > 0.0)) throw PreconditionError("ThresholdParams: eta must be positive");
  if (!(M > 0.0)) throw PreconditionError("ThresholdParams: M must be positive");
  if (!(alpha_explore > 2.0)) throw PreconditionError("ThresholdParams: alpha_explore must exceed 2");
}

double beta_threshold(double t, double delta, const ThresholdParams& p) {
  if (!(t >= 0.0)) throw PreconditionError("beta_threshold: t must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("beta_threshold: delta not in (0,1)");
  const double d = static_cast<double>(p.d);
  const double inner = std::log(1.0 / delta) + 0.5 * d * std::log1p(t * p.L * p.L / (p.eta * d));
  const double root = std::sqrt(inner) + std::sqrt(0.5 * p.eta) * p.M;
  return root * root;
}

double exploration_rate(std::uint64_t t, const ThresholdParams& p) {
  if (t == 0) throw PreconditionError("exploration_rate: t must be >= 1");
  const double tt = static_cast<double>(t);
  const double delta_eff = std::min(std::pow(tt, -p.alpha_explore), 0.5);
  return beta_threshold(tt, delta_eff, p);
}

StopDecision glr_stopping(const ProblemSpec& spec, const Vector& theta_hat,
                          std::span<const std::uint64_t> counts, double delta,
                          const ThresholdParams& p) {
  if (counts.size() != spec.arms.size()) throw DimensionError("glr_stopping: counts size mismatch");
  const std::uint64_t t = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  StopDecision out;
  out.threshold = beta_threshold(static_cast<double>(t), delta, p);
  const auto cand = candidate_answer(spec, theta_hat);
  out.answer = cand.answer;
  if (cand.degenerate) {
    out.degenerate = true;
    return out;
  }
  std::vector<double> w(counts.begin(), counts.end());
  out.statistic = best_response(spec, theta_hat, cand.answer, w).value;
  out.stop = out.statistic > out.threshold;
  return out;
}

}  // namespace linbai

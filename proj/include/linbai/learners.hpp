#pragma once

#include "linbai/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace linbai {

/// AdaHedge over K experts, gains formulation: weights are proportional to
/// exp(eta * G_k) with eta = ln(K) / Delta, Delta the cumulative mixability gap.
/// Delta = 0 is the follow-the-leader limit (eta = infinity).
class AdaHedge {
 public:
  explicit AdaHedge(std::size_t k);

  SimplexWeights propose() const;
  /// Feeds one round of gains; returns the round's mixability gap.
  double update(std::span<const double> gains);
  /// Appends experts with zero cumulative gain.
  void add_experts(std::size_t n);

  std::size_t size() const { return cum_gain_.size(); }
  std::uint64_t round() const { return round_; }
  double cum_mix_gap() const { return cum_mix_gap_; }
  const std::vector<double>& cum_gain() const { return cum_gain_; }
  /// ln(K) / Delta, +infinity while Delta = 0.
  double learning_rate() const;

 private:
  std::vector<double> log_weights() const;

  std::vector<double> cum_gain_;
  double cum_mix_gap_ = 0.0;
  std::uint64_t round_ = 0;
};

/// C-tracking: converts a stream of simplex weights into integer pulls with
/// -sum_{j=2}^K 1/j <= N^k - W^k <= 1.
class Tracker {
 public:
  explicit Tracker(std::size_t k);

  /// W += w, then pulls argmin_k N^k - W^k (lowest index on ties).
  std::size_t track_select(const SimplexWeights& w);
  void add_indices(std::size_t n);

  std::size_t size() const { return counts_.size(); }
  std::uint64_t round() const { return round_; }
  const std::vector<double>& cumulative_weights() const { return cum_weights_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  double lower_bound() const;

 private:
  void check_bounds() const;

  std::vector<double> cum_weights_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t round_ = 0;
};

}  // namespace linbai

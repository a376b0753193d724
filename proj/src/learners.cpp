#include "linbai/learners.hpp"

#include "linbai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace linbai {

AdaHedge::AdaHedge(std::size_t k) : cum_gain_(k, 0.0) {
  if (k == 0) throw PreconditionError("AdaHedge: need at least one expert");
}

double AdaHedge::learning_rate() const {
  if (cum_mix_gap_ <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(size())) / cum_mix_gap_;
}

std::vector<double> AdaHedge::log_weights() const {
  const std::size_t k = size();
  const double top = *std::max_element(cum_gain_.begin(), cum_gain_.end());
  std::vector<double> lw(k);
  const double eta = learning_rate();
  if (std::isinf(eta)) {
    std::size_t leaders = 0;
    for (double g : cum_gain_) leaders += (g == top);
    const double l = -std::log(static_cast<double>(leaders));
    for (std::size_t i = 0; i < k; ++i) {
      lw[i] = cum_gain_[i] == top ? l : -std::numeric_limits<double>::infinity();
    }
    return lw;
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    lw[i] = eta * (cum_gain_[i] - top);
    norm += std::exp(lw[i]);
  }
  const double log_norm = std::log(norm);
  for (double& v : lw) v -= log_norm;
  return lw;
}

SimplexWeights AdaHedge::propose() const {
  const auto lw = log_weights();
  std::vector<double> w(lw.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    w[i] = std::exp(lw[i]);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return SimplexWeights(std::move(w));
}

double AdaHedge::update(std::span<const double> gains) {
  if (gains.size() != size()) throw DimensionError("AdaHedge::update: gain vector size mismatch");
  for (double g : gains) {
    if (!std::isfinite(g)) throw PreconditionError("AdaHedge::update: non-finite gain");
  }
  const auto lw = log_weights();
  const double eta = learning_rate();

  double expected = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) expected += std::exp(lw[i]) * gains[i];

  double mix = 0.0;
  if (std::isinf(eta)) {
    mix = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lw.size(); ++i) {
      if (std::isfinite(lw[i])) mix = std::max(mix, gains[i]);
    }
  } else {
    // (1/eta) log sum_k w_k exp(eta g_k), evaluated in log space
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lw.size(); ++i) top = std::max(top, lw[i] + eta * gains[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) acc += std::exp(lw[i] + eta * gains[i] - top);
    mix = (top + std::log(acc)) / eta;
  }
  const double gap = std::max(0.0, mix - expected);
  cum_mix_gap_ += gap;
  for (std::size_t i = 0; i < gains.size(); ++i) cum_gain_[i] += gains[i];
  ++round_;
  return gap;
}

void AdaHedge::add_experts(std::size_t n) { cum_gain_.resize(cum_gain_.size() + n, 0.0); }

Tracker::Tracker(std::size_t k) : cum_weights_(k, 0.0), counts_(k, 0) {
  if (k == 0) throw PreconditionError("Tracker: need at least one index");
}

double Tracker::lower_bound() const {
  double h = 0.0;
  for (std::size_t j = 2; j <= size(); ++j) h += 1.0 / static_cast<double>(j);
  return -h;
}

std::size_t Tracker::track_select(const SimplexWeights& w) {
  if (w.size() != size()) throw DimensionError("Tracker: weight vector size mismatch");
  for (std::size_t k = 0; k < size(); ++k) cum_weights_[k] += w[k];
  std::size_t pick = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) {
    const double lag = static_cast<double>(counts_[k]) - cum_weights_[k];
    if (lag < best) {
      best = lag;
      pick = k;
    }
  }
  ++counts_[pick];
  ++round_;
  check_bounds();
  return pick;
}

void Tracker::add_indices(std::size_t n) {
  cum_weights_.resize(cum_weights_.size() + n, 0.0);
  counts_.resize(counts_.size() + n, 0);
}

void Tracker::check_bounds() const {
  constexpr double kSlack = 1e-9;
  const double lo = lower_bound() - kSlack;
  for (std::size_t k = 0; k < size(); ++k) {
    const double lag = static_cast<double>(counts_[k]) - cum_weights_[k];
    if (lag < lo || lag > 1.0 + kSlack) {
      throw ConsistencyError("tracking bound violated at index " + std::to_string(k) +
                             ": N - W = " + std::to_string(lag));
    }
  }
}

}  // namespace linbai

#pragma once

#include "linbai/linalg.hpp"
#include "linbai/problems.hpp"
#include "linbai/stopping.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace linbai {

struct Instance {
  ProblemSpec spec;
  Vector theta;
  double noise_sd = 1.0;
  std::string label;

  /// Checks ||theta|| <= M and that theta has a unique answer.
  void validate() const;
};

/// Per-run reward noise. mt19937_64 feeding the polar Box-Muller method;
/// fixed so that traces are reproducible across platforms.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}
  double standard_normal();
  double uniform01();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

double sample_reward(const Instance& instance, std::size_t arm, NoiseStream& noise);

enum class EtaMode { kValue, kTheorem };

struct RunParams {
  EtaMode eta_mode = EtaMode::kValue;
  double eta = 1.0;
  double alpha_explore = 3.0;
  std::uint64_t max_steps = 1'000'000;
  std::size_t design_iters = 10'000;  // fixed-w oracle weights
  bool record_wall_time = true;
  // Test hook: replaces beta(t, delta) in the stopping rule when set.
  std::function<double(double t, double delta)> threshold_override;
};

/// Threshold parameters implied by an instance and run parameters.
ThresholdParams threshold_params(const Instance& instance, const RunParams& params);

struct RunTrace {
  std::string instance;
  std::string algorithm;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t tau = 0;
  Answer answer;
  bool correct = false;
  bool timed_out = false;
  double wall_ms = 0.0;
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> pulls;  // filled only when requested
  std::string error;               // non-empty when the run threw
};

struct EpisodeOptions {
  bool record_pulls = false;
  std::optional<SimplexWeights> fixed_weights;
};

/// Runs one fixed-confidence episode: stop check with beta(t-1, delta), then
/// sample, pull, observe, update the estimate.
RunTrace run_episode(const std::string& algorithm, const Instance& instance, double delta,
                     std::uint64_t seed, const RunParams& params, const EpisodeOptions& options = {});

struct ReplicateJob {
  std::vector<Instance> instances;
  std::vector<std::string> algorithms;
  std::vector<double> deltas;
  std::size_t n_reps = 1;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  RunParams params;
};

/// seed_i = master ^ (i * 0x9E3779B97F4A7C15) with i the run's position in
/// (instance, algorithm, delta, rep) order.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

/// All runs, sorted by (instance, algorithm, delta, rep) regardless of schedule.
std::vector<RunTrace> replicate(const ReplicateJob& job);

}  // namespace linbai

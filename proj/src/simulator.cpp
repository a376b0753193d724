#include "linbai/simulator.hpp"

#include "linbai/design.hpp"
#include "linbai/errors.hpp"
#include "linbai/samplers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

namespace linbai {

namespace {

constexpr std::uint64_t kResolveEvery = 1000;
constexpr double kResolveTolerance = 1e-6;

}  // namespace

void Instance::validate() const {
  spec.validate();
  if (static_cast<std::size_t>(theta.size()) != spec.dim()) {
    throw DimensionError("instance '" + label + "': theta dimension mismatch");
  }
  if (spec.M && theta.norm() > *spec.M) {
    throw ConfigError("instance '" + label + "': ||theta|| exceeds M");
  }
  if (!(noise_sd >= 0.0)) throw ConfigError("instance '" + label + "': negative noise_sd");
  correct_answer(spec, theta);
}

double NoiseStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NoiseStream::standard_normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  return u * factor;
}

double sample_reward(const Instance& instance, std::size_t arm, NoiseStream& noise) {
  const double mean = instance.theta.dot(instance.spec.arms[arm]);
  const double z = noise.standard_normal();
  return mean + instance.noise_sd * z;
}

ThresholdParams threshold_params(const Instance& instance, const RunParams& params) {
  if (!instance.spec.M) throw ConfigError("instance '" + instance.label + "' has no M bound");
  ThresholdParams p;
  p.d = instance.spec.dim();
  p.L = instance.spec.arms.norm_bound();
  p.M = *instance.spec.M;
  p.alpha_explore = params.alpha_explore;
  if (params.eta_mode == EtaMode::kTheorem) {
    const double a = static_cast<double>(instance.spec.arms.size());
    p.eta = 2.0 * (1.0 + std::log(a)) * a * p.L * p.L + p.M * p.M;
  } else {
    p.eta = params.eta;
  }
  p.validate();
  return p;
}

RunTrace run_episode(const std::string& algorithm, const Instance& instance, double delta,
                     std::uint64_t seed, const RunParams& params, const EpisodeOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  instance.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (params.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  const ThresholdParams tp = threshold_params(instance, params);
  const std::string name = canonical_sampler_name(algorithm);

  std::optional<SimplexWeights> fixed = options.fixed_weights;
  if (name == "fixed-w" && !fixed) {
    fixed = characteristic_time(instance.spec, instance.theta, params.design_iters).wstar;
  }
  auto sampler = make_sampler(name, instance.spec, tp, fixed);

  const ArmSet& arms = instance.spec.arms;
  const auto d = static_cast<Eigen::Index>(arms.dim());
  NoiseStream noise(seed);
  Matrix reg_inverse = Matrix::Identity(d, d) / tp.eta;
  Vector reward_sum = Vector::Zero(d);
  Vector theta_hat = Vector::Zero(d);
  std::vector<std::uint64_t> counts(arms.size(), 0);

  RunTrace trace;
  trace.instance = instance.label;
  trace.algorithm = name;
  trace.delta = delta;
  trace.seed = seed;

  for (std::uint64_t t = 1;; ++t) {
    const std::uint64_t pulls = t - 1;
    StopDecision decision = glr_stopping(instance.spec, theta_hat, counts, delta, tp);
    if (params.threshold_override) {
      decision.threshold = params.threshold_override(static_cast<double>(pulls), delta);
      decision.stop = !decision.degenerate && decision.statistic > decision.threshold;
    }
    if (decision.stop || pulls >= params.max_steps) {
      trace.tau = pulls;
      trace.answer = decision.answer;
      trace.timed_out = !decision.stop;
      break;
    }

    const RoundView view{t, theta_hat, counts, reg_inverse, delta};
    const StepOutcome outcome = sampler->step(view);
    const std::size_t arm = outcome.arm;
    const double y = sample_reward(instance, arm, noise);
    ++counts[arm];
    if (options.record_pulls) trace.pulls.push_back(arm);
    reg_inverse = rank_one_inverse_update(reg_inverse, arms[arm]);
    reward_sum += y * arms[arm];
    theta_hat = reg_inverse * reward_sum;

    if (t % kResolveEvery == 0) {
      Matrix v = tp.eta * Matrix::Identity(d, d);
      for (std::size_t a = 0; a < arms.size(); ++a) {
        v.noalias() += static_cast<double>(counts[a]) * arms[a] * arms[a].transpose();
      }
      const auto ldlt = v.ldlt();
      const Vector fresh = ldlt.solve(reward_sum);
      if ((fresh - theta_hat).norm() > kResolveTolerance * std::max(1.0, fresh.norm())) {
        throw ConsistencyError("incremental estimate drifted from the direct solve");
      }
      theta_hat = fresh;
      reg_inverse = ldlt.solve(Matrix::Identity(d, d));
    }
  }

  trace.counts = std::move(counts);
  trace.correct = trace.answer == correct_answer(instance.spec, instance.theta);
  if (params.record_wall_time) {
    trace.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return trace;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return master_seed ^ (index * 0x9E3779B97F4A7C15ULL);
}

std::vector<RunTrace> replicate(const ReplicateJob& job) {
  if (job.n_reps < 1) throw ConfigError("n_reps must be >= 1");
  struct Task {
    std::size_t instance;
    std::string algorithm;
    double delta;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  std::map<std::size_t, SimplexWeights> oracle_weights;
  for (std::size_t i = 0; i < job.instances.size(); ++i) {
    job.instances[i].validate();
    for (const auto& alg : job.algorithms) {
      const std::string name = canonical_sampler_name(alg);
      if (name == "lingape" && !is_bai_kind(job.instances[i].spec.kind)) {
        throw ConfigError("lingape cannot run on instance '" + job.instances[i].label + "'");
      }
      if (name == "fixed-w" && !oracle_weights.contains(i)) {
        oracle_weights.emplace(i, characteristic_time(job.instances[i].spec, job.instances[i].theta,
                                                      job.params.design_iters)
                                      .wstar);
      }
      for (double delta : job.deltas) {
        if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("deltas must lie in (0,1)");
        for (std::size_t rep = 0; rep < job.n_reps; ++rep) {
          tasks.push_back({i, name, delta, derive_seed(job.master_seed, tasks.size())});
        }
      }
    }
  }

  std::vector<RunTrace> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < tasks.size(); k = next.fetch_add(1)) {
      const Task& task = tasks[k];
      EpisodeOptions opts;
      if (auto it = oracle_weights.find(task.instance); it != oracle_weights.end()) {
        opts.fixed_weights = it->second;
      }
      const Instance& inst = job.instances[task.instance];
      try {
        results[k] = run_episode(task.algorithm, inst, task.delta, task.seed, job.params, opts);
      } catch (const std::exception& e) {
        RunTrace failed;
        failed.instance = inst.label;
        failed.algorithm = task.algorithm;
        failed.delta = task.delta;
        failed.seed = task.seed;
        failed.counts.assign(inst.spec.arms.size(), 0);
        failed.error = e.what();
        results[k] = std::move(failed);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(job.workers, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace linbai

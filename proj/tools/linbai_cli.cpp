#include "linbai/bench.hpp"
#include "linbai/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace linbai;

struct BenchOverrides {
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> eta;
  std::optional<double> alpha_explore;
  std::optional<std::uint64_t> max_steps;
  std::optional<std::string> out_dir;
};

void apply_eta(RunParams& params, const std::string& eta) {
  if (eta == "theorem") {
    params.eta_mode = EtaMode::kTheorem;
    return;
  }
  double value = 0.0;
  std::istringstream in(eta);
  if (!(in >> value) || !in.eof()) throw ConfigError("--eta: expected a number or 'theorem'");
  params.eta_mode = EtaMode::kValue;
  params.eta = value;
}

void emit(const std::optional<std::string>& out, const std::string& content) {
  if (out) {
    write_file_atomic(*out, content);
  } else {
    std::cout << content;
  }
}

int cmd_solve_design(const std::string& path, double delta, std::size_t iters,
                     const std::optional<std::string>& out) {
  const Instance inst = instance_from_json(load_json_file(path));
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("--delta must lie in (0,1)");
  const ComplexityReport report = complexity_report(inst.spec, inst.theta, delta, iters);
  std::cout << report_table(report, inst.label);
  if (out) write_file_atomic(*out, report_to_json(report, inst.label).dump(2) + "\n");
  return 0;
}

int cmd_bench(const std::string& path, const BenchOverrides& o) {
  const std::filesystem::path config_path(path);
  const auto base = config_path.parent_path();
  BenchConfig cfg = parse_bench_config(load_json_file(config_path), base);
  if (o.reps) cfg.n_reps = *o.reps;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.eta) apply_eta(cfg.params, *o.eta);
  if (o.alpha_explore) cfg.params.alpha_explore = *o.alpha_explore;
  if (o.max_steps) cfg.params.max_steps = *o.max_steps;
  if (o.out_dir) {
    std::filesystem::create_directories(*o.out_dir);
    cfg.csv_path = std::filesystem::path(*o.out_dir) / cfg.csv_path.filename();
    cfg.summary_path = std::filesystem::path(*o.out_dir) / cfg.summary_path.filename();
  } else {
    if (cfg.csv_path.is_relative()) cfg.csv_path = base / cfg.csv_path;
    if (cfg.summary_path.is_relative()) cfg.summary_path = base / cfg.summary_path;
  }
  cfg.validate();

  const auto traces = replicate(cfg.job());
  std::size_t failed = 0;
  for (const auto& t : traces) {
    if (!t.error.empty()) {
      ++failed;
      std::cerr << "run " << t.instance << "/" << t.algorithm << " seed " << t.seed
                << " failed: " << t.error << '\n';
    }
  }
  const auto rows = rows_from_traces(traces);
  std::ostringstream csv;
  write_csv(csv, rows);
  const Json summary = summarize(rows);
  write_file_atomic(cfg.csv_path, csv.str());
  write_file_atomic(cfg.summary_path, summary.dump(2) + "\n");
  std::cout << summary_table(summary);
  std::cout << "wrote " << cfg.csv_path.string() << " and " << cfg.summary_path.string() << '\n';
  return failed ? 1 : 0;
}

int cmd_summarize(const std::string& path, const std::optional<std::string>& out) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  const Json summary = summarize(read_csv(in));
  if (out) {
    write_file_atomic(*out, summary.dump(2) + "\n");
    std::cout << summary_table(summary);
  } else {
    std::cout << summary.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-confidence pure exploration for linear bandits"};
  app.require_subcommand(1);

  std::optional<std::string> out;
  double delta = 0.01;
  std::size_t iters = 10000;
  std::string path;

  auto* solve = app.add_subcommand("solve-design", "Optimal designs and complexities of an instance");
  solve->add_option("instance", path, "Instance JSON file")->required();
  solve->add_option("--delta", delta, "Confidence level for the T_w column");
  solve->add_option("--iters", iters, "Saddle Frank-Wolfe iterations");
  solve->add_option("--out", out, "Write the JSON report here");

  BenchOverrides o;
  auto* bench = app.add_subcommand("bench", "Run a benchmark configuration");
  bench->add_option("config", path, "Config JSON file")->required();
  bench->add_option("--reps", o.reps, "Override n_reps");
  bench->add_option("--seed", o.seed, "Override master_seed");
  bench->add_option("--workers", o.workers, "Worker threads");
  bench->add_option("--eta", o.eta, "Regularization: a number or 'theorem'");
  bench->add_option("--alpha-explore", o.alpha_explore, "Exploration exponent (> 2)");
  bench->add_option("--max-steps", o.max_steps, "Step cap per run");
  bench->add_option("--out", o.out_dir, "Output directory for CSV and summary");

  auto* summ = app.add_subcommand("summarize", "Recompute the summary from a results CSV");
  summ->add_option("csv", path, "Results CSV")->required();
  summ->add_option("--out", out, "Write the summary JSON here");

  auto* make = app.add_subcommand("make-instance", "Generate an instance file");
  make->require_subcommand(1);
  std::size_t d = 2;
  double alpha = 0.1;
  std::size_t n_arms = 20;
  std::uint64_t seed = 0;
  std::optional<double> m_fixed;
  auto* counter = make->add_subcommand("counterexample", "Basis arms plus a disturbing arm");
  counter->add_option("--d", d, "Dimension");
  counter->add_option("--alpha", alpha, "Angle of the extra arm in radians");
  counter->add_option("--M", m_fixed, "Bound on ||theta|| (default 2 max(1, ||theta||))");
  counter->add_option("--out", out, "Output file (stdout if absent)");
  auto* sphere = make->add_subcommand("sphere", "Random unit-sphere arms");
  sphere->add_option("--d", d, "Dimension");
  sphere->add_option("--arms", n_arms, "Number of arms");
  sphere->add_option("--seed", seed, "Generator seed");
  sphere->add_option("--M", m_fixed, "Bound on ||theta|| (default 2 max(1, ||theta||))");
  sphere->add_option("--out", out, "Output file (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve_design(path, delta, iters, out);
    if (*bench) return cmd_bench(path, o);
    if (*summ) return cmd_summarize(path, out);
    const MPolicy policy{m_fixed};
    if (*counter) {
      emit(out, instance_to_json(make_counterexample(d, alpha, policy)).dump(2) + "\n");
    } else {
      std::size_t resamples = 0;
      const Instance inst = make_sphere_instance(d, n_arms, seed, policy, &resamples);
      if (resamples) std::cerr << "resampled " << resamples << " times\n";
      emit(out, instance_to_json(inst).dump(2) + "\n");
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DegenerateParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

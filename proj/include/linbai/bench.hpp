#pragma once

#include "linbai/design.hpp"
#include "linbai/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace linbai {

using Json = nlohmann::json;

/// How M is chosen when an instance does not carry one: "2x" gives
/// M = 2 max(1, ||theta||); a number fixes M.
struct MPolicy {
  std::optional<double> fixed;
  double resolve(const Vector& theta) const;
  static MPolicy parse(const Json& j);
};

/// Canonical basis e_1..e_d plus (cos a, sin a, 0, ..., 0); theta = e_1.
Instance make_counterexample(std::size_t d, double alpha, const MPolicy& policy = {});

/// n_arms uniform unit-sphere arms; theta = a + 0.01 (a' - a) for the
/// closest pair (a, a'). `resamples` receives the number of redraws.
Instance make_sphere_instance(std::size_t d, std::size_t n_arms, std::uint64_t seed,
                              const MPolicy& policy = {}, std::size_t* resamples = nullptr);

Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& j, const MPolicy& policy = {});

/// Parses JSON text, reporting syntax errors with line and column.
Json parse_json_text(const std::string& text, const std::string& source);
Json load_json_file(const std::filesystem::path& path);

struct BenchConfig {
  std::vector<Instance> instances;
  std::vector<std::string> algorithms;
  std::vector<double> deltas;
  std::size_t n_reps = 1;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  RunParams params;
  std::filesystem::path csv_path = "results.csv";
  std::filesystem::path summary_path = "summary.json";

  void validate() const;
  ReplicateJob job() const;
};

/// Relative instance file references resolve against `base_dir`.
BenchConfig parse_bench_config(const Json& j, const std::filesystem::path& base_dir);

/// One line of the results CSV.
struct CsvRow {
  std::string instance;
  std::string algorithm;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t tau = 0;
  std::uint64_t answer = 0;
  bool correct = false;
  bool timed_out = false;
  double wall_ms = 0.0;
  std::vector<std::uint64_t> counts;
};

inline constexpr const char* kCsvHeader =
    "instance,algorithm,delta,seed,tau,answer,correct,timed_out,wall_ms,counts";

std::vector<CsvRow> rows_from_traces(const std::vector<RunTrace>& traces);
void write_csv(std::ostream& os, const std::vector<CsvRow>& rows);
/// ConfigError on a header or field mismatch (with the line number).
std::vector<CsvRow> read_csv(std::istream& is);

/// Per (instance, algorithm, delta): tau mean/median/q10/q90 over finished
/// runs, error rate, timeouts, mean per-arm counts.
Json summarize(const std::vector<CsvRow>& rows);

Json report_to_json(const ComplexityReport& report, const std::string& label);
std::string report_table(const ComplexityReport& report, const std::string& label);
std::string summary_table(const Json& summary);

/// Shortest round-trip decimal form.
std::string format_double(double x);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace linbai

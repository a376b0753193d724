#include "linbai/bench.hpp"

#include "linbai/errors.hpp"
#include "linbai/samplers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace linbai {

namespace {

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + "[" + std::to_string(i) + "]: not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::vector<Vector> vectors_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty array of vectors");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vector_from_json(j[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json weights_to_json(const SimplexWeights& w) { return Json(w.values()); }

template <typename T>
T required(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line, const char* field) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("csv line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
  }
  return value;
}

bool parse_bool(const std::string& s, std::size_t line, const char* field) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ConfigError("csv line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
}

Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double MPolicy::resolve(const Vector& theta) const {
  if (fixed) return *fixed;
  return 2.0 * std::max(1.0, theta.norm());
}

MPolicy MPolicy::parse(const Json& j) {
  if (j.is_null()) return {};
  if (j.is_string()) {
    if (j.get<std::string>() == "2x") return {};
    throw ConfigError("m_policy: expected \"2x\" or a positive number");
  }
  if (j.is_number() && j.get<double>() > 0.0) return {j.get<double>()};
  throw ConfigError("m_policy: expected \"2x\" or a positive number");
}

Instance make_counterexample(std::size_t d, double alpha, const MPolicy& policy) {
  if (d < 2) throw ConfigError("counterexample: d must be >= 2");
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) {
    throw ConfigError("counterexample: alpha must lie in (0, pi/2)");
  }
  const auto dim = static_cast<Eigen::Index>(d);
  std::vector<Vector> arms;
  for (Eigen::Index i = 0; i < dim; ++i) arms.push_back(Vector::Unit(dim, i));
  Vector extra = Vector::Zero(dim);
  extra[0] = std::cos(alpha);
  extra[1] = std::sin(alpha);
  arms.push_back(extra);
  Vector theta = Vector::Unit(dim, 0);
  std::ostringstream label;
  label << "counterexample-d" << d << "-a" << format_double(alpha);
  const double M = policy.resolve(theta);
  return Instance{ProblemSpec::bounded_bai(ArmSet(std::move(arms)), M), theta, 1.0, label.str()};
}

Instance make_sphere_instance(std::size_t d, std::size_t n_arms, std::uint64_t seed,
                              const MPolicy& policy, std::size_t* resamples) {
  if (d < 1 || n_arms < 2) throw ConfigError("sphere: need d >= 1 and at least two arms");
  if (n_arms <= d) std::cerr << "warning: sphere instance with n_arms <= d\n";
  const auto dim = static_cast<Eigen::Index>(d);
  NoiseStream rng(seed);
  std::size_t redraws = 0;
  for (;;) {
    std::vector<Vector> arms;
    for (std::size_t k = 0; k < n_arms; ++k) {
      Vector v(dim);
      for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.standard_normal();
      arms.push_back(v / v.norm());
    }
    std::size_t ia = 0;
    std::size_t ib = 1;
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_arms; ++i) {
      for (std::size_t j = i + 1; j < n_arms; ++j) {
        const double dist = (arms[i] - arms[j]).norm();
        if (dist < closest) {
          closest = dist;
          ia = i;
          ib = j;
        }
      }
    }
    bool spans = true;
    try {
      ArmSet probe(arms);
    } catch (const PreconditionError&) {
      spans = false;
    }
    if (closest < 1e-9 || !spans) {
      ++redraws;
      continue;
    }
    Vector theta = arms[ia] + 0.01 * (arms[ib] - arms[ia]);
    if (resamples) *resamples = redraws;
    std::ostringstream label;
    label << "sphere-d" << d << "-A" << n_arms << "-s" << seed;
    const double M = policy.resolve(theta);
    return Instance{ProblemSpec::bounded_bai(ArmSet(std::move(arms)), M), theta, 1.0, label.str()};
  }
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["label"] = inst.label;
  j["kind"] = std::string(to_string(inst.spec.kind));
  Json arms = Json::array();
  for (const auto& a : inst.spec.arms.arms()) arms.push_back(vector_to_json(a));
  j["arms"] = arms;
  j["theta"] = vector_to_json(inst.theta);
  if (inst.spec.M) j["M"] = *inst.spec.M;
  if (is_threshold_kind(inst.spec.kind)) j["iota"] = inst.spec.iota;
  if (is_transductive(inst.spec.kind)) {
    Json targets = Json::array();
    for (const auto& b : inst.spec.targets) targets.push_back(vector_to_json(b));
    j["targets"] = targets;
  }
  j["noise_sd"] = inst.noise_sd;
  return j;
}

Instance instance_from_json(const Json& j, const MPolicy& policy) {
  if (!j.is_object()) throw ConfigError("instance: expected a JSON object");
  const std::string label = j.value("label", std::string("instance"));
  const std::string where = "instance '" + label + "'";
  const ProblemKind kind = problem_kind_from_string(required<std::string>(j, "kind", where));
  if (!j.contains("arms")) throw ConfigError(where + ": missing field 'arms'");
  if (!j.contains("theta")) throw ConfigError(where + ": missing field 'theta'");
  std::vector<Vector> arm_vectors = vectors_from_json(j["arms"], where + ".arms");
  Vector theta = vector_from_json(j["theta"], where + ".theta");
  std::optional<double> M;
  if (j.contains("M")) {
    if (!j["M"].is_number()) throw ConfigError(where + ": field 'M' has the wrong type");
    M = j["M"].get<double>();
  } else {
    M = policy.resolve(theta);
  }
  const double iota = is_threshold_kind(kind) ? required<double>(j, "iota", where) : 0.0;
  std::vector<Vector> targets;
  if (is_transductive(kind)) {
    if (!j.contains("targets")) throw ConfigError(where + ": missing field 'targets'");
    targets = vectors_from_json(j["targets"], where + ".targets");
  }
  try {
    ArmSet arms(std::move(arm_vectors));
    ProblemSpec spec{kind, std::move(arms), M, iota, std::move(targets)};
    spec.validate();
    Instance inst{std::move(spec), std::move(theta), j.value("noise_sd", 1.0), label};
    inst.validate();
    return inst;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON syntax error");
  }
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

void BenchConfig::validate() const {
  if (instances.empty()) throw ConfigError("config: no instances");
  if (algorithms.empty()) throw ConfigError("config: no algorithms");
  if (deltas.empty()) throw ConfigError("config: no deltas");
  if (n_reps < 1) throw ConfigError("config: n_reps must be >= 1");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (params.max_steps < 1) throw ConfigError("config: max_steps must be >= 1");
  if (!(params.alpha_explore > 2.0)) throw ConfigError("config: alpha_explore must exceed 2");
  if (params.eta_mode == EtaMode::kValue && !(params.eta > 0.0)) {
    throw ConfigError("config: eta must be positive");
  }
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw ConfigError("config: deltas must lie in (0,1)");
  }
  for (const auto& a : algorithms) canonical_sampler_name(a);
  for (const auto& inst : instances) {
    for (const auto& a : algorithms) {
      if (canonical_sampler_name(a) == "lingape" && !is_bai_kind(inst.spec.kind)) {
        throw ConfigError("lingape cannot run on instance '" + inst.label + "'");
      }
    }
  }
}

ReplicateJob BenchConfig::job() const {
  ReplicateJob job;
  job.instances = instances;
  for (const auto& a : algorithms) job.algorithms.push_back(canonical_sampler_name(a));
  job.deltas = deltas;
  job.n_reps = n_reps;
  job.master_seed = master_seed;
  job.workers = workers;
  job.params = params;
  return job;
}

BenchConfig parse_bench_config(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  BenchConfig cfg;
  const MPolicy policy = MPolicy::parse(j.value("m_policy", Json("2x")));

  if (!j.contains("instances") || !j["instances"].is_array()) {
    throw ConfigError("config: 'instances' must be an array");
  }
  for (const auto& item : j["instances"]) {
    Instance inst = [&]() -> Instance {
      if (item.contains("generator")) {
        const auto gen = required<std::string>(item, "generator", "instance generator");
        if (gen == "counterexample") {
          return make_counterexample(item.value("d", std::size_t{2}),
                                     required<double>(item, "alpha", "counterexample"), policy);
        }
        if (gen == "sphere") {
          return make_sphere_instance(required<std::size_t>(item, "d", "sphere"),
                                      item.value("n_arms", std::size_t{20}),
                                      item.value("seed", std::uint64_t{0}), policy);
        }
        throw ConfigError("unknown instance generator '" + gen + "'");
      }
      if (item.contains("file")) {
        std::filesystem::path p = required<std::string>(item, "file", "instance");
        if (p.is_relative()) p = base_dir / p;
        return instance_from_json(load_json_file(p), policy);
      }
      return instance_from_json(item, policy);
    }();
    if (item.contains("label") && item.contains("generator")) inst.label = item["label"].get<std::string>();
    cfg.instances.push_back(std::move(inst));
  }

  if (!j.contains("algorithms") || !j["algorithms"].is_array()) {
    throw ConfigError("config: 'algorithms' must be an array of sampler names");
  }
  cfg.algorithms = j["algorithms"].get<std::vector<std::string>>();
  if (!j.contains("deltas") || !j["deltas"].is_array()) throw ConfigError("config: 'deltas' must be an array");
  cfg.deltas = j["deltas"].get<std::vector<double>>();
  if (j.contains("n_reps")) {
    if (!j["n_reps"].is_number_integer() || j["n_reps"].get<long long>() < 0) {
      throw ConfigError("config: n_reps must be a nonnegative integer");
    }
    cfg.n_reps = j["n_reps"].get<std::size_t>();
  }
  cfg.master_seed = j.value("master_seed", std::uint64_t{0});
  cfg.workers = j.value("workers", std::size_t{1});
  cfg.params.max_steps = j.value("max_steps", std::uint64_t{1'000'000});
  cfg.params.alpha_explore = j.value("alpha_explore", 3.0);
  cfg.params.design_iters = j.value("design_iters", std::size_t{10'000});
  cfg.params.record_wall_time = j.value("record_wall_time", false);
  if (j.contains("eta")) {
    if (j["eta"].is_string()) {
      if (j["eta"].get<std::string>() != "theorem") throw ConfigError("config: eta must be a number or \"theorem\"");
      cfg.params.eta_mode = EtaMode::kTheorem;
    } else {
      cfg.params.eta = j["eta"].get<double>();
    }
  }
  if (j.contains("output")) {
    const auto& out = j["output"];
    if (out.contains("csv")) cfg.csv_path = out["csv"].get<std::string>();
    if (out.contains("summary")) cfg.summary_path = out["summary"].get<std::string>();
  }
  return cfg;
}

std::vector<CsvRow> rows_from_traces(const std::vector<RunTrace>& traces) {
  std::vector<CsvRow> rows;
  rows.reserve(traces.size());
  for (const auto& t : traces) {
    rows.push_back({t.instance, t.algorithm, t.delta, t.seed, t.tau, t.answer.code, t.correct,
                    t.timed_out, t.wall_ms, t.counts});
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.instance << ',' << r.algorithm << ',' << format_double(r.delta) << ',' << r.seed << ','
       << r.tau << ',' << r.answer << ',' << (r.correct ? 1 : 0) << ',' << (r.timed_out ? 1 : 0)
       << ',' << format_double(r.wall_ms) << ',';
    for (std::size_t k = 0; k < r.counts.size(); ++k) os << (k ? ";" : "") << r.counts[k];
    os << '\n';
  }
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) return rows;
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("csv line 1: unexpected header");
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) {
      throw ConfigError("csv line " + std::to_string(lineno) + ": expected 10 fields, got " +
                        std::to_string(f.size()));
    }
    CsvRow r;
    r.instance = f[0];
    r.algorithm = f[1];
    r.delta = parse_number<double>(f[2], lineno, "delta");
    r.seed = parse_number<std::uint64_t>(f[3], lineno, "seed");
    r.tau = parse_number<std::uint64_t>(f[4], lineno, "tau");
    r.answer = parse_number<std::uint64_t>(f[5], lineno, "answer");
    r.correct = parse_bool(f[6], lineno, "correct");
    r.timed_out = parse_bool(f[7], lineno, "timed_out");
    r.wall_ms = parse_number<double>(f[8], lineno, "wall_ms");
    if (!f[9].empty()) {
      for (const auto& c : split(f[9], ';')) r.counts.push_back(parse_number<std::uint64_t>(c, lineno, "counts"));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

Json summarize(const std::vector<CsvRow>& rows) {
  struct Group {
    std::string instance;
    std::string algorithm;
    double delta;
    std::vector<const CsvRow*> rows;
  };
  std::vector<Group> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.instance == r.instance && g.algorithm == r.algorithm && g.delta == r.delta;
    });
    if (it == groups.end()) {
      groups.push_back({r.instance, r.algorithm, r.delta, {}});
      it = std::prev(groups.end());
    }
    it->rows.push_back(&r);
  }

  Json out;
  out["groups"] = Json::array();
  for (const auto& g : groups) {
    std::vector<double> taus;
    std::size_t errors = 0;
    std::size_t timeouts = 0;
    std::vector<double> count_sums;
    for (const CsvRow* r : g.rows) {
      if (r->timed_out) {
        ++timeouts;
        continue;
      }
      taus.push_back(static_cast<double>(r->tau));
      if (!r->correct) ++errors;
      if (count_sums.size() < r->counts.size()) count_sums.resize(r->counts.size(), 0.0);
      for (std::size_t k = 0; k < r->counts.size(); ++k) count_sums[k] += static_cast<double>(r->counts[k]);
    }
    std::sort(taus.begin(), taus.end());
    const double finished = static_cast<double>(taus.size());
    double mean = std::nan("");
    if (!taus.empty()) {
      mean = 0.0;
      for (double t : taus) mean += t;
      mean /= finished;
    }
    Json mean_counts = Json::array();
    for (double s : count_sums) mean_counts.push_back(s / finished);
    Json entry;
    entry["instance"] = g.instance;
    entry["algorithm"] = g.algorithm;
    entry["delta"] = g.delta;
    entry["runs"] = g.rows.size();
    entry["finished"] = taus.size();
    entry["timeouts"] = timeouts;
    entry["errors"] = errors;
    entry["error_rate"] = taus.empty() ? Json(nullptr) : Json(static_cast<double>(errors) / finished);
    entry["mean_tau"] = nullable(mean);
    entry["median_tau"] = nullable(quantile(taus, 0.5));
    entry["q10_tau"] = nullable(quantile(taus, 0.1));
    entry["q90_tau"] = nullable(quantile(taus, 0.9));
    entry["mean_counts"] = mean_counts;
    out["groups"].push_back(entry);
  }
  return out;
}

Json report_to_json(const ComplexityReport& r, const std::string& label) {
  Json j;
  j["instance"] = label;
  j["dim"] = r.dim;
  j["delta"] = r.delta;
  j["delta_min"] = r.delta_min;
  j["solver"] = "saddle-frank-wolfe";
  j["solver_iters"] = r.solver_iters;
  j["complexities"] = {{"tstar", r.tstar},       {"ab_star", r.tstar / 2.0}, {"xy", r.xy_value},
                       {"g", r.g_value},         {"xy_chain", r.xy_chain},   {"g_chain", r.g_chain},
                       {"kw_chain", r.kw_chain}};
  j["weights"] = {{"ab_star", weights_to_json(r.w_abstar)},
                  {"xy", weights_to_json(r.w_xy)},
                  {"g", weights_to_json(r.w_g)}};
  j["lower_bound_time"] = {{"ab_star", r.tw_abstar}, {"xy", r.tw_xy}, {"g", r.tw_g}};
  return j;
}

std::string report_table(const ComplexityReport& r, const std::string& label) {
  std::ostringstream os;
  os << "instance " << label << "  (d=" << r.dim << ", delta=" << r.delta
     << ", delta_min=" << std::setprecision(8) << r.delta_min << ")\n";
  os << std::left << std::setw(8) << "arm" << std::setw(14) << "w*_ABstar" << std::setw(14) << "w*_XY"
     << std::setw(14) << "w*_G" << '\n';
  os << std::fixed << std::setprecision(6);
  for (std::size_t a = 0; a < r.w_abstar.size(); ++a) {
    os << std::setw(8) << ("a" + std::to_string(a + 1)) << std::setw(14) << r.w_abstar[a]
       << std::setw(14) << r.w_xy[a] << std::setw(14) << r.w_g[a] << '\n';
  }
  os << std::setprecision(2);
  os << std::setw(8) << "T_w" << std::setw(14) << r.tw_abstar << std::setw(14) << r.tw_xy
     << std::setw(14) << r.tw_g << '\n';
  os << std::setprecision(4);
  os << "T* = " << r.tstar << "   2XY/D^2 = " << r.xy_chain << "   8G/D^2 = " << r.g_chain
     << "   8d/D^2 = " << r.kw_chain << '\n';
  return os.str();
}

std::string summary_table(const Json& summary) {
  std::ostringstream os;
  os << std::left << std::setw(34) << "instance" << std::setw(14) << "algorithm" << std::setw(9)
     << "delta" << std::right << std::setw(7) << "runs" << std::setw(12) << "mean_tau" << std::setw(12)
     << "median" << std::setw(10) << "errors" << std::setw(10) << "timeouts" << '\n';
  for (const auto& g : summary["groups"]) {
    os << std::left << std::setw(34) << g["instance"].get<std::string>() << std::setw(14)
       << g["algorithm"].get<std::string>() << std::setw(9) << format_double(g["delta"].get<double>())
       << std::right << std::setw(7) << g["runs"].get<std::size_t>() << std::fixed
       << std::setprecision(1) << std::setw(12)
       << (g["mean_tau"].is_null() ? std::nan("") : g["mean_tau"].get<double>()) << std::setw(12)
       << (g["median_tau"].is_null() ? std::nan("") : g["median_tau"].get<double>()) << std::setw(10)
       << g["errors"].get<std::size_t>() << std::setw(10) << g["timeouts"].get<std::size_t>() << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace linbai

#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace gtdm {

void ExperimentConfig::validate() const {
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (n_episodes < 0) throw ConfigError("n_episodes must be >= 0");
  if (algorithms.empty()) throw ConfigError("experiment has no algorithms");
  if (max_episode_steps < 1 || iid_steps_per_episode < 1)
    throw ConfigError("episode step counts must be positive");
  for (const auto& spec : algorithms) {
    spec.schedule.validate();
    const bool momentum = spec.form != Form::vanilla;
    if (momentum != (spec.schedule.regime != Regime::vanilla))
      throw ConfigError("algorithm '" + spec.label + "': form/regime mismatch");
  }
}

std::string ExperimentConfig::resolved_text() const { return serialize_config(*this); }

void CurveSet::recompute_aggregates() {
  const int n_algos = n_algorithms();
  mean.assign(n_algos, {});
  stderr_.assign(n_algos, {});
  for (int a = 0; a < n_algos; ++a) {
    const auto& runs = rmspbe[a];
    const int episodes = runs.empty() ? 0 : static_cast<int>(runs[0].size());
    mean[a].assign(episodes, 0.0);
    stderr_[a].assign(episodes, 0.0);
    const int n = static_cast<int>(runs.size());
    for (int e = 0; e < episodes; ++e) {
      double m = 0.0;
      for (const auto& run : runs) m += run[e];
      m /= n;
      double var = 0.0;
      for (const auto& run : runs) var += (run[e] - m) * (run[e] - m);
      var = n > 1 ? var / (n - 1) : 0.0;
      mean[a][e] = m;
      stderr_[a][e] = std::sqrt(var / n);
    }
  }
}

namespace {

// One run of one algorithm: a fresh zero-initialized learner fed by the
// run's own generator, with RMSPBE recorded at every episode boundary.
std::vector<double> single_run(const ExperimentConfig& cfg, const Environment& env,
                               const ModelMatrices& model, const AlgorithmSpec& spec,
                               int run_index) {
  Rng rng(cfg.base_seed + static_cast<std::uint64_t>(run_index));
  Learner learner(spec.algo, spec.form, spec.schedule, env.features.dim(),
                  env.mdp.gamma, spec.theta0, spec.u0);
  IidSampler iid(env, model.d_pi);

  std::vector<double> curve;
  curve.reserve(cfg.n_episodes);
  try {
    for (int episode = 0; episode < cfg.n_episodes; ++episode) {
      if (cfg.mode == SamplingMode::episodic) {
        const Episode ep = sample_episode(env, rng, cfg.max_episode_steps);
        for (const Transition& tr : ep.steps) learner.step(tr);
      } else {
        for (long i = 0; i < cfg.iid_steps_per_episode; ++i)
          learner.step(iid.sample(rng));
      }
      curve.push_back(model.rmspbe(learner.theta()));
    }
  } catch (const DivergenceError& e) {
    throw DivergenceError("algorithm '" + spec.label + "' diverged in run " +
                              std::to_string(run_index),
                          e.step());
  }
  return curve;
}

}  // namespace

CurveSet run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const Environment env = make_environment(cfg.env_spec);
  const ModelMatrices model = compute_model(env);

  CurveSet out;
  out.initial_rmspbe = model.rmspbe(Vector::Zero(env.features.dim()));
  out.labels.reserve(cfg.algorithms.size());
  for (const auto& spec : cfg.algorithms) out.labels.push_back(spec.label);
  out.rmspbe.assign(cfg.algorithms.size(),
                    std::vector<std::vector<double>>(cfg.n_runs));

  // Runs are independent; slots are preassigned so the reduction order (and
  // therefore every emitted byte) does not depend on the worker count. The
  // error path is deterministic too: the lowest-index failing run wins.
  std::exception_ptr failure;
  int failed_run = cfg.n_runs;
  std::mutex failure_mutex;
  const int workers = std::max(1, jobs);
  std::atomic<int> next_run{0};
  auto work = [&]() {
    for (;;) {
      const int run = next_run.fetch_add(1);
      if (run >= cfg.n_runs) return;
      try {
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a)
          out.rmspbe[a][run] = single_run(cfg, env, model, cfg.algorithms[a], run);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (run < failed_run) {
          failed_run = run;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  out.recompute_aggregates();
  return out;
}

double curve_auc(const CurveSet& curves, int algo_idx, int first_k) {
  const auto& m = curves.mean.at(algo_idx);
  const int k = std::min<int>(first_k, static_cast<int>(m.size()));
  double sum = 0.0;
  for (int e = 0; e < k; ++e) sum += m[e];
  return sum;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shortest decimal that parses back to exactly v, for readable config text.
std::string shortest(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void export_curves(const CurveSet& curves, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(std::filesystem::path(dir) / "curves.csv");
    out << "algorithm,run,episode,rmspbe\n";
    for (int a = 0; a < curves.n_algorithms(); ++a)
      for (std::size_t run = 0; run < curves.rmspbe[a].size(); ++run)
        for (std::size_t e = 0; e < curves.rmspbe[a][run].size(); ++e)
          out << curves.labels[a] << ',' << run << ',' << e + 1 << ','
              << g17(curves.rmspbe[a][run][e]) << '\n';
  }
  {
    auto out = open_out(std::filesystem::path(dir) / "aggregate.csv");
    out << "algorithm,episode,mean,stderr\n";
    for (int a = 0; a < curves.n_algorithms(); ++a)
      for (std::size_t e = 0; e < curves.mean[a].size(); ++e)
        out << curves.labels[a] << ',' << e + 1 << ',' << g17(curves.mean[a][e])
            << ',' << g17(curves.stderr_[a][e]) << '\n';
  }
}

CurveSet import_curves(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "curves.csv");
  if (!in) throw IoError("cannot open curves.csv under '" + dir + "'");
  std::string line;
  std::getline(in, line);
  if (line != "algorithm,run,episode,rmspbe")
    throw IoError("unexpected curves.csv header: " + line);

  CurveSet out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string label, field;
    std::getline(row, label, ',');
    std::getline(row, field, ',');
    const int run = std::stoi(field);
    std::getline(row, field, ',');
    std::getline(row, field, ',');
    const double value = std::stod(field);

    auto it = std::find(out.labels.begin(), out.labels.end(), label);
    int a;
    if (it == out.labels.end()) {
      out.labels.push_back(label);
      out.rmspbe.emplace_back();
      a = static_cast<int>(out.labels.size()) - 1;
    } else {
      a = static_cast<int>(it - out.labels.begin());
    }
    if (static_cast<int>(out.rmspbe[a].size()) <= run) out.rmspbe[a].resize(run + 1);
    out.rmspbe[a][run].push_back(value);
  }
  out.recompute_aggregates();
  return out;
}

std::string ComparisonReport::to_text() const {
  std::ostringstream os;
  os << "preset label auc_first_k final_mean\n";
  for (const auto& row : rows)
    os << row.preset << ' ' << row.label << ' ' << g17(row.auc) << ' '
       << g17(row.final_mean) << '\n';
  return os.str();
}

ComparisonReport compare_presets(const std::string& env_prefix, int n_runs,
                                 int n_episodes, int first_k, std::uint64_t base_seed,
                                 int jobs) {
  ComparisonReport report;
  for (const char* regime : {"vanilla", "one_ts", "three_ts"}) {
    const std::string name = env_prefix + "_" + regime;
    ExperimentConfig cfg = preset(name);
    cfg.n_runs = n_runs;
    cfg.n_episodes = n_episodes;
    cfg.base_seed = base_seed;
    const CurveSet curves = run_experiment(cfg, jobs);
    for (int a = 0; a < curves.n_algorithms(); ++a)
      report.rows.push_back({name, curves.labels[a], curve_auc(curves, a, first_k),
                             curves.mean[a].empty() ? 0.0 : curves.mean[a].back()});
  }
  return report;
}

namespace {

struct PresetRow {
  const char* env_prefix;
  const char* env_spec;
  double alpha, beta, rho_one, rho_three, w_three;
  long max_episode_steps;
};

// Step-size exponent table per environment: alpha/beta for vanilla, the
// one_ts row uses rho = alpha/2 with w = 1, the three_ts row the listed rho
// with w. The random MDP never terminates, so its episodes are fixed
// 100-step segments.
constexpr PresetRow kPresetTable[] = {
    {"boyan", "boyan14", 0.25, 0.125, 0.125, 0.2, 0.1, 1000000},
    {"rw5", "rw5", 0.25, 0.125, 0.125, 0.2, 0.1, 1000000},
    {"rw19", "rw19", 0.125, 0.0625, 0.0625, 0.1, 0.1, 1000000},
    {"randmdp", "randmdp(0,20,5)", 0.5, 0.25, 0.25, 0.3, 0.1, 100},
};

ExperimentConfig preset_from_row(const PresetRow& row, const std::string& regime) {
  ExperimentConfig cfg;
  cfg.env_spec = row.env_spec;
  cfg.n_runs = 100;
  cfg.n_episodes = 200;
  cfg.base_seed = 0;
  cfg.mode = SamplingMode::episodic;
  cfg.max_episode_steps = row.max_episode_steps;

  for (Algo algo : {Algo::gtd, Algo::gtd2, Algo::tdc}) {
    AlgorithmSpec spec;
    spec.algo = algo;
    ScheduleSpec sched;
    sched.alpha_exp = row.alpha;
    sched.beta_exp = row.beta;
    if (regime == "vanilla") {
      spec.form = Form::vanilla;
      sched.regime = Regime::vanilla;
      spec.label = to_string(algo);
    } else if (regime == "one_ts") {
      spec.form = Form::two_form;
      sched.regime = Regime::one_ts;
      sched.rho_exp = row.rho_one;
      sched.w = 1.0;
      spec.label = to_string(algo) + "-m";
    } else {
      spec.form = Form::two_form;
      sched.regime = Regime::three_ts;
      sched.rho_exp = row.rho_three;
      sched.w = row.w_three;
      spec.label = to_string(algo) + "-m";
    }
    spec.schedule = sched;
    cfg.algorithms.push_back(std::move(spec));
  }
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& row : kPresetTable)
    for (const char* regime : {"vanilla", "one_ts", "three_ts"})
      names.push_back(std::string(row.env_prefix) + "_" + regime);
  return names;
}

ExperimentConfig preset(const std::string& name) {
  for (const auto& row : kPresetTable)
    for (const char* regime : {"vanilla", "one_ts", "three_ts"})
      if (name == std::string(row.env_prefix) + "_" + regime)
        return preset_from_row(row, regime);
  std::ostringstream os;
  os << "unknown preset '" << name << "'; valid presets:";
  for (const auto& n : preset_names()) os << ' ' << n;
  throw ConfigError(os.str());
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

Vector parse_vector(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  Vector out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) out[i] = vals[i];
  return out;
}

std::string vector_text(const Vector& v) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << g17(v[i]);
  return os.str();
}

void apply_experiment_key(ExperimentConfig& cfg, const std::string& key,
                          const std::string& value) {
  try {
    if (key == "env") cfg.env_spec = value;
    else if (key == "runs") cfg.n_runs = std::stoi(value);
    else if (key == "episodes") cfg.n_episodes = std::stoi(value);
    else if (key == "seed") cfg.base_seed = std::stoull(value);
    else if (key == "mode") {
      if (value == "episodic") cfg.mode = SamplingMode::episodic;
      else if (value == "iid") cfg.mode = SamplingMode::iid;
      else throw ConfigError("mode must be 'episodic' or 'iid'");
    } else if (key == "max_episode_steps") cfg.max_episode_steps = std::stol(value);
    else if (key == "iid_steps_per_episode") cfg.iid_steps_per_episode = std::stol(value);
    else if (key == "out") cfg.out_dir = value;
    else throw ConfigError("unknown experiment key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  }
}

void apply_algorithm_key(AlgorithmSpec& spec, const std::string& key,
                         const std::string& value) {
  try {
    if (key == "name") spec.label = value;
    else if (key == "algo") spec.algo = algo_from_string(value);
    else if (key == "form") spec.form = form_from_string(value);
    else if (key == "regime") spec.schedule.regime = regime_from_string(value);
    else if (key == "alpha") spec.schedule.alpha_exp = std::stod(value);
    else if (key == "beta") spec.schedule.beta_exp = std::stod(value);
    else if (key == "rho") spec.schedule.rho_exp = std::stod(value);
    else if (key == "w") spec.schedule.w = std::stod(value);
    else if (key == "c1") spec.schedule.c1 = std::stod(value);
    else if (key == "c2") spec.schedule.c2 = std::stod(value);
    else if (key == "theta0") spec.theta0 = parse_vector(value);
    else if (key == "u0") spec.u0 = parse_vector(value);
    else throw ConfigError("unknown algorithm key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.algorithms.clear();
  AlgorithmSpec* current = nullptr;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[algorithm]")
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section " + line);
      cfg.algorithms.emplace_back();
      current = &cfg.algorithms.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (current)
      apply_algorithm_key(*current, key, value);
    else
      apply_experiment_key(cfg, key, value);
  }
  for (auto& spec : cfg.algorithms) {
    if (spec.label.empty())
      spec.label = to_string(spec.algo) + (spec.form == Form::vanilla ? "" : "-m");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "env = " << cfg.env_spec << "\n";
  os << "runs = " << cfg.n_runs << "\n";
  os << "episodes = " << cfg.n_episodes << "\n";
  os << "seed = " << cfg.base_seed << "\n";
  os << "mode = " << (cfg.mode == SamplingMode::episodic ? "episodic" : "iid") << "\n";
  os << "max_episode_steps = " << cfg.max_episode_steps << "\n";
  os << "iid_steps_per_episode = " << cfg.iid_steps_per_episode << "\n";
  if (!cfg.out_dir.empty()) os << "out = " << cfg.out_dir << "\n";
  for (const auto& spec : cfg.algorithms) {
    os << "\n[algorithm]\n";
    os << "name = " << spec.label << "\n";
    os << "algo = " << to_string(spec.algo) << "\n";
    os << "form = " << to_string(spec.form) << "\n";
    os << "regime = " << to_string(spec.schedule.regime) << "\n";
    os << "alpha = " << shortest(spec.schedule.alpha_exp) << "\n";
    os << "beta = " << shortest(spec.schedule.beta_exp) << "\n";
    if (spec.schedule.regime != Regime::vanilla) {
      os << "rho = " << shortest(spec.schedule.rho_exp) << "\n";
      os << "w = " << shortest(spec.schedule.w) << "\n";
    }
    if (spec.schedule.c1 != 1.0) os << "c1 = " << shortest(spec.schedule.c1) << "\n";
    if (spec.schedule.c2 != 1.0) os << "c2 = " << shortest(spec.schedule.c2) << "\n";
    if (spec.theta0.size()) os << "theta0 = " << vector_text(spec.theta0) << "\n";
    if (spec.u0.size()) os << "u0 = " << vector_text(spec.u0) << "\n";
  }
  return os.str();
}

}  // namespace gtdm

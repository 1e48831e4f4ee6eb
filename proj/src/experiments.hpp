#ifndef GTDM_EXPERIMENTS_HPP
#define GTDM_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "model.hpp"

namespace gtdm {

struct AlgorithmSpec {
  std::string label;  // row key in the emitted CSVs
  Algo algo = Algo::gtd;
  Form form = Form::vanilla;
  ScheduleSpec schedule;
  Vector theta0, u0;  // empty = zeros
};

enum class SamplingMode { episodic, iid };

// A full experiment: one environment, a list of learners, n_runs independent
// repetitions of n_episodes each. Run r uses seed base_seed + r, so per-run
// curves are independent of how many runs (or algorithms) share the
// experiment. The step counter advances per transition and persists across
// episode boundaries.
struct ExperimentConfig {
  std::string env_spec = "boyan14";
  std::vector<AlgorithmSpec> algorithms;
  int n_runs = 100;
  int n_episodes = 200;
  std::uint64_t base_seed = 0;
  SamplingMode mode = SamplingMode::episodic;
  long max_episode_steps = 1000000;   // episodic cap; hitting it truncates
  long iid_steps_per_episode = 100;   // segment length in iid mode
  std::string out_dir;

  void validate() const;
  std::string resolved_text() const;  // echoed before every run
};

// RMSPBE per (algorithm, run, episode) plus per-episode mean and standard
// error across runs.
struct CurveSet {
  std::vector<std::string> labels;
  // rmspbe[algo][run][episode], recorded after each episode.
  std::vector<std::vector<std::vector<double>>> rmspbe;
  std::vector<std::vector<double>> mean;     // [algo][episode]
  std::vector<std::vector<double>> stderr_;  // [algo][episode]
  double initial_rmspbe = 0.0;               // RMSPBE at theta = 0

  int n_algorithms() const { return static_cast<int>(labels.size()); }
  int n_runs() const { return rmspbe.empty() ? 0 : static_cast<int>(rmspbe[0].size()); }
  int n_episodes() const {
    return mean.empty() ? 0 : static_cast<int>(mean[0].size());
  }
  void recompute_aggregates();
};

// Runs the experiment; runs are distributed over `jobs` worker threads and
// reduced in run order, so the output is identical for any job count.
// Throws DivergenceError if any learner diverges (run and step in message).
CurveSet run_experiment(const ExperimentConfig& cfg, int jobs = 1);

// Area under the mean-RMSPBE curve over the first `first_k` episodes
// (clamped to the curve length).
double curve_auc(const CurveSet& curves, int algo_idx, int first_k);

// CSV export: `<prefix>curves.csv` with header algorithm,run,episode,rmspbe
// and `<prefix>aggregate.csv` with algorithm,episode,mean,stderr. Numbers
// carry 17 significant digits so a re-import reproduces them exactly.
void export_curves(const CurveSet& curves, const std::string& dir);
CurveSet import_curves(const std::string& dir);

// Vanilla vs. momentum comparison on the named presets of one environment:
// initial-phase AUC (first `first_k` episodes of the mean curve) per
// algorithm and regime.
struct ComparisonRow {
  std::string preset;
  std::string label;
  double auc = 0.0;
  double final_mean = 0.0;
};
struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::string to_text() const;
};
ComparisonReport compare_presets(const std::string& env_prefix, int n_runs,
                                 int n_episodes, int first_k, std::uint64_t base_seed,
                                 int jobs = 1);

// Table-driven presets: {boyan,rw5,rw19,randmdp}_{vanilla,one_ts,three_ts}.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// Plain-text config format (key = value with repeatable [algorithm]
// sections); parse/serialize round-trip.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace gtdm

#endif

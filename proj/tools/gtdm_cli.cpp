// Command-line front end for the gtdm shared library. Everything goes
// through the public C interface.
#include <gtdm/gtdm.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(gtdm_status status) {
  switch (status) {
    case GTDM_OK: return kExitOk;
    case GTDM_ERR_NUMERICAL:
    case GTDM_ERR_DIVERGED: return kExitNumerical;
    default: return kExitConfig;
  }
}

// Prints the library error and translates the status into an exit code.
int bail(const char* what, gtdm_status status) {
  std::cerr << "gtdm: " << what << ": " << gtdm_last_error() << "\n";
  return exit_code(status);
}

struct ExperimentPtr {
  gtdm_experiment* ptr = nullptr;
  ~ExperimentPtr() { gtdm_experiment_free(ptr); }
};

struct EnvPtr {
  gtdm_env* ptr = nullptr;
  ~EnvPtr() { gtdm_env_close(ptr); }
};

struct ModelPtr {
  gtdm_model* ptr = nullptr;
  ~ModelPtr() { gtdm_model_free(ptr); }
};

// Flags shared by `run`.
struct RunOptions {
  std::string preset, config, env, algo, form, regime, out;
  std::optional<double> alpha, beta, rho, w;
  std::optional<int> runs, episodes;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--preset", opt.preset, "Named preset (see list-presets)");
  cmd->add_option("--config", opt.config, "Experiment config file");
  cmd->add_option("--env", opt.env,
                  "Environment: boyan14, rw5, rw19, randmdp(seed,n,k)");
  cmd->add_option("--algo", opt.algo, "Algorithm: gtd, gtd2 or tdc");
  cmd->add_option("--form", opt.form, "Learner form: vanilla, two_form, three_form");
  cmd->add_option("--regime", opt.regime, "Schedule regime: vanilla, one_ts, three_ts");
  cmd->add_option("--alpha", opt.alpha, "Step exponent alpha");
  cmd->add_option("--beta", opt.beta, "Step exponent beta");
  cmd->add_option("--rho", opt.rho, "Step exponent rho (momentum regimes)");
  cmd->add_option("--w", opt.w, "Momentum constant w");
  cmd->add_option("--runs", opt.runs, "Independent runs");
  cmd->add_option("--episodes", opt.episodes, "Episodes per run");
  cmd->add_option("--seed", opt.seed, "Base seed (run r uses seed + r)");
  cmd->add_option("--jobs", opt.jobs, "Worker threads");
  cmd->add_option("--out", opt.out,
                  "Output directory (default $GTDM_OUT_DIR or ./gtdm_out)");
}

std::string default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("GTDM_OUT_DIR"); env && *env) return env;
  return "gtdm_out";
}

int apply_overrides(gtdm_experiment* exp, const RunOptions& opt) {
  auto set = [&](const char* key, const std::string& value) -> std::optional<int> {
    const gtdm_status rc = gtdm_experiment_set(exp, key, value.c_str());
    if (rc != GTDM_OK) return bail("bad override", rc);
    return std::nullopt;
  };
  if (!opt.env.empty())
    if (auto rc = set("env", opt.env)) return *rc;
  if (opt.runs)
    if (auto rc = set("runs", std::to_string(*opt.runs))) return *rc;
  if (opt.episodes)
    if (auto rc = set("episodes", std::to_string(*opt.episodes))) return *rc;
  if (opt.seed)
    if (auto rc = set("seed", std::to_string(*opt.seed))) return *rc;

  if (!opt.algo.empty()) {
    // An explicit --algo replaces the algorithm list with a single learner.
    const std::string regime = opt.regime.empty() ? "vanilla" : opt.regime;
    const std::string form =
        !opt.form.empty() ? opt.form : (regime == "vanilla" ? "vanilla" : "two_form");
    gtdm_learner_config config{};
    config.algo = opt.algo.c_str();
    config.form = form.c_str();
    config.regime = regime.c_str();
    config.alpha = opt.alpha.value_or(0.25);
    config.beta = opt.beta.value_or(0.125);
    config.rho = opt.rho.value_or(0.0);
    config.w = opt.w.value_or(0.0);
    const gtdm_status rc = gtdm_experiment_set_algorithm(exp, &config);
    if (rc != GTDM_OK) return bail("bad algorithm flags", rc);
  } else if (!opt.form.empty() || !opt.regime.empty() || opt.alpha || opt.beta ||
             opt.rho || opt.w) {
    std::cerr << "gtdm: --form/--regime/--alpha/--beta/--rho/--w need --algo\n";
    return kExitConfig;
  }
  return kExitOk;
}

int make_experiment(const RunOptions& opt, ExperimentPtr& exp) {
  gtdm_status rc;
  if (!opt.preset.empty() && !opt.config.empty()) {
    std::cerr << "gtdm: --preset and --config are mutually exclusive\n";
    return kExitConfig;
  }
  if (!opt.preset.empty())
    rc = gtdm_experiment_from_preset(opt.preset.c_str(), &exp.ptr);
  else if (!opt.config.empty())
    rc = gtdm_experiment_from_file(opt.config.c_str(), &exp.ptr);
  else if (!opt.algo.empty() && !opt.env.empty())
    rc = gtdm_experiment_from_preset("rw5_vanilla", &exp.ptr);  // base; flags replace it
  else {
    std::cerr << "gtdm: need --preset, --config, or --env with --algo\n";
    return kExitConfig;
  }
  if (rc != GTDM_OK) return bail("cannot build experiment", rc);
  return apply_overrides(exp.ptr, opt);
}

int cmd_run(const RunOptions& opt) {
  ExperimentPtr exp;
  if (int rc = make_experiment(opt, exp); rc != kExitOk) return rc;

  char resolved[16384];
  if (gtdm_status rc = gtdm_experiment_resolved(exp.ptr, resolved, sizeof(resolved));
      rc != GTDM_OK)
    return bail("resolved config", rc);
  const std::string out_dir = default_out_dir(opt.out);
  std::cout << "# resolved configuration\n" << resolved << "out = " << out_dir
            << "\njobs = " << opt.jobs << "\n\n";

  if (gtdm_status rc = gtdm_experiment_run(exp.ptr, opt.jobs); rc != GTDM_OK)
    return bail("run failed", rc);
  if (gtdm_status rc = gtdm_experiment_export(exp.ptr, out_dir.c_str()); rc != GTDM_OK)
    return bail("export failed", rc);

  std::cout << "final mean rmspbe per algorithm:\n";
  for (int i = 0; i < gtdm_experiment_num_algorithms(exp.ptr); ++i) {
    char label[128];
    double final_mean = 0.0;
    gtdm_experiment_label(exp.ptr, i, label, sizeof(label));
    gtdm_experiment_final_mean(exp.ptr, i, &final_mean);
    std::printf("  %-10s %.6g\n", label, final_mean);
  }
  std::cout << "wrote " << out_dir << "/curves.csv and " << out_dir
            << "/aggregate.csv\n";
  return kExitOk;
}

int cmd_compare(const std::string& env_prefix, int runs, int episodes, int first_k,
                std::uint64_t seed, int jobs) {
  std::printf("# %s: AUC of mean RMSPBE over first %d episodes (seed %llu, %d runs)\n",
              env_prefix.c_str(), first_k, static_cast<unsigned long long>(seed),
              runs);
  std::printf("%-22s %-10s %-14s %s\n", "preset", "algorithm", "auc", "final_mean");
  for (const char* regime : {"vanilla", "one_ts", "three_ts"}) {
    const std::string preset = env_prefix + "_" + regime;
    ExperimentPtr exp;
    gtdm_status rc = gtdm_experiment_from_preset(preset.c_str(), &exp.ptr);
    if (rc != GTDM_OK) return bail("unknown preset", rc);
    gtdm_experiment_set(exp.ptr, "runs", std::to_string(runs).c_str());
    gtdm_experiment_set(exp.ptr, "episodes", std::to_string(episodes).c_str());
    gtdm_experiment_set(exp.ptr, "seed", std::to_string(seed).c_str());
    rc = gtdm_experiment_run(exp.ptr, jobs);
    if (rc != GTDM_OK) {
      // A diverging preset becomes a report row, not a hard failure.
      std::printf("%-22s %-10s %-14s %s\n", preset.c_str(), "*", "diverged",
                  gtdm_last_error());
      continue;
    }
    for (int i = 0; i < gtdm_experiment_num_algorithms(exp.ptr); ++i) {
      char label[128];
      double auc = 0.0, final_mean = 0.0;
      gtdm_experiment_label(exp.ptr, i, label, sizeof(label));
      gtdm_experiment_auc(exp.ptr, i, first_k, &auc);
      gtdm_experiment_final_mean(exp.ptr, i, &final_mean);
      std::printf("%-22s %-10s %-14.8g %.8g\n", preset.c_str(), label, auc,
                  final_mean);
    }
  }
  return kExitOk;
}

int cmd_verify_hurwitz(const std::string& env_spec, const std::string& matrix_file,
                       double w) {
  gtdm_hurwitz_report report{};
  gtdm_status rc;
  if (!env_spec.empty()) {
    EnvPtr env;
    rc = gtdm_env_open(env_spec.c_str(), &env.ptr);
    if (rc != GTDM_OK) return bail("environment", rc);
    rc = gtdm_verify_hurwitz_env(env.ptr, w, &report);
    if (rc != GTDM_OK) return bail("verification failed", rc);
  } else {
    std::ifstream in(matrix_file);
    if (!in) {
      std::cerr << "gtdm: cannot read matrix file '" << matrix_file << "'\n";
      return kExitConfig;
    }
    int dim = 0;
    in >> dim;
    if (dim <= 0) {
      std::cerr << "gtdm: matrix file must start with the dimension\n";
      return kExitConfig;
    }
    std::vector<double> a(static_cast<std::size_t>(dim) * dim);
    for (auto& value : a)
      if (!(in >> value)) {
        std::cerr << "gtdm: matrix file ended early\n";
        return kExitConfig;
      }
    rc = gtdm_verify_hurwitz_matrix(a.data(), dim, w, &report);
    if (rc != GTDM_OK) return bail("verification failed", rc);
  }

  std::printf("||A||^2            = %.12g\n", report.a_norm_sq);
  std::printf("w(w+1)             = %.12g\n", report.w_w_plus_one);
  std::printf("sufficient (Routh) = %s\n", report.sufficient ? "true" : "false");
  std::printf("hurwitz (eigen)    = %s\n", report.hurwitz ? "true" : "false");
  std::printf("max real part      = %.12g\n", report.max_real_part);
  return kExitOk;
}

int cmd_check_conditions(const std::string& env_spec, const std::string& algo,
                         double w, double alpha, double beta, double rho) {
  EnvPtr env;
  gtdm_status rc = gtdm_env_open(env_spec.c_str(), &env.ptr);
  if (rc != GTDM_OK) return bail("environment", rc);
  char buf[16384];
  int all_pass = 0;
  rc = gtdm_check_conditions(env.ptr, algo.c_str(), w, alpha, beta, rho, buf,
                             sizeof(buf), &all_pass);
  if (rc != GTDM_OK) return bail("condition check failed", rc);
  std::cout << buf;
  std::cout << (all_pass ? "all conditions pass\n" : "conditions FAILED\n");
  return all_pass ? kExitOk : kExitNumerical;
}

int cmd_dump_model(const std::string& env_spec, const std::string& out,
                   bool mdp_dump) {
  EnvPtr env;
  gtdm_status rc = gtdm_env_open(env_spec.c_str(), &env.ptr);
  if (rc != GTDM_OK) return bail("environment", rc);
  const std::string path = out == "-" ? "/dev/stdout" : out;
  if (mdp_dump) {
    rc = gtdm_env_dump(env.ptr, path.c_str());
    if (rc != GTDM_OK) return bail("dump failed", rc);
    return kExitOk;
  }
  ModelPtr model;
  rc = gtdm_model_compute(env.ptr, &model.ptr);
  if (rc != GTDM_OK) return bail("model computation failed", rc);
  rc = gtdm_model_dump(model.ptr, path.c_str());
  if (rc != GTDM_OK) return bail("dump failed", rc);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gtdm — gradient TD policy evaluation with heavy-ball momentum"};
  app.name("gtdm");
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(gtdm_version()); });

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run an experiment and export CSV curves");
  add_common_flags(run, run_opt);

  std::string cmp_env = "boyan";
  int cmp_runs = 100, cmp_episodes = 200, cmp_k = 100, cmp_jobs = 1;
  std::uint64_t cmp_seed = 0;
  CLI::App* compare = app.add_subcommand(
      "compare", "Compare vanilla / one_ts / three_ts presets on one environment");
  compare->add_option("--env", cmp_env, "Preset family: boyan, rw5, rw19, randmdp");
  compare->add_option("--runs", cmp_runs, "Independent runs");
  compare->add_option("--episodes", cmp_episodes, "Episodes per run");
  compare->add_option("--k", cmp_k, "Initial-phase episodes for the AUC");
  compare->add_option("--seed", cmp_seed, "Base seed");
  compare->add_option("--jobs", cmp_jobs, "Worker threads");

  std::string vh_env, vh_matrix;
  double vh_w = 1.0;
  CLI::App* verify = app.add_subcommand(
      "verify-hurwitz",
      "Check the stacked driving matrix for an environment or matrix file");
  verify->add_option("--env", vh_env, "Environment name");
  verify->add_option("--matrix", vh_matrix,
                     "Matrix file: dimension then row-major entries");
  verify->add_option("--w", vh_w, "Momentum constant")->required();

  std::string cc_env, cc_algo = "gtd";
  double cc_w = 0.1, cc_alpha = 0.25, cc_beta = 0.125, cc_rho = 0.2;
  CLI::App* check = app.add_subcommand(
      "check-conditions",
      "Verify the three-timescale conditions for a momentum learner");
  check->add_option("--env", cc_env, "Environment name")->required();
  check->add_option("--algo", cc_algo, "gtd, gtd2 or tdc");
  check->add_option("--w", cc_w, "Momentum constant");
  check->add_option("--alpha", cc_alpha, "Step exponent alpha");
  check->add_option("--beta", cc_beta, "Step exponent beta");
  check->add_option("--rho", cc_rho, "Step exponent rho");

  std::string dm_env, dm_out = "-";
  bool dm_mdp = false;
  CLI::App* dump = app.add_subcommand(
      "dump-model", "Write the exact model matrices (or the MDP kernel)");
  dump->add_option("--env", dm_env, "Environment name")->required();
  dump->add_option("--out", dm_out, "Output file ('-' for stdout)");
  dump->add_flag("--mdp", dm_mdp, "Dump the MDP kernel instead of the model");

  CLI::App* list = app.add_subcommand("list-presets", "List the bundled presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(run_opt);
  if (compare->parsed())
    return cmd_compare(cmp_env, cmp_runs, cmp_episodes, cmp_k, cmp_seed, cmp_jobs);
  if (verify->parsed()) {
    if (vh_env.empty() == vh_matrix.empty()) {
      std::cerr << "gtdm: verify-hurwitz needs exactly one of --env / --matrix\n";
      return kExitConfig;
    }
    return cmd_verify_hurwitz(vh_env, vh_matrix, vh_w);
  }
  if (check->parsed())
    return cmd_check_conditions(cc_env, cc_algo, cc_w, cc_alpha, cc_beta, cc_rho);
  if (dump->parsed()) return cmd_dump_model(dm_env, dm_out, dm_mdp);
  if (list->parsed()) {
    for (int i = 0; i < gtdm_preset_count(); ++i)
      std::cout << gtdm_preset_name(i) << "\n";
    return kExitOk;
  }
  return kExitConfig;
}

#include "gtdm/gtdm.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "experiments.hpp"
#include "sa_framework.hpp"

// Opaque handle definitions. Each wraps the corresponding core object; the
// experiment handle carries its curves once run.
struct gtdm_env {
  gtdm::Environment env;
};
struct gtdm_model {
  gtdm::ModelMatrices model;
};
struct gtdm_learner {
  gtdm::Learner learner;
};
struct gtdm_experiment {
  gtdm::ExperimentConfig config;
  std::optional<gtdm::CurveSet> curves;
};

namespace {

thread_local std::string g_last_error;

gtdm_status fail(gtdm_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Translate core exceptions to statuses; every API body runs inside this.
template <typename Fn>
gtdm_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const gtdm::DivergenceError& e) {
    return fail(GTDM_ERR_DIVERGED, e.what());
  } catch (const gtdm::NumericalError& e) {
    return fail(GTDM_ERR_NUMERICAL, e.what());
  } catch (const gtdm::ConfigError& e) {
    return fail(GTDM_ERR_CONFIG, e.what());
  } catch (const gtdm::IoError& e) {
    return fail(GTDM_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(GTDM_ERR_NUMERICAL, e.what());
  }
}

gtdm_status copy_string(const std::string& text, char* buf, size_t buflen) {
  if (!buf || buflen == 0) return fail(GTDM_ERR_INVALID_ARGUMENT, "null output buffer");
  const size_t n = std::min(buflen - 1, text.size());
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
  if (n < text.size())
    return fail(GTDM_ERR_INVALID_ARGUMENT,
                "output buffer too small (" + std::to_string(text.size() + 1) +
                    " bytes needed)");
  return GTDM_OK;
}

gtdm::Vector to_vector(const double* data, size_t len) {
  gtdm::Vector v(static_cast<Eigen::Index>(len));
  for (size_t i = 0; i < len; ++i) v[static_cast<Eigen::Index>(i)] = data[i];
  return v;
}

gtdm_status require(bool ok, const char* what) {
  return ok ? GTDM_OK : fail(GTDM_ERR_INVALID_ARGUMENT, what);
}

gtdm::ScheduleSpec schedule_from_config(const gtdm_learner_config& c) {
  gtdm::ScheduleSpec spec;
  spec.regime = gtdm::regime_from_string(c.regime ? c.regime : "");
  spec.alpha_exp = c.alpha;
  spec.beta_exp = c.beta;
  spec.rho_exp = c.rho;
  spec.w = c.w;
  return spec;
}

void fill_hurwitz_report(const gtdm::Matrix& a_bar, const gtdm::Vector& b_bar,
                         double w, gtdm_hurwitz_report* report) {
  const double norm = gtdm::spectral_norm(a_bar);
  report->a_norm_sq = norm * norm;
  report->w_w_plus_one = w * (w + 1.0);
  report->sufficient = gtdm::hurwitz_sufficient(a_bar, w) ? 1 : 0;
  const gtdm::StackedSystem sys = gtdm::build_stacked(a_bar, b_bar, w);
  const gtdm::HurwitzResult eig = gtdm::is_hurwitz_eig(sys.G);
  report->hurwitz = eig.hurwitz ? 1 : 0;
  report->max_real_part = eig.max_real_part;
}

}  // namespace

extern "C" {

const char* gtdm_version(void) { return "1.0.0"; }

const char* gtdm_status_name(gtdm_status status) {
  switch (status) {
    case GTDM_OK: return "ok";
    case GTDM_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case GTDM_ERR_CONFIG: return "config-error";
    case GTDM_ERR_NUMERICAL: return "numerical-error";
    case GTDM_ERR_DIVERGED: return "diverged";
    case GTDM_ERR_IO: return "io-error";
  }
  return "unknown";
}

const char* gtdm_last_error(void) { return g_last_error.c_str(); }

gtdm_status gtdm_env_open(const char* spec, gtdm_env** out) {
  if (auto rc = require(spec && out, "gtdm_env_open: null argument")) return rc;
  return guarded([&] {
    *out = new gtdm_env{gtdm::make_environment(spec)};
    return GTDM_OK;
  });
}

void gtdm_env_close(gtdm_env* env) { delete env; }

int gtdm_env_num_states(const gtdm_env* env) { return env ? env->env.mdp.n_states : 0; }

int gtdm_env_feature_dim(const gtdm_env* env) {
  return env ? env->env.features.dim() : 0;
}

double gtdm_env_gamma(const gtdm_env* env) { return env ? env->env.mdp.gamma : 0.0; }

gtdm_status gtdm_env_dump(const gtdm_env* env, const char* path) {
  if (auto rc = require(env && path, "gtdm_env_dump: null argument")) return rc;
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw gtdm::IoError(std::string("cannot open '") + path + "'");
    gtdm::dump_environment(env->env, out);
    return GTDM_OK;
  });
}

gtdm_status gtdm_model_compute(const gtdm_env* env, gtdm_model** out) {
  if (auto rc = require(env && out, "gtdm_model_compute: null argument")) return rc;
  return guarded([&] {
    *out = new gtdm_model{gtdm::compute_model(env->env)};
    return GTDM_OK;
  });
}

void gtdm_model_free(gtdm_model* model) { delete model; }

int gtdm_model_dim(const gtdm_model* model) { return model ? model->model.dim() : 0; }

gtdm_status gtdm_model_theta_star(const gtdm_model* model, double* buf, size_t len) {
  if (auto rc = require(model && buf, "gtdm_model_theta_star: null argument"))
    return rc;
  if (static_cast<int>(len) != model->model.dim())
    return fail(GTDM_ERR_INVALID_ARGUMENT, "theta_star: buffer length != dimension");
  for (int i = 0; i < model->model.dim(); ++i) buf[i] = model->model.theta_star[i];
  return GTDM_OK;
}

static gtdm_status model_scalar(const gtdm_model* model, const double* theta,
                                size_t len, double* out,
                                double (gtdm::ModelMatrices::*fn)(const gtdm::Vector&)
                                    const) {
  if (auto rc = require(model && theta && out, "model evaluation: null argument"))
    return rc;
  if (static_cast<int>(len) != model->model.dim())
    return fail(GTDM_ERR_INVALID_ARGUMENT, "model evaluation: length != dimension");
  return guarded([&] {
    *out = (model->model.*fn)(to_vector(theta, len));
    return GTDM_OK;
  });
}

gtdm_status gtdm_model_mspbe(const gtdm_model* model, const double* theta, size_t len,
                             double* out) {
  return model_scalar(model, theta, len, out, &gtdm::ModelMatrices::mspbe);
}

gtdm_status gtdm_model_rmspbe(const gtdm_model* model, const double* theta,
                              size_t len, double* out) {
  return model_scalar(model, theta, len, out, &gtdm::ModelMatrices::rmspbe);
}

gtdm_status gtdm_model_neu(const gtdm_model* model, const double* theta, size_t len,
                           double* out) {
  return model_scalar(model, theta, len, out, &gtdm::ModelMatrices::neu);
}

gtdm_status gtdm_model_dump(const gtdm_model* model, const char* path) {
  if (auto rc = require(model && path, "gtdm_model_dump: null argument")) return rc;
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw gtdm::IoError(std::string("cannot open '") + path + "'");
    gtdm::dump_model(model->model, out);
    return GTDM_OK;
  });
}

gtdm_status gtdm_learner_create(const gtdm_learner_config* config, int dim,
                                double gamma, gtdm_learner** out) {
  if (auto rc = require(config && out && config->algo && config->form &&
                            config->regime && dim > 0,
                        "gtdm_learner_create: bad argument"))
    return rc;
  return guarded([&] {
    *out = new gtdm_learner{gtdm::Learner(
        gtdm::algo_from_string(config->algo), gtdm::form_from_string(config->form),
        schedule_from_config(*config), dim, gamma)};
    return GTDM_OK;
  });
}

void gtdm_learner_free(gtdm_learner* learner) { delete learner; }

gtdm_status gtdm_learner_step(gtdm_learner* learner, const double* phi,
                              const double* phi_next, double reward) {
  if (auto rc =
          require(learner && phi && phi_next, "gtdm_learner_step: null argument"))
    return rc;
  return guarded([&] {
    const size_t d = static_cast<size_t>(learner->learner.state().theta.size());
    gtdm::Transition tr;
    tr.phi = to_vector(phi, d);
    tr.phi_next = to_vector(phi_next, d);
    tr.r = reward;
    tr.done = tr.phi_next.isZero(0.0);
    learner->learner.step(tr);
    return GTDM_OK;
  });
}

gtdm_status gtdm_learner_theta(const gtdm_learner* learner, double* buf, size_t len) {
  if (auto rc = require(learner && buf, "gtdm_learner_theta: null argument")) return rc;
  const gtdm::Vector& theta = learner->learner.theta();
  if (static_cast<Eigen::Index>(len) != theta.size())
    return fail(GTDM_ERR_INVALID_ARGUMENT, "theta: buffer length != dimension");
  for (Eigen::Index i = 0; i < theta.size(); ++i) buf[i] = theta[i];
  return GTDM_OK;
}

int64_t gtdm_learner_steps(const gtdm_learner* learner) {
  return learner ? learner->learner.steps() : 0;
}

gtdm_status gtdm_verify_hurwitz_env(const gtdm_env* env, double w,
                                    gtdm_hurwitz_report* report) {
  if (auto rc = require(env && report, "gtdm_verify_hurwitz_env: null argument"))
    return rc;
  return guarded([&] {
    const gtdm::ModelMatrices model = gtdm::compute_model(env->env);
    fill_hurwitz_report(model.A_bar, model.b_bar, w, report);
    return GTDM_OK;
  });
}

gtdm_status gtdm_verify_hurwitz_matrix(const double* a, int dim, double w,
                                       gtdm_hurwitz_report* report) {
  if (auto rc = require(a && report && dim > 0,
                        "gtdm_verify_hurwitz_matrix: bad argument"))
    return rc;
  return guarded([&] {
    gtdm::Matrix a_bar(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a_bar(i, j) = a[i * dim + j];
    fill_hurwitz_report(a_bar, gtdm::Vector::Zero(dim), w, report);
    return GTDM_OK;
  });
}

gtdm_status gtdm_check_conditions(const gtdm_env* env, const char* algo, double w,
                                  double alpha, double beta, double rho, char* buf,
                                  size_t buflen, int* all_pass) {
  if (auto rc = require(env && algo && buf && all_pass,
                        "gtdm_check_conditions: null argument"))
    return rc;
  return guarded([&] {
    gtdm::ScheduleSpec spec;
    spec.regime = gtdm::Regime::three_ts;
    spec.alpha_exp = alpha;
    spec.beta_exp = beta;
    spec.rho_exp = rho;
    spec.w = w;
    const gtdm::ModelMatrices model = gtdm::compute_model(env->env);
    const gtdm::ThreeTSProblem problem = gtdm::make_momentum_problem(
        gtdm::algo_from_string(algo), env->env, model, spec);
    const gtdm::BConditionReport report = gtdm::check_b_conditions(problem);
    *all_pass = report.all_pass() ? 1 : 0;
    return copy_string(report.to_text(), buf, buflen);
  });
}

int gtdm_preset_count(void) {
  return static_cast<int>(gtdm::preset_names().size());
}

const char* gtdm_preset_name(int index) {
  static thread_local std::string name;
  const auto names = gtdm::preset_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  name = names[index];
  return name.c_str();
}

gtdm_status gtdm_experiment_from_preset(const char* name, gtdm_experiment** out) {
  if (auto rc = require(name && out, "gtdm_experiment_from_preset: null argument"))
    return rc;
  return guarded([&] {
    *out = new gtdm_experiment{gtdm::preset(name), std::nullopt};
    return GTDM_OK;
  });
}

gtdm_status gtdm_experiment_from_file(const char* path, gtdm_experiment** out) {
  if (auto rc = require(path && out, "gtdm_experiment_from_file: null argument"))
    return rc;
  return guarded([&] {
    *out = new gtdm_experiment{gtdm::load_config(path), std::nullopt};
    return GTDM_OK;
  });
}

void gtdm_experiment_free(gtdm_experiment* experiment) { delete experiment; }

gtdm_status gtdm_experiment_set(gtdm_experiment* experiment, const char* key,
                                const char* value) {
  if (auto rc =
          require(experiment && key && value, "gtdm_experiment_set: null argument"))
    return rc;
  return guarded([&] {
    // Reuse the config-file parser for the single override line, then copy
    // just the overridden field onto the existing config.
    gtdm::ExperimentConfig base = experiment->config;
    std::istringstream line(std::string(key) + " = " + value + "\n");
    gtdm::ExperimentConfig parsed = gtdm::parse_config(line);
    const std::string k(key);
    if (k == "env") base.env_spec = parsed.env_spec;
    else if (k == "runs") base.n_runs = parsed.n_runs;
    else if (k == "episodes") base.n_episodes = parsed.n_episodes;
    else if (k == "seed") base.base_seed = parsed.base_seed;
    else if (k == "mode") base.mode = parsed.mode;
    else if (k == "max_episode_steps") base.max_episode_steps = parsed.max_episode_steps;
    else if (k == "iid_steps_per_episode")
      base.iid_steps_per_episode = parsed.iid_steps_per_episode;
    else if (k == "out") base.out_dir = parsed.out_dir;
    else throw gtdm::ConfigError("unknown experiment key '" + k + "'");
    experiment->config = base;
    experiment->curves.reset();
    return GTDM_OK;
  });
}

gtdm_status gtdm_experiment_set_algorithm(gtdm_experiment* experiment,
                                          const gtdm_learner_config* config) {
  if (auto rc = require(experiment && config && config->algo && config->form &&
                            config->regime,
                        "gtdm_experiment_set_algorithm: bad argument"))
    return rc;
  return guarded([&] {
    gtdm::AlgorithmSpec spec;
    spec.algo = gtdm::algo_from_string(config->algo);
    spec.form = gtdm::form_from_string(config->form);
    spec.schedule = schedule_from_config(*config);
    spec.label = gtdm::to_string(spec.algo) +
                 (spec.form == gtdm::Form::vanilla ? "" : "-m");
    experiment->config.algorithms = {std::move(spec)};
    experiment->curves.reset();
    return GTDM_OK;
  });
}

gtdm_status gtdm_experiment_resolved(const gtdm_experiment* experiment, char* buf,
                                     size_t buflen) {
  if (auto rc = require(experiment != nullptr, "gtdm_experiment_resolved: null handle"))
    return rc;
  return copy_string(experiment->config.resolved_text(), buf, buflen);
}

gtdm_status gtdm_experiment_run(gtdm_experiment* experiment, int jobs) {
  if (auto rc = require(experiment != nullptr, "gtdm_experiment_run: null handle"))
    return rc;
  return guarded([&] {
    experiment->curves = gtdm::run_experiment(experiment->config, jobs);
    return GTDM_OK;
  });
}

gtdm_status gtdm_experiment_export(const gtdm_experiment* experiment, const char* dir) {
  if (auto rc = require(experiment != nullptr, "gtdm_experiment_export: null handle"))
    return rc;
  if (!experiment->curves)
    return fail(GTDM_ERR_INVALID_ARGUMENT, "experiment has not been run");
  const std::string target =
      dir ? dir : (experiment->config.out_dir.empty() ? "." : experiment->config.out_dir);
  return guarded([&] {
    gtdm::export_curves(*experiment->curves, target);
    return GTDM_OK;
  });
}

int gtdm_experiment_num_algorithms(const gtdm_experiment* experiment) {
  return experiment ? static_cast<int>(experiment->config.algorithms.size()) : 0;
}

gtdm_status gtdm_experiment_label(const gtdm_experiment* experiment, int index,
                                  char* buf, size_t buflen) {
  if (auto rc = require(experiment && buf, "gtdm_experiment_label: null argument"))
    return rc;
  if (index < 0 || index >= gtdm_experiment_num_algorithms(experiment))
    return fail(GTDM_ERR_INVALID_ARGUMENT, "algorithm index out of range");
  return copy_string(experiment->config.algorithms[index].label, buf, buflen);
}

gtdm_status gtdm_experiment_final_mean(const gtdm_experiment* experiment, int index,
                                       double* out) {
  if (auto rc =
          require(experiment && out, "gtdm_experiment_final_mean: null argument"))
    return rc;
  if (!experiment->curves)
    return fail(GTDM_ERR_INVALID_ARGUMENT, "experiment has not been run");
  if (index < 0 || index >= experiment->curves->n_algorithms())
    return fail(GTDM_ERR_INVALID_ARGUMENT, "algorithm index out of range");
  const auto& mean = experiment->curves->mean[index];
  *out = mean.empty() ? experiment->curves->initial_rmspbe : mean.back();
  return GTDM_OK;
}

gtdm_status gtdm_experiment_auc(const gtdm_experiment* experiment, int index,
                                int first_k, double* out) {
  if (auto rc = require(experiment && out, "gtdm_experiment_auc: null argument"))
    return rc;
  if (!experiment->curves)
    return fail(GTDM_ERR_INVALID_ARGUMENT, "experiment has not been run");
  if (index < 0 || index >= experiment->curves->n_algorithms())
    return fail(GTDM_ERR_INVALID_ARGUMENT, "algorithm index out of range");
  *out = gtdm::curve_auc(*experiment->curves, index, first_k);
  return GTDM_OK;
}

}  // extern "C"

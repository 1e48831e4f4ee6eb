/*
 * gtdm — gradient temporal-difference policy evaluation with heavy-ball
 * momentum.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through paired functions; every fallible call returns a
 * gtdm_status and leaves a human-readable message in gtdm_last_error() on
 * failure. Handles are not thread-safe individually, but distinct handles
 * may be used from distinct threads.
 */
#ifndef GTDM_GTDM_H
#define GTDM_GTDM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GTDM_BUILD)
#define GTDM_API __declspec(dllexport)
#else
#define GTDM_API __declspec(dllimport)
#endif
#else
#define GTDM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gtdm_status {
  GTDM_OK = 0,
  GTDM_ERR_INVALID_ARGUMENT = 1, /* null handle, bad buffer, bad enum string */
  GTDM_ERR_CONFIG = 2,           /* unknown names, malformed configs/params   */
  GTDM_ERR_NUMERICAL = 3,        /* singular systems, failed iterations       */
  GTDM_ERR_DIVERGED = 4,         /* learner iterate left the guard region     */
  GTDM_ERR_IO = 5                /* file errors                               */
} gtdm_status;

typedef struct gtdm_env gtdm_env;
typedef struct gtdm_model gtdm_model;
typedef struct gtdm_learner gtdm_learner;
typedef struct gtdm_experiment gtdm_experiment;

GTDM_API const char* gtdm_version(void);
GTDM_API const char* gtdm_status_name(gtdm_status status);
/* Message from the most recent failing call on this thread. */
GTDM_API const char* gtdm_last_error(void);

/* ---- environments ------------------------------------------------------ */

/* spec: "boyan14", "rw5", "rw19", "randmdp(seed,n,k)". */
GTDM_API gtdm_status gtdm_env_open(const char* spec, gtdm_env** out);
GTDM_API void gtdm_env_close(gtdm_env* env);
GTDM_API int gtdm_env_num_states(const gtdm_env* env);
GTDM_API int gtdm_env_feature_dim(const gtdm_env* env);
GTDM_API double gtdm_env_gamma(const gtdm_env* env);
/* Plain-text dump (kernel rows `s a s' p r`, terminal/start/policy/feature
 * blocks) to a file. */
GTDM_API gtdm_status gtdm_env_dump(const gtdm_env* env, const char* path);

/* ---- exact model oracles ----------------------------------------------- */

GTDM_API gtdm_status gtdm_model_compute(const gtdm_env* env, gtdm_model** out);
GTDM_API void gtdm_model_free(gtdm_model* model);
GTDM_API int gtdm_model_dim(const gtdm_model* model);
/* Copies theta* into buf (len must equal the feature dimension). */
GTDM_API gtdm_status gtdm_model_theta_star(const gtdm_model* model, double* buf,
                                           size_t len);
GTDM_API gtdm_status gtdm_model_mspbe(const gtdm_model* model, const double* theta,
                                      size_t len, double* out);
GTDM_API gtdm_status gtdm_model_rmspbe(const gtdm_model* model, const double* theta,
                                       size_t len, double* out);
GTDM_API gtdm_status gtdm_model_neu(const gtdm_model* model, const double* theta,
                                    size_t len, double* out);
GTDM_API gtdm_status gtdm_model_dump(const gtdm_model* model, const char* path);

/* ---- learners ----------------------------------------------------------- */

typedef struct gtdm_learner_config {
  const char* algo;   /* "gtd" | "gtd2" | "tdc" */
  const char* form;   /* "vanilla" | "two_form" | "three_form" */
  const char* regime; /* "vanilla" | "one_ts" | "three_ts" */
  double alpha;       /* step-size exponents */
  double beta;
  double rho;
  double w;           /* momentum constant */
} gtdm_learner_config;

GTDM_API gtdm_status gtdm_learner_create(const gtdm_learner_config* config, int dim,
                                         double gamma, gtdm_learner** out);
GTDM_API void gtdm_learner_free(gtdm_learner* learner);
/* One update from a transition (phi, reward, phi_next); phi_next must be the
 * zero vector at episode end. Returns GTDM_ERR_DIVERGED if the iterate
 * leaves the guard region. */
GTDM_API gtdm_status gtdm_learner_step(gtdm_learner* learner, const double* phi,
                                       const double* phi_next, double reward);
GTDM_API gtdm_status gtdm_learner_theta(const gtdm_learner* learner, double* buf,
                                        size_t len);
GTDM_API int64_t gtdm_learner_steps(const gtdm_learner* learner);

/* ---- stacked-system verification ---------------------------------------- */

typedef struct gtdm_hurwitz_report {
  double a_norm_sq;     /* spectral norm of A_bar, squared */
  double w_w_plus_one;  /* w(w+1) */
  int sufficient;       /* 1 iff w > 0 and w(w+1) > ||A_bar||^2 */
  int hurwitz;          /* eigenvalue verdict on the stacked G */
  double max_real_part; /* over eigenvalues of G */
} gtdm_hurwitz_report;

GTDM_API gtdm_status gtdm_verify_hurwitz_env(const gtdm_env* env, double w,
                                             gtdm_hurwitz_report* report);
/* a is the row-major dim x dim driving matrix. */
GTDM_API gtdm_status gtdm_verify_hurwitz_matrix(const double* a, int dim, double w,
                                                gtdm_hurwitz_report* report);

/* Condition report for the momentum decomposition of `algo` on `env`
 * (three-timescale schedule exponents alpha/beta/rho, momentum constant w).
 * Writes one line per condition into buf; all_pass is 1 iff no condition
 * failed. */
GTDM_API gtdm_status gtdm_check_conditions(const gtdm_env* env, const char* algo,
                                           double w, double alpha, double beta,
                                           double rho, char* buf, size_t buflen,
                                           int* all_pass);

/* ---- experiments --------------------------------------------------------- */

GTDM_API int gtdm_preset_count(void);
GTDM_API const char* gtdm_preset_name(int index);

GTDM_API gtdm_status gtdm_experiment_from_preset(const char* name,
                                                 gtdm_experiment** out);
GTDM_API gtdm_status gtdm_experiment_from_file(const char* path,
                                               gtdm_experiment** out);
GTDM_API void gtdm_experiment_free(gtdm_experiment* experiment);
/* Override one config field before running. Keys: env, runs, episodes, seed,
 * mode, max_episode_steps, iid_steps_per_episode, out. */
GTDM_API gtdm_status gtdm_experiment_set(gtdm_experiment* experiment, const char* key,
                                         const char* value);
/* Replace the algorithm list with a single learner built from config. */
GTDM_API gtdm_status gtdm_experiment_set_algorithm(gtdm_experiment* experiment,
                                                   const gtdm_learner_config* config);
/* Fully resolved config text (suitable for echoing before a run). */
GTDM_API gtdm_status gtdm_experiment_resolved(const gtdm_experiment* experiment,
                                              char* buf, size_t buflen);
GTDM_API gtdm_status gtdm_experiment_run(gtdm_experiment* experiment, int jobs);
/* Writes curves.csv and aggregate.csv under dir (defaults to the configured
 * output directory when dir is NULL). */
GTDM_API gtdm_status gtdm_experiment_export(const gtdm_experiment* experiment,
                                            const char* dir);
GTDM_API int gtdm_experiment_num_algorithms(const gtdm_experiment* experiment);
GTDM_API gtdm_status gtdm_experiment_label(const gtdm_experiment* experiment,
                                           int index, char* buf, size_t buflen);
/* Mean RMSPBE at the final episode for one algorithm. */
GTDM_API gtdm_status gtdm_experiment_final_mean(const gtdm_experiment* experiment,
                                                int index, double* out);
/* Area under the mean RMSPBE curve over the first_k first episodes. */
GTDM_API gtdm_status gtdm_experiment_auc(const gtdm_experiment* experiment, int index,
                                         int first_k, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GTDM_GTDM_H */

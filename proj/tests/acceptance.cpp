// Acceptance suite: one check per shipped guarantee, each printed as a
// single PASS/FAIL line with its measured witness. Exits nonzero if any
// check fails.
#include <chrono>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "oracles.hpp"
#include "sa_framework.hpp"

using namespace gtdm;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

ScheduleSpec three_ts(double alpha, double beta, double rho, double w) {
  ScheduleSpec s;
  s.regime = Regime::three_ts;
  s.alpha_exp = alpha;
  s.beta_exp = beta;
  s.rho_exp = rho;
  s.w = w;
  return s;
}

// ---- criterion 1: two-iterate vs three-iterate form equivalence ----------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  const Environment env = make_environment("boyan14");
  const ModelMatrices model = compute_model(env);
  const ScheduleSpec spec = three_ts(0.25, 0.125, 0.2, 0.1);

  bool pass = true;
  std::string detail;
  for (Algo algo : {Algo::gtd, Algo::gtd2, Algo::tdc}) {
    IidSampler sampler(env, model.d_pi);
    Rng rng(1);
    Learner two(algo, Form::two_form, spec, model.dim(), env.mdp.gamma);
    Learner three(algo, Form::three_form, spec, model.dim(), env.mdp.gamma);
    double max_gap = 0.0;
    std::string leg;
    try {
      for (int t = 0; t < 10000; ++t) {
        const Transition tr = sampler.sample(rng);
        two.step(tr);
        three.step(tr);
        max_gap = std::max(max_gap, (two.theta() - three.theta()).norm());
      }
      leg = to_string(algo) + "-m max gap " + fmt(max_gap);
      if (max_gap > 1e-8) pass = false;
    } catch (const DivergenceError& e) {
      leg = to_string(algo) + "-m DIVERGED (" + std::string(e.what()) + ")";
      pass = false;
    }
    detail += (detail.empty() ? "" : "; ") + leg;
  }
  detail += "; " + fmt(seconds_since(start)) + " s";
  report(1, "form equivalence on boyan14, three_ts table row, 1e4 iid transitions",
         pass, detail);
}

// ---- criterion 2: fixed-point oracles ------------------------------------

void criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (const char* name : {"boyan14", "rw5", "rw19", "randmdp(0,20,5)"}) {
    const ModelMatrices model = compute_model(make_environment(name));
    const double residual =
        (model.A_bar * model.theta_star + model.b_bar).cwiseAbs().maxCoeff();
    const double objective = model.mspbe(model.theta_star);
    const StackedSystem sys = build_stacked(model, 1.0);
    const double stacked_gap =
        (sys.fixed_point_theta() - model.theta_star).cwiseAbs().maxCoeff();
    const bool ok = residual <= 1e-10 && objective <= 1e-18 && stacked_gap <= 1e-10;
    if (!ok) pass = false;
    detail += std::string(name) + " resid " + fmt(residual) + " mspbe " +
              fmt(objective) + " stacked " + fmt(stacked_gap) + "; ";
  }
  detail += fmt(seconds_since(start)) + " s";
  report(2, "fixed point, mspbe(theta*), stacked fixed point on all environments",
         pass, detail);
}

// ---- criterion 3: sufficiency + determinant identity ----------------------

void criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(42);
  int hurwitz_failures = 0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 5);
    const Matrix a_bar = oracles::random_negative_definite(rng, d);
    const double norm = spectral_norm(a_bar);
    const double w_min = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * norm * norm));
    const double w = w_min + rng.uniform(0.001, 2.0);
    if (!hurwitz_sufficient(a_bar, w)) {
      ++hurwitz_failures;
      continue;
    }
    if (!is_hurwitz_eig(build_stacked(a_bar, Vector::Zero(d), w).G).hurwitz)
      ++hurwitz_failures;
  }

  int det_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 4);
    const Matrix a_bar = oracles::random_negative_definite(rng, d);
    const double w = rng.uniform(0.2, 3.0);
    const StackedSystem sys = build_stacked(a_bar, Vector::Zero(d), w);
    const Matrix ata = a_bar.transpose() * a_bar;
    Eigen::EigenSolver<Matrix> eig(sys.G);
    for (int k = 0; k < 20; ++k) {
      std::complex<double> lambda(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
      double dist = 1e300;
      for (int i = 0; i < eig.eigenvalues().size(); ++i)
        dist = std::min(dist, std::abs(lambda - eig.eigenvalues()[i]));
      if (dist < 0.2) {
        --k;
        continue;
      }
      const std::complex<double> lhs =
          (lambda * Eigen::MatrixXcd::Identity(3 * d, 3 * d) -
           sys.G.cast<std::complex<double>>())
              .determinant();
      const std::complex<double> rhs =
          (lambda * (1.0 + lambda) * (w + lambda) *
               Eigen::MatrixXcd::Identity(d, d) +
           ata.cast<std::complex<double>>())
              .determinant();
      if (std::abs(lhs - rhs) > 1e-6 * std::max({std::abs(lhs), std::abs(rhs), 1e-12}))
        ++det_failures;
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = hurwitz_failures == 0 && det_failures == 0 && elapsed < 30.0;
  report(3, "sufficiency => hurwitz over 1e4 random systems; determinant identity",
         pass,
         "hurwitz failures " + std::to_string(hurwitz_failures) + "/10000, det failures " +
             std::to_string(det_failures) + "/4000, " + fmt(elapsed) + " s");
}

// ---- criterion 4: gtd-m convergence on rw5 --------------------------------

void criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  const Environment env = make_environment("rw5");
  const ModelMatrices model = compute_model(env);
  const ScheduleSpec spec = three_ts(0.25, 0.125, 0.2, 0.1);

  std::string detail = "rel err per seed:";
  double sum = 0.0;
  double seed0 = -1.0;
  bool diverged = false;
  for (int seed = 0; seed < 5; ++seed) {
    IidSampler sampler(env, model.d_pi);
    Rng rng(seed);
    Learner learner(Algo::gtd, Form::two_form, spec, model.dim(), env.mdp.gamma);
    double rel;
    try {
      for (long t = 0; t < 1000000; ++t) learner.step(sampler.sample(rng));
      rel = (learner.theta() - model.theta_star).norm() / model.theta_star.norm();
    } catch (const DivergenceError&) {
      rel = std::numeric_limits<double>::infinity();
      diverged = true;
    }
    if (seed == 0) seed0 = rel;
    sum += rel;
    detail += " " + fmt(rel);
  }
  const double mean = sum / 5.0;
  detail += "; mean " + fmt(mean) + "; " + fmt(seconds_since(start)) + " s";
  const bool pass = !diverged && seed0 <= 0.1 && mean <= 0.05;
  report(4, "gtd-m three_ts convergence on rw5 (seed0 <= 0.1, 5-seed mean <= 0.05)",
         pass, detail);
}

// ---- criterion 5: momentum vs vanilla AUC ---------------------------------

struct AucResult {
  bool ok = false;
  double auc = 0.0;
  std::string note;
};

AucResult preset_algo_auc(const std::string& preset_name, int algo_index, int runs,
                          int episodes, int first_k) {
  ExperimentConfig cfg = preset(preset_name);
  cfg.n_runs = runs;
  cfg.n_episodes = episodes;
  cfg.base_seed = 0;
  cfg.algorithms = {cfg.algorithms[algo_index]};
  AucResult result;
  try {
    const CurveSet curves = run_experiment(cfg, 2);
    result.ok = true;
    result.auc = curve_auc(curves, 0, first_k);
  } catch (const DivergenceError& e) {
    result.note = e.what();
  }
  return result;
}

void criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  const int runs = 100, episodes = 200, first_k = 100;
  bool pass = true;
  std::string detail;

  for (const std::string env : {"boyan", "rw5"}) {
    for (int algo = 0; algo < 2; ++algo) {  // gtd, gtd2
      const std::string name = algo == 0 ? "gtd" : "gtd2";
      const AucResult vanilla =
          preset_algo_auc(env + "_vanilla", algo, runs, episodes, first_k);
      const AucResult momentum =
          preset_algo_auc(env + "_three_ts", algo, runs, episodes, first_k);
      std::string leg = env + "/" + name + ": vanilla " +
                        (vanilla.ok ? fmt(vanilla.auc) : "diverged") + " three_ts " +
                        (momentum.ok ? fmt(momentum.auc) : "diverged");
      const bool ok = vanilla.ok && momentum.ok && momentum.auc < vanilla.auc;
      if (!ok) pass = false;
      detail += leg + (ok ? " (momentum wins)" : " (FAILED)") + "; ";
    }
    // One-TS comparison is reported, not asserted.
    for (int algo = 0; algo < 2; ++algo) {
      const AucResult one =
          preset_algo_auc(env + "_one_ts", algo, runs, episodes, first_k);
      std::printf("  [report] %s one_ts %s auc: %s\n", env.c_str(),
                  algo == 0 ? "gtd-m" : "gtd2-m",
                  one.ok ? fmt(one.auc).c_str() : "diverged");
    }
  }
  detail += fmt(seconds_since(start)) + " s";
  report(5, "three_ts momentum AUC < vanilla AUC (gtd, gtd2 on boyan and rw5)", pass,
         detail);
}

// ---- criterion 6: expected-update maps ------------------------------------

void criterion_6() {
  const auto start = std::chrono::steady_clock::now();
  const Environment env = make_environment("rw5");
  const ModelMatrices model = compute_model(env);
  IidSampler sampler(env, model.d_pi);
  const double w = 0.1;
  Rng state_rng(7);

  double worst = 0.0;
  for (int probe = 0; probe < 5; ++probe) {
    Vector v(model.dim()), u(model.dim()), theta(model.dim());
    for (int i = 0; i < model.dim(); ++i) {
      v[i] = state_rng.uniform(-1.0, 1.0);
      u[i] = state_rng.uniform(-1.0, 1.0);
      theta[i] = state_rng.uniform(-1.0, 1.0);
    }
    for (Algo algo : {Algo::gtd, Algo::gtd2, Algo::tdc}) {
      const LinearAffineMap h = momentum_h(algo, model, w);
      const LinearAffineMap g = momentum_g(algo, model);
      Rng rng(100 + probe);
      Vector mean_v = Vector::Zero(model.dim());
      Vector mean_u = Vector::Zero(model.dim());
      const int draws = 1000000;
      for (int i = 0; i < draws; ++i) {
        const Transition tr = sampler.sample(rng);
        mean_v += theta_direction(algo, tr, env.mdp.gamma, u, theta) - w * v;
        mean_u += u_direction(algo, tr, env.mdp.gamma, u, theta);
      }
      mean_v /= draws;
      mean_u /= draws;
      const Vector hv = h(v, u, theta);
      const Vector gv = g(v, u, theta);
      worst = std::max(worst, (mean_v - hv).norm() / hv.norm());
      worst = std::max(worst, (mean_u - gv).norm() / gv.norm());
      // f is the identity on v: exact by construction, nothing to sample.
    }
  }
  const double elapsed = seconds_since(start);
  report(6, "monte-carlo update means match h/g maps at 5 frozen states",
         worst <= 1e-2 && elapsed < 30.0,
         "worst relative deviation " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

// ---- criterion 7: generic three-timescale runner ---------------------------

void criterion_7() {
  const auto start = std::chrono::steady_clock::now();
  const Environment env = make_environment("rw5");
  const ModelMatrices model = compute_model(env);
  const ThreeTSProblem problem =
      make_momentum_problem(Algo::gtd, env, model, three_ts(0.25, 0.125, 0.2, 0.1));

  const BConditionReport conditions = check_b_conditions(problem);
  std::string detail = std::string("b-conditions ") +
                       (conditions.all_pass() ? "pass" : "FAIL");
  bool pass = conditions.all_pass();

  Rng rng(0);
  try {
    const ThreeTSDiagnostics diag =
        run_three_ts(problem, 1000000, rng, conditions.equilibria());
    pass = pass && *diag.dist_x <= 0.1 && *diag.dist_y <= 0.1 && *diag.dist_z <= 0.1;
    detail += "; dist (x,y,z) = (" + fmt(*diag.dist_x) + ", " + fmt(*diag.dist_y) +
              ", " + fmt(*diag.dist_z) + ")";
    const auto& first = diag.ratio_trace.front();
    const auto& last = diag.ratio_trace.back();
    const bool ratios_ok = last[1] < first[1] && last[2] < first[2];
    pass = pass && ratios_ok;
    detail += "; b/a " + fmt(first[1]) + "->" + fmt(last[1]) + ", c/b " +
              fmt(first[2]) + "->" + fmt(last[2]);
  } catch (const DivergenceError& e) {
    pass = false;
    detail += std::string("; runner DIVERGED (") + e.what() + ")";
  }
  detail += "; " + fmt(seconds_since(start)) + " s";
  report(7, "gtd-m as generic 3-ts problem: conditions pass and runner converges",
         pass, detail);
}

// ---- criterion 8: determinism and boundedness across presets ---------------

void criterion_8() {
  const auto start = std::chrono::steady_clock::now();

  // Reproducibility at a reduced size (cheap), then boundedness at each
  // preset's full default size, which is where slow instabilities surface.
  bool deterministic = true;
  for (const auto& name : preset_names()) {
    ExperimentConfig cfg = preset(name);
    cfg.n_runs = 3;
    cfg.n_episodes = 12;
    try {
      const CurveSet a = run_experiment(cfg, 1);
      const CurveSet b = run_experiment(cfg, 1);
      const CurveSet c = run_experiment(cfg, 3);
      if (a.rmspbe != b.rmspbe || a.rmspbe != c.rmspbe) deterministic = false;
    } catch (const DivergenceError&) {
      // Boundedness is judged below at full scale.
    }
  }

  int bounded = 0, total = 0;
  std::string divergers;
  for (const auto& name : preset_names()) {
    ++total;
    try {
      run_experiment(preset(name), 2);
      ++bounded;
    } catch (const DivergenceError& e) {
      divergers += name + " (" + e.what() + "); ";
    }
  }
  const bool pass = deterministic && bounded == total;
  report(8, "presets bitwise reproducible and inside the divergence guard", pass,
         "deterministic " + std::string(deterministic ? "yes" : "NO") + "; bounded " +
             std::to_string(bounded) + "/" + std::to_string(total) +
             (divergers.empty() ? "; " : "; diverged: " + divergers) +
             fmt(seconds_since(start)) + " s");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%d of 8 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}

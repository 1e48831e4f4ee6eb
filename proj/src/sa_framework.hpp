#ifndef GTDM_SA_FRAMEWORK_HPP
#define GTDM_SA_FRAMEWORK_HPP

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "model.hpp"

namespace gtdm {

// The stacked driving system of the one-timescale momentum decomposition,
// over psi = (v, u, theta):
//       [ -wI  -A^T   0 ]        [ 0 ]
//   G = [  0    -I    A ]    g = [ b ]
//       [  I     0    0 ]        [ 0 ]
struct StackedSystem {
  Matrix G;
  Vector g;
  double w = 0.0;
  Matrix A_bar;

  int block_dim() const { return static_cast<int>(A_bar.rows()); }

  // Solves G psi = -g and returns the theta block; equals -A^{-1} b.
  Vector fixed_point_theta() const;
};

StackedSystem build_stacked(const Matrix& A_bar, const Vector& b_bar, double w);
StackedSystem build_stacked(const ModelMatrices& model, double w);

struct HurwitzResult {
  bool hurwitz = false;
  double max_real_part = 0.0;
};

// Eigenvalue check: true iff every eigenvalue has real part < -1e-12.
HurwitzResult is_hurwitz_eig(const Matrix& G);

double spectral_norm(const Matrix& A);

// Sufficient condition for the stacked G to be Hurwitz given A_bar negative
// definite: w > 0 and w(w+1) > ||A_bar||^2 (spectral norm squared).
bool hurwitz_sufficient(const Matrix& A_bar, double w);

// x + My y + Mz z ... affine map over the three iterate blocks.
struct LinearAffineMap {
  Matrix Mx, My, Mz;
  Vector c;

  Vector operator()(const Vector& x, const Vector& y, const Vector& z) const {
    return Mx * x + My * y + Mz * z + c;
  }
};

// Map used by the runner; the affine description, when present, is what the
// condition checker analyzes. Maps without it simulate fine but report as
// not mechanically checkable.
struct TsMap {
  std::function<Vector(const Vector&, const Vector&, const Vector&)> fn;
  std::optional<LinearAffineMap> affine;

  TsMap() = default;
  TsMap(LinearAffineMap m)
      : fn([m](const Vector& x, const Vector& y, const Vector& z) { return m(x, y, z); }),
        affine(std::move(m)) {}
};

struct StepSchedule {
  std::function<double(long)> fn;
  std::optional<double> exponent;  // declared polynomial decay, for analytic checks

  static StepSchedule polynomial(double exp) {
    return {[exp](long n) { return std::pow(static_cast<double>(n + 1), -exp); }, exp};
  }
  double operator()(long n) const { return fn(n); }
};

// Generic three-timescale recursion
//   x_{n+1} = x_n + a(n) (h(x,y,z) + M1 + eps1(n))
//   y_{n+1} = y_n + b(n) (g(x,y,z) + M2 + eps2(n))
//   z_{n+1} = z_n + c(n) (f(x,y,z) + M3 + eps3(n))
struct ThreeTSProblem {
  int d1 = 0, d2 = 0, d3 = 0;
  TsMap h, g, f;
  StepSchedule a, b, c;
  // Zero-mean noise written into (m1, m2, m3); empty means noiseless.
  std::function<void(const Vector& x, const Vector& y, const Vector& z, Rng& rng,
                     Vector& m1, Vector& m2, Vector& m3)>
      noise;
  // Optional decaying perturbation sequences (o(1) checked numerically).
  std::function<Vector(long)> eps1, eps2, eps3;
  // Initial iterates; empty means the origin.
  Vector x0, y0, z0;
};

struct Equilibria {
  Vector x_star, y_star, z_star;
};

struct ThreeTSDiagnostics {
  double sup_norm = 0.0;  // running sup of ||x|| + ||y|| + ||z||
  Vector x_final, y_final, z_final;
  // (n, b(n)/a(n), c(n)/b(n)) sampled at log-spaced steps.
  std::vector<std::array<double, 3>> ratio_trace;
  std::optional<double> dist_x, dist_y, dist_z;  // to declared equilibria
};

// Advances the three iterates n_steps times from the origin. Throws
// DivergenceError (with step index) if an iterate becomes non-finite or
// crosses the divergence guard.
ThreeTSDiagnostics run_three_ts(const ThreeTSProblem& problem, long n_steps, Rng& rng,
                                const std::optional<Equilibria>& known = std::nullopt);

enum class Verdict { pass, warn, fail, not_checkable };
std::string to_string(Verdict v);

struct ConditionResult {
  std::string name;
  Verdict verdict = Verdict::fail;
  std::string witness;
};

struct BConditionReport {
  std::vector<ConditionResult> items;
  // Closed-form equilibrium structure of the affine system, when checkable:
  // lambda(y,z) = Ly y + Lz z + l0, Gamma(z) = Gz z + g0, and z_star.
  Matrix lambda_y, lambda_z;
  Vector lambda_0;
  Matrix gamma_z;
  Vector gamma_0;
  Vector z_star;

  bool all_pass() const;  // no fail and no not_checkable entries
  std::string to_text() const;
  Equilibria equilibria() const;
};

// Mechanical verification of the stability/convergence conditions for
// linear-affine problems: Lipschitz constants from matrix norms, numeric
// step-size ratio and summability probes over the horizon, Hurwitz checks of
// the per-timescale driving matrices with closed-form equilibria, and
// Hurwitz checks of the scaled limits (offsets dropped, zero equilibrium).
BConditionReport check_b_conditions(const ThreeTSProblem& problem,
                                    long horizon = 1000000);

// GTD-M / GTD2-M / TDC-M expressed as a three-timescale problem over
// (x, y, z) = (v, u, theta), with sampling noise driven by i.i.d. draws from
// the stationary distribution. Requires a three_ts schedule.
ThreeTSProblem make_momentum_problem(Algo algo, const Environment& env,
                                     const ModelMatrices& model,
                                     const ScheduleSpec& spec);

// Closed-form mean-update maps of the momentum decomposition (the h/g/f the
// checker and the expected-update tests compare against).
LinearAffineMap momentum_h(Algo algo, const ModelMatrices& model, double w);
LinearAffineMap momentum_g(Algo algo, const ModelMatrices& model);
LinearAffineMap momentum_f(int dim);

}  // namespace gtdm

#endif

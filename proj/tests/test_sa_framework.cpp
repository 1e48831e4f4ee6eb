#include <doctest.h>

#include <complex>

#include "oracles.hpp"
#include "sa_framework.hpp"

using namespace gtdm;

namespace {

ScheduleSpec rw5_three_ts() {
  ScheduleSpec spec;
  spec.regime = Regime::three_ts;
  spec.alpha_exp = 0.25;
  spec.beta_exp = 0.125;
  spec.rho_exp = 0.2;
  spec.w = 0.1;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("sa_framework");

TEST_CASE("stacked system blocks for the scalar case") {
  const Matrix a_bar = -Matrix::Identity(1, 1);
  const Vector b_bar = Vector::Ones(1);
  const StackedSystem sys = build_stacked(a_bar, b_bar, 1.0);

  Matrix expected(3, 3);
  expected << -1, 1, 0, 0, -1, -1, 1, 0, 0;
  CHECK((sys.G - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sys.g[0] == 0.0);
  CHECK(sys.g[1] == 1.0);
  CHECK(sys.g[2] == 0.0);

  // Solving G psi = -g by hand gives (v, u, theta) = (0, 0, 1).
  CHECK(sys.fixed_point_theta()[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stacked fixed point reproduces theta* on the environments") {
  for (const char* name : {"boyan14", "rw5", "rw19", "randmdp(0,20,5)"}) {
    CAPTURE(name);
    const ModelMatrices model = compute_model(make_environment(name));
    const StackedSystem sys = build_stacked(model, 1.0);
    CHECK((sys.fixed_point_theta() - model.theta_star).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("eigenvalue hurwitz verdicts on canonical matrices") {
  const HurwitzResult neg = is_hurwitz_eig(-Matrix::Identity(3, 3));
  CHECK(neg.hurwitz);
  CHECK(neg.max_real_part == doctest::Approx(-1.0));

  Matrix rotation(2, 2);
  rotation << 0, 1, -1, 0;  // purely imaginary spectrum
  CHECK(!is_hurwitz_eig(rotation).hurwitz);
}

TEST_CASE("scalar stacked spectrum matches the cubic-root oracle") {
  const StackedSystem sys = build_stacked(-Matrix::Identity(1, 1), Vector::Ones(1), 1.0);
  const HurwitzResult res = is_hurwitz_eig(sys.G);
  CHECK(res.hurwitz);
  // Characteristic polynomial: lambda^3 + 2 lambda^2 + lambda + 1.
  const double oracle = oracles::cubic_max_real_part(1.0, 2.0, 1.0, 1.0);
  CHECK(res.max_real_part == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("sufficient condition w(w+1) > ||A||^2") {
  CHECK(hurwitz_sufficient(-Matrix::Identity(2, 2), 1.0));  // 2 > 1
  const Matrix big = -std::sqrt(2.5) * Matrix::Identity(2, 2);
  CHECK(!hurwitz_sufficient(big, 1.0));  // 2 < 2.5
  CHECK(!hurwitz_sufficient(-Matrix::Identity(2, 2), -1.0));
}

TEST_CASE("sufficiency containment over random negative-definite systems") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 5);
    const Matrix a_bar = oracles::random_negative_definite(rng, d);
    const double norm = spectral_norm(a_bar);
    // Smallest w with w(w+1) = ||A||^2, plus a random positive margin.
    const double w_min = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * norm * norm));
    const double w = w_min + rng.uniform(0.01, 2.0);
    REQUIRE(hurwitz_sufficient(a_bar, w));
    const StackedSystem sys = build_stacked(a_bar, Vector::Zero(d), w);
    CHECK(is_hurwitz_eig(sys.G).hurwitz);
  }
}

TEST_CASE("determinant identity det(lI - G) = det(l(1+l)(w+l)I + A^T A)") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 4);
    const Matrix a_bar = oracles::random_negative_definite(rng, d);
    const double w = rng.uniform(0.2, 3.0);
    const StackedSystem sys = build_stacked(a_bar, Vector::Zero(d), w);
    const Matrix ata = a_bar.transpose() * a_bar;

    Eigen::EigenSolver<Matrix> eig(sys.G);
    for (int k = 0; k < 20; ++k) {
      std::complex<double> lambda(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
      // Stay away from the spectrum so both determinants are well scaled.
      double dist = 1e300;
      for (int i = 0; i < eig.eigenvalues().size(); ++i)
        dist = std::min(dist, std::abs(lambda - eig.eigenvalues()[i]));
      if (dist < 0.2) {
        --k;
        continue;
      }
      const Eigen::MatrixXcd lhs =
          lambda * Eigen::MatrixXcd::Identity(3 * d, 3 * d) - sys.G.cast<std::complex<double>>();
      const Eigen::MatrixXcd rhs =
          lambda * (1.0 + lambda) * (w + lambda) * Eigen::MatrixXcd::Identity(d, d) +
          ata.cast<std::complex<double>>();
      const std::complex<double> det_lhs = lhs.determinant();
      const std::complex<double> det_rhs = rhs.determinant();
      CHECK(std::abs(det_lhs - det_rhs) <=
            1e-6 * std::max({std::abs(det_lhs), std::abs(det_rhs), 1e-12}));
    }
  }
}

TEST_CASE("noiseless linear contraction runs to the origin") {
  ThreeTSProblem problem;
  problem.d1 = problem.d2 = problem.d3 = 2;
  LinearAffineMap decay;
  decay.Mx = -Matrix::Identity(2, 2);
  decay.My = Matrix::Zero(2, 2);
  decay.Mz = Matrix::Zero(2, 2);
  decay.c = Vector::Zero(2);
  LinearAffineMap decay_y = decay, decay_z = decay;
  decay_y.Mx = Matrix::Zero(2, 2);
  decay_y.My = -Matrix::Identity(2, 2);
  decay_z.Mx = Matrix::Zero(2, 2);
  decay_z.Mz = -Matrix::Identity(2, 2);
  problem.h = decay;
  problem.g = decay_y;
  problem.f = decay_z;
  problem.a = StepSchedule::polynomial(0.3);
  problem.b = StepSchedule::polynomial(0.5);
  problem.c = StepSchedule::polynomial(0.7);
  problem.x0 = Vector::Ones(2);
  problem.y0 = Vector::Ones(2);
  problem.z0 = Vector::Ones(2);

  Rng rng(0);
  Equilibria origin{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  const ThreeTSDiagnostics diag = run_three_ts(problem, 100000, rng, origin);
  CHECK(*diag.dist_x + *diag.dist_y + *diag.dist_z < 1e-3);
  CHECK(diag.sup_norm < 4.0);
}

TEST_CASE("the runner raises a divergence error with the step index") {
  ThreeTSProblem problem;
  problem.d1 = problem.d2 = problem.d3 = 1;
  LinearAffineMap expand;
  expand.Mx = Matrix::Identity(1, 1);
  expand.My = Matrix::Zero(1, 1);
  expand.Mz = Matrix::Zero(1, 1);
  expand.c = Vector::Zero(1);
  LinearAffineMap still = expand;
  still.Mx = Matrix::Zero(1, 1);
  problem.h = expand;  // dx = +x, exponential growth
  problem.g = still;
  problem.f = still;
  problem.a = StepSchedule::polynomial(0.51);
  problem.b = StepSchedule::polynomial(0.7);
  problem.c = StepSchedule::polynomial(0.9);
  problem.x0 = Vector::Ones(1);
  Rng rng(0);
  CHECK_THROWS_AS(run_three_ts(problem, 1000000, rng), DivergenceError);
}

TEST_CASE("condition report walks the momentum instantiations") {
  const Environment env = build_random_walk(5, 0.0, 1.0);
  const ModelMatrices model = compute_model(env);
  const double w = 0.1;

  for (Algo algo : {Algo::gtd, Algo::gtd2, Algo::tdc}) {
    CAPTURE(to_string(algo));
    const ThreeTSProblem problem = make_momentum_problem(algo, env, model, rw5_three_ts());
    const BConditionReport report = check_b_conditions(problem);
    CHECK(report.all_pass());

    // The slow-ode driving matrix in closed form.
    const Matrix c_inv = model.C_bar.fullPivLu().inverse();
    const Matrix expected =
        algo == Algo::gtd
            ? Matrix(-model.A_bar.transpose() * model.A_bar / w)
            : Matrix(-model.A_bar.transpose() * c_inv * model.A_bar / w);
    const Matrix actual = report.lambda_y * report.gamma_z + report.lambda_z;
    CHECK((actual - expected).cwiseAbs().maxCoeff() < 1e-10);

    CHECK((report.z_star - model.theta_star).cwiseAbs().maxCoeff() < 1e-10);
    const Equilibria eq = report.equilibria();
    CHECK(eq.y_star.norm() < 1e-10);
    CHECK(eq.x_star.norm() < 1e-10);
  }
}

TEST_CASE("a positive-definite fast block fails B4(i)") {
  ThreeTSProblem problem;
  problem.d1 = problem.d2 = problem.d3 = 1;
  LinearAffineMap up;
  up.Mx = Matrix::Identity(1, 1);  // expanding, not contracting
  up.My = Matrix::Zero(1, 1);
  up.Mz = Matrix::Zero(1, 1);
  up.c = Vector::Zero(1);
  problem.h = up;
  problem.g = up;
  problem.f = up;
  problem.a = StepSchedule::polynomial(0.6);
  problem.b = StepSchedule::polynomial(0.8);
  problem.c = StepSchedule::polynomial(1.0);
  const BConditionReport report = check_b_conditions(problem);
  bool found = false;
  for (const auto& item : report.items)
    if (item.name == "B4i-x-odes") {
      found = true;
      CHECK(item.verdict == Verdict::fail);
    }
  CHECK(found);
  CHECK(!report.all_pass());
}

TEST_CASE("inverted schedule ordering is flagged by the B2 probe") {
  const Environment env = build_random_walk(5, 0.0, 1.0);
  const ModelMatrices model = compute_model(env);
  ThreeTSProblem problem = make_momentum_problem(Algo::gtd, env, model, rw5_three_ts());
  problem.b = StepSchedule::polynomial(0.125);
  problem.c = StepSchedule::polynomial(0.05);  // c(n)/b(n) grows
  const BConditionReport report = check_b_conditions(problem);
  bool found = false;
  for (const auto& item : report.items)
    if (item.name == "B2-ratios") {
      found = true;
      CHECK(item.verdict == Verdict::fail);
    }
  CHECK(found);
}

TEST_CASE("non-affine maps report as not mechanically checkable") {
  ThreeTSProblem problem;
  problem.d1 = problem.d2 = problem.d3 = 1;
  auto cube = [](const Vector& x, const Vector&, const Vector&) {
    return Vector(-x.array().cube().matrix());
  };
  problem.h.fn = cube;
  problem.g.fn = cube;
  problem.f.fn = cube;
  problem.a = StepSchedule::polynomial(0.6);
  problem.b = StepSchedule::polynomial(0.8);
  problem.c = StepSchedule::polynomial(1.0);
  const BConditionReport report = check_b_conditions(problem);
  REQUIRE(report.items.size() == 1);
  CHECK(report.items[0].verdict == Verdict::not_checkable);
  CHECK(!report.all_pass());
}

TEST_CASE("gtd-m as a generic three-timescale problem stays bounded") {
  const Environment env = build_random_walk(5, 0.0, 1.0);
  const ModelMatrices model = compute_model(env);
  const ThreeTSProblem problem =
      make_momentum_problem(Algo::gtd, env, model, rw5_three_ts());
  Rng rng(3);
  const BConditionReport report = check_b_conditions(problem);
  REQUIRE(report.all_pass());
  // The table-row schedule produces large transient excursions; the run must
  // stay inside the divergence guard and the ratio monitors must decay.
  const ThreeTSDiagnostics diag =
      run_three_ts(problem, 50000, rng, report.equilibria());
  CHECK(diag.sup_norm < kDivergenceGuard);
  REQUIRE(diag.ratio_trace.size() >= 2);
  CHECK(diag.ratio_trace.back()[1] < diag.ratio_trace.front()[1]);
  CHECK(diag.ratio_trace.back()[2] < diag.ratio_trace.front()[2]);
}

TEST_CASE("epsilon perturbation probes accept o(1) and reject constants") {
  const Environment env = build_random_walk(5, 0.0, 1.0);
  const ModelMatrices model = compute_model(env);
  ThreeTSProblem problem = make_momentum_problem(Algo::gtd, env, model, rw5_three_ts());
  problem.eps3 = [&](long n) {
    return Vector::Constant(model.dim(), 1.0 / std::sqrt(n + 1.0));
  };
  CHECK(check_b_conditions(problem).all_pass());

  problem.eps3 = [&](long) { return Vector::Constant(model.dim(), 0.5); };
  const BConditionReport report = check_b_conditions(problem);
  bool found = false;
  for (const auto& item : report.items)
    if (item.name == "B3-eps3-vanishing") {
      found = true;
      CHECK(item.verdict == Verdict::fail);
    }
  CHECK(found);
}

TEST_SUITE_END();

#include "model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <vector>

namespace gtdm {

Matrix induced_chain(const TabularMDP& mdp, const Policy& policy) {
  Matrix P = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double pa = policy.probs(s, a);
      if (pa == 0.0) continue;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) P(s, s2) += pa * mdp.p(s, a, s2);
    }
  return P;
}

Matrix restart_chain(const TabularMDP& mdp, const Policy& policy) {
  Matrix P = induced_chain(mdp, policy);
  for (int s = 0; s < mdp.n_states; ++s)
    if (mdp.is_terminal(s)) P.row(s) = mdp.start_distribution.transpose();
  return P;
}

namespace {

bool irreducible(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  // Boolean transitive closure of the support graph; n is tiny here.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) reach[i][j] = (i == j) || P(i, j) > 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (int j = 0; j < n; ++j)
        if (reach[k][j]) reach[i][j] = true;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!reach[i][j]) return false;
  return true;
}

}  // namespace

Vector stationary_distribution(const Matrix& P, double tol, long max_iter) {
  const int n = static_cast<int>(P.rows());
  if (P.cols() != n) throw NumericalError("stationary_distribution: matrix not square");
  if (!irreducible(P))
    throw NumericalError(
        "stationary_distribution: chain is reducible, no unique stationary "
        "distribution");

  // Iterating d <- ((P+I)/2)^T d keeps the same fixed points but is
  // aperiodic, so e.g. the restart-augmented random walks (period 2)
  // converge. The residual is measured against the original P.
  Vector d = Vector::Constant(n, 1.0 / n);
  double residual = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    Vector next = 0.5 * (P.transpose() * d + d);
    next /= next.sum();
    residual = (P.transpose() * next - next).cwiseAbs().maxCoeff();
    d = next;
    if (residual < tol) return d;
  }
  std::ostringstream msg;
  msg << "stationary_distribution: no convergence in " << max_iter
      << " iterations, residual " << residual;
  throw NumericalError(msg.str());
}

ModelMatrices compute_model(const Environment& env) {
  const TabularMDP& mdp = env.mdp;
  const Matrix& phi = env.features.phi;
  const int n = mdp.n_states;
  const int d = env.features.dim();

  ModelMatrices m;
  m.gamma = mdp.gamma;
  m.P_pi = induced_chain(mdp, env.policy);
  m.d_pi = stationary_distribution(restart_chain(mdp, env.policy));

  // Feature rank restricted to states the chain actually visits; C_bar is
  // only invertible when that restriction still has full column rank.
  {
    int visited = 0;
    Matrix phi_sup(n, d);
    for (int s = 0; s < n; ++s)
      if (m.d_pi[s] > 1e-14) phi_sup.row(visited++) = phi.row(s);
    Eigen::ColPivHouseholderQR<Matrix> qr(phi_sup.topRows(visited));
    if (qr.rank() < d)
      throw NumericalError(
          "compute_model: feature matrix is rank-deficient on visited states");
  }

  m.A_bar = Matrix::Zero(d, d);
  m.b_bar = Vector::Zero(d);
  m.C_bar = Matrix::Zero(d, d);
  m.next_cov = Matrix::Zero(d, d);
  for (int s = 0; s < n; ++s) {
    const double ds = m.d_pi[s];
    if (ds == 0.0) continue;
    const Vector phi_s = phi.row(s).transpose();
    Vector phi_next = Vector::Zero(d);
    for (int s2 = 0; s2 < n; ++s2)
      if (m.P_pi(s, s2) != 0.0) phi_next += m.P_pi(s, s2) * phi.row(s2).transpose();
    double r_mean = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double pa = env.policy.probs(s, a);
      if (pa == 0.0) continue;
      for (int s2 = 0; s2 < n; ++s2) r_mean += pa * mdp.p(s, a, s2) * mdp.r(s, a, s2);
    }
    m.A_bar += ds * phi_s * (mdp.gamma * phi_next - phi_s).transpose();
    m.b_bar += ds * r_mean * phi_s;
    m.C_bar += ds * phi_s * phi_s.transpose();
    m.next_cov += ds * phi_next * phi_s.transpose();
  }

  Eigen::FullPivLU<Matrix> lu(m.A_bar);
  if (!lu.isInvertible())
    throw NumericalError("compute_model: A_bar is singular (negative definiteness violated?)");
  m.theta_star = lu.solve(-m.b_bar);

  const auto c_fact = m.C_bar.ldlt();
  if (c_fact.info() != Eigen::Success || c_fact.vectorD().minCoeff() <= 0.0)
    throw NumericalError("compute_model: C_bar is not positive definite");
  return m;
}

double ModelMatrices::mspbe(const Vector& theta) const {
  const auto c_fact = C_bar.ldlt();
  if (c_fact.info() != Eigen::Success || c_fact.vectorD().minCoeff() <= 0.0)
    throw NumericalError("mspbe: C_bar is not positive definite");
  const Vector expected_update = A_bar * theta + b_bar;
  return expected_update.dot(c_fact.solve(expected_update));
}

double ModelMatrices::rmspbe(const Vector& theta) const {
  return std::sqrt(std::max(0.0, mspbe(theta)));
}

double ModelMatrices::neu(const Vector& theta) const {
  return (A_bar * theta + b_bar).squaredNorm();
}

namespace {

void dump_matrix(std::ostream& out, const char* name, const Matrix& mat) {
  char buf[64];
  out << name << " " << mat.rows() << " " << mat.cols() << "\n";
  for (Eigen::Index i = 0; i < mat.rows(); ++i)
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g%c", mat(i, j),
                    j + 1 == mat.cols() ? '\n' : ' ');
      out << buf;
    }
}

}  // namespace

void dump_model(const ModelMatrices& model, std::ostream& out) {
  dump_matrix(out, "A", model.A_bar);
  dump_matrix(out, "b", model.b_bar);
  dump_matrix(out, "C", model.C_bar);
  dump_matrix(out, "d_pi", model.d_pi);
  dump_matrix(out, "theta_star", model.theta_star);
}

}  // namespace gtdm

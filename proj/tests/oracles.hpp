// Independent reference computations used only by the tests. These follow
// different routes than the library (eigen decompositions instead of power
// iteration, the definitional projector instead of the algebraic objective,
// Cardano instead of a matrix eigensolver) so agreement is meaningful.
#ifndef GTDM_TESTS_ORACLES_HPP
#define GTDM_TESTS_ORACLES_HPP

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace oracles {

using gtdm::Matrix;
using gtdm::Vector;

// Left Perron vector of a row-stochastic matrix via a dense
// eigen-decomposition of P^T: the eigenvector for the eigenvalue closest
// to 1, scaled to a probability vector.
inline Vector stationary_eigen(const Matrix& P) {
  Eigen::EigenSolver<Matrix> solver(P.transpose());
  int best = 0;
  double best_dist = 1e300;
  for (int i = 0; i < solver.eigenvalues().size(); ++i) {
    const double dist = std::abs(solver.eigenvalues()[i] - std::complex<double>(1.0));
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  Vector v = solver.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  return v / v.sum();
}

// Value function of an episodic chain by direct linear solve on the
// non-terminal states, with V = 0 at terminals.
inline Vector bellman_value(const gtdm::TabularMDP& mdp, const gtdm::Policy& policy) {
  const Matrix P = gtdm::induced_chain(mdp, policy);
  const int n = mdp.n_states;
  std::vector<int> interior;
  for (int s = 0; s < n; ++s)
    if (!mdp.is_terminal(s)) interior.push_back(s);
  const int m = static_cast<int>(interior.size());

  Matrix A(m, m);
  Vector rhs(m);
  for (int i = 0; i < m; ++i) {
    const int s = interior[i];
    double r_mean = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a)
      for (int s2 = 0; s2 < n; ++s2)
        r_mean += policy.probs(s, a) * mdp.p(s, a, s2) * mdp.r(s, a, s2);
    rhs[i] = r_mean;
    for (int j = 0; j < m; ++j)
      A(i, j) = (i == j ? 1.0 : 0.0) - mdp.gamma * P(s, interior[j]);
  }
  const Vector v_interior = A.fullPivLu().solve(rhs);
  Vector v = Vector::Zero(n);
  for (int i = 0; i < m; ++i) v[interior[i]] = v_interior[i];
  return v;
}

// The objective straight from its definition: the D-weighted squared norm of
// V_theta minus the projection of its one-step Bellman image onto the
// feature span, with the projector Pi = Phi (Phi^T D Phi)^{-1} Phi^T D.
inline double mspbe_definitional(const Vector& theta, const gtdm::Environment& env,
                                 const gtdm::ModelMatrices& model) {
  const Matrix& phi = env.features.phi;
  const Matrix D = model.d_pi.asDiagonal();
  const Matrix proj =
      phi * (phi.transpose() * D * phi).fullPivLu().solve(phi.transpose() * D);

  const int n = env.mdp.n_states;
  Vector r_pi = Vector::Zero(n);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < env.mdp.n_actions; ++a)
      for (int s2 = 0; s2 < n; ++s2)
        r_pi[s] += env.policy.probs(s, a) * env.mdp.p(s, a, s2) * env.mdp.r(s, a, s2);

  const Vector v = phi * theta;
  const Vector bellman = r_pi + env.mdp.gamma * (model.P_pi * v);
  const Vector err = v - proj * bellman;
  return err.dot(D * err);
}

// Roots of a real cubic a3 x^3 + a2 x^2 + a1 x + a0 by Cardano's method.
inline std::vector<std::complex<double>> cubic_roots(double a3, double a2, double a1,
                                                     double a0) {
  const double b = a2 / a3, c = a1 / a3, d = a0 / a3;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const std::complex<double> shift(-b / 3.0, 0.0);
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(q * q / 4.0 + p * p * p / 27.0));
  std::complex<double> u = std::pow(-q / 2.0 + disc, 1.0 / 3.0);
  if (std::abs(u) < 1e-14) u = std::pow(-q / 2.0 - disc, 1.0 / 3.0);
  const std::complex<double> omega(-0.5, std::sqrt(3.0) / 2.0);
  std::vector<std::complex<double>> roots;
  for (int k = 0; k < 3; ++k) {
    const std::complex<double> uk = u * std::pow(omega, k);
    roots.push_back(uk - p / (3.0 * uk) + shift);
  }
  return roots;
}

inline double cubic_max_real_part(double a3, double a2, double a1, double a0) {
  double best = -1e300;
  for (const auto& r : cubic_roots(a3, a2, a1, a0)) best = std::max(best, r.real());
  return best;
}

// Random negative-definite matrix: -(SPD + skew). The symmetric part is
// -SPD, so x^T A x < 0 for every nonzero x.
inline Matrix random_negative_definite(gtdm::Rng& rng, int d, double eig_lo = 0.1,
                                       double eig_hi = 2.0) {
  Matrix B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(B).householderQ();
  Vector eigs(d);
  for (int i = 0; i < d; ++i) eigs[i] = rng.uniform(eig_lo, eig_hi);
  const Matrix spd = Q * eigs.asDiagonal() * Q.transpose();
  Matrix K(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) K(i, j) = rng.uniform(-1.0, 1.0);
  const Matrix skew = 0.5 * (K - K.transpose());
  return -(spd + skew);
}

inline Vector random_unit(gtdm::Rng& rng, int d) {
  Vector x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.uniform(-1.0, 1.0);
  const double n = x.norm();
  return n > 0 ? Vector(x / n) : random_unit(rng, d);
}

}  // namespace oracles

#endif

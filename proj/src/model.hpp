#ifndef GTDM_MODEL_HPP
#define GTDM_MODEL_HPP

#include <iosfwd>

#include "mdp.hpp"

namespace gtdm {

// Exact model quantities for policy evaluation with linear features, all
// expectations taken under the stationary distribution d_pi:
//   A_bar = E[phi (gamma phi' - phi)^T]    b_bar = E[r phi]
//   C_bar = E[phi phi^T]                   next_cov = E[phi' phi^T]
// theta_star solves A_bar theta + b_bar = 0. Immutable after construction.
struct ModelMatrices {
  Matrix A_bar;
  Vector b_bar;
  Matrix C_bar;
  Matrix next_cov;
  Vector d_pi;
  Vector theta_star;
  double gamma = 0.0;
  Matrix P_pi;  // policy-induced kernel chain (terminal self-loops included)

  int dim() const { return static_cast<int>(A_bar.rows()); }
  Matrix D() const { return Matrix(d_pi.asDiagonal()); }

  // (A theta + b)^T C^{-1} (A theta + b): the projected-Bellman-error
  // objective in its O(d^2) algebraic form.
  double mspbe(const Vector& theta) const;
  double rmspbe(const Vector& theta) const;

  // ||A theta + b||^2, the squared norm of the expected TD update.
  double neu(const Vector& theta) const;
};

// Policy-induced chain P_pi(s'|s) = sum_a pi(a|s) P(s'|s,a).
Matrix induced_chain(const TabularMDP& mdp, const Policy& policy);

// The chain whose stationary distribution defines d_pi: identical to the
// induced chain except terminal rows jump to the start distribution, making
// episodic chains recurrent. Returns the induced chain unchanged when there
// are no terminal states.
Matrix restart_chain(const TabularMDP& mdp, const Policy& policy);

// Left fixed point d^T P = d^T of a row-stochastic matrix, by power
// iteration on the half-lazy chain (P+I)/2 so periodic chains converge too.
// Requires irreducibility (checked structurally); throws NumericalError if
// the chain is reducible or the residual fails to reach tol within max_iter.
Vector stationary_distribution(const Matrix& P, double tol = 1e-12,
                               long max_iter = 1000000);

// Assembles the model matrices for an environment. Throws NumericalError if
// the features are rank-deficient on the visited states or A_bar is
// singular.
ModelMatrices compute_model(const Environment& env);

// Plain-text blocks (A, b, C, d_pi, theta_star) for external diffing.
void dump_model(const ModelMatrices& model, std::ostream& out);

}  // namespace gtdm

#endif

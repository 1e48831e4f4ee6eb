#ifndef GTDM_ALGORITHMS_HPP
#define GTDM_ALGORITHMS_HPP

#include <optional>
#include <string>
#include <vector>

#include "mdp.hpp"

namespace gtdm {

enum class Algo { gtd, gtd2, tdc };
enum class Form { vanilla, two_form, three_form };
enum class Regime { vanilla, one_ts, three_ts };

std::string to_string(Algo a);
std::string to_string(Form f);
std::string to_string(Regime r);
Algo algo_from_string(const std::string& s);
Form form_from_string(const std::string& s);
Regime regime_from_string(const std::string& s);

// Polynomial step-size family alpha_t = (t+1)^-alpha, beta_t = (t+1)^-beta,
// rho_t = (t+1)^-rho, with xi_t = alpha_t / rho_t and momentum parameter
// eta_t = (rho_t - w alpha_t) / rho_{t-1} (rho_{-1} pinned to 1).
//
// Regime contracts:
//   vanilla  — alpha, beta > 0; rho and w unused.
//   one_ts   — xi = beta = rho enforced through alpha = 2 rho (and
//              beta = alpha/2); requires w >= 1. Scale factors c1, c2 give
//              beta_t = c1 xi_t and rho_t = c2 xi_t (defaults 1).
//   three_ts — ordering alpha - rho < beta < rho with w > 0. Exponents
//              outside the square-summable window (1/2, 1] only produce
//              warnings: faster, non-square-summable decays are in common
//              use and converge in practice.
struct ScheduleSpec {
  Regime regime = Regime::vanilla;
  double alpha_exp = 0.0;
  double beta_exp = 0.0;
  double rho_exp = 0.0;
  double w = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;

  // Throws ConfigError on hard violations; returns soft warnings.
  std::vector<std::string> validate() const;
};

struct StepSizes {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double xi = 0.0;
  double eta = 0.0;
};

StepSizes schedule_at(const ScheduleSpec& spec, long t);

// Iterates of one learner. theta_prev backs the two-iterate momentum form,
// v the three-iterate form; at t = 0, theta_prev = theta and v = 0 so the
// first momentum contribution vanishes.
struct LearnerState {
  Vector theta;
  Vector u;
  Vector theta_prev;
  Vector v;
  long t = 0;
};

LearnerState initial_state(int dim, const Vector& theta0 = Vector(),
                           const Vector& u0 = Vector());

// One-step transition functions. All right-hand sides read the pre-update
// state (simultaneous update); gamma is the environment discount. Each
// throws DivergenceError if the result is non-finite or leaves the guard
// region.
LearnerState step_gtd(const LearnerState& s, const Transition& tr,
                      const StepSizes& step, double gamma);
LearnerState step_gtd2(const LearnerState& s, const Transition& tr,
                       const StepSizes& step, double gamma);
LearnerState step_tdc(const LearnerState& s, const Transition& tr,
                      const StepSizes& step, double gamma);
LearnerState step_momentum_two_form(Algo algo, const LearnerState& s,
                                    const Transition& tr, const StepSizes& step,
                                    double gamma);
LearnerState step_momentum_three_form(Algo algo, const LearnerState& s,
                                      const Transition& tr, const StepSizes& step,
                                      double gamma, double w);

// Stochastic update directions at a frozen state, shared by the steppers and
// by the expected-update checks. theta_direction is the vanilla theta step
// direction; u_direction the secondary-iterate direction.
Vector theta_direction(Algo algo, const Transition& tr, double gamma,
                       const Vector& u, const Vector& theta);
Vector u_direction(Algo algo, const Transition& tr, double gamma, const Vector& u,
                   const Vector& theta);

// Bound learner: schedule + stepper + divergence guard around LearnerState.
class Learner {
 public:
  // Momentum forms require a one_ts or three_ts schedule, the vanilla form a
  // vanilla schedule. Throws ConfigError on mismatch or invalid spec.
  Learner(Algo algo, Form form, ScheduleSpec spec, int dim, double gamma,
          const Vector& theta0 = Vector(), const Vector& u0 = Vector());

  void step(const Transition& tr);

  const LearnerState& state() const { return state_; }
  const Vector& theta() const { return state_.theta; }
  long steps() const { return state_.t; }
  Algo algo() const { return algo_; }
  Form form() const { return form_; }
  const ScheduleSpec& schedule() const { return spec_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Algo algo_;
  Form form_;
  ScheduleSpec spec_;
  double gamma_;
  LearnerState state_;
  std::vector<std::string> warnings_;
};

Learner make_learner(Algo algo, Form form, const ScheduleSpec& spec, int dim,
                     double gamma, const Vector& theta0 = Vector(),
                     const Vector& u0 = Vector());

}  // namespace gtdm

#endif

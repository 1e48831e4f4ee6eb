#include "algorithms.hpp"

#include <cmath>
#include <sstream>

namespace gtdm {

std::string to_string(Algo a) {
  switch (a) {
    case Algo::gtd: return "gtd";
    case Algo::gtd2: return "gtd2";
    case Algo::tdc: return "tdc";
  }
  return "?";
}

std::string to_string(Form f) {
  switch (f) {
    case Form::vanilla: return "vanilla";
    case Form::two_form: return "two_form";
    case Form::three_form: return "three_form";
  }
  return "?";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::vanilla: return "vanilla";
    case Regime::one_ts: return "one_ts";
    case Regime::three_ts: return "three_ts";
  }
  return "?";
}

Algo algo_from_string(const std::string& s) {
  if (s == "gtd") return Algo::gtd;
  if (s == "gtd2") return Algo::gtd2;
  if (s == "tdc") return Algo::tdc;
  throw ConfigError("unknown algorithm '" + s + "' (expected gtd, gtd2 or tdc)");
}

Form form_from_string(const std::string& s) {
  if (s == "vanilla") return Form::vanilla;
  if (s == "two_form") return Form::two_form;
  if (s == "three_form") return Form::three_form;
  throw ConfigError("unknown form '" + s + "'");
}

Regime regime_from_string(const std::string& s) {
  if (s == "vanilla") return Regime::vanilla;
  if (s == "one_ts") return Regime::one_ts;
  if (s == "three_ts") return Regime::three_ts;
  throw ConfigError("unknown regime '" + s + "'");
}

namespace {

constexpr double kExpTol = 1e-12;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void warn_square_summability(double exp, const char* name,
                             std::vector<std::string>& warnings) {
  if (exp <= 0.5 || exp > 1.0) {
    std::ostringstream os;
    os << name << " exponent " << exp << " outside (1/2, 1]: step sizes are not "
       << "square-summable";
    warnings.push_back(os.str());
  }
}

}  // namespace

std::vector<std::string> ScheduleSpec::validate() const {
  std::vector<std::string> warnings;
  switch (regime) {
    case Regime::vanilla:
      require(alpha_exp > 0.0 && beta_exp > 0.0,
              "vanilla schedule needs positive alpha/beta exponents");
      break;
    case Regime::one_ts:
      require(alpha_exp > 0.0, "one_ts schedule needs a positive alpha exponent");
      require(std::abs(alpha_exp - 2.0 * rho_exp) <= kExpTol,
              "one_ts requires alpha = 2*rho");
      require(std::abs(beta_exp - alpha_exp / 2.0) <= kExpTol,
              "one_ts requires beta = alpha/2");
      require(w >= 1.0, "one_ts momentum requires w >= 1");
      require(c1 > 0.0 && c2 > 0.0, "one_ts scale factors must be positive");
      warn_square_summability(alpha_exp / 2.0, "common", warnings);
      break;
    case Regime::three_ts: {
      const double xi_exp = alpha_exp - rho_exp;
      require(xi_exp > 0.0, "three_ts requires alpha > rho (so xi decays)");
      require(xi_exp < beta_exp && beta_exp < rho_exp,
              "three_ts requires the ordering alpha - rho < beta < rho");
      require(w > 0.0, "three_ts momentum requires w > 0");
      warn_square_summability(xi_exp, "xi", warnings);
      warn_square_summability(beta_exp, "beta", warnings);
      warn_square_summability(rho_exp, "rho", warnings);
      break;
    }
  }
  return warnings;
}

StepSizes schedule_at(const ScheduleSpec& spec, long t) {
  const double tp1 = static_cast<double>(t + 1);
  StepSizes s;
  s.alpha = std::pow(tp1, -spec.alpha_exp);
  switch (spec.regime) {
    case Regime::vanilla:
      s.beta = std::pow(tp1, -spec.beta_exp);
      s.rho = 1.0;
      s.xi = s.alpha;
      s.eta = 0.0;
      return s;
    case Regime::one_ts: {
      // rho_t = sqrt(c2) (t+1)^{-alpha/2} is the unique polynomial solution
      // of rho_t = c2 xi_t with xi_t = alpha_t / rho_t.
      const double sqrt_c2 = std::sqrt(spec.c2);
      s.rho = sqrt_c2 * std::pow(tp1, -spec.alpha_exp / 2.0);
      s.xi = s.alpha / s.rho;
      s.beta = spec.c1 * s.xi;
      const double rho_prev =
          t == 0 ? 1.0 : sqrt_c2 * std::pow(static_cast<double>(t), -spec.alpha_exp / 2.0);
      s.eta = (s.rho - spec.w * s.alpha) / rho_prev;
      return s;
    }
    case Regime::three_ts: {
      s.beta = std::pow(tp1, -spec.beta_exp);
      s.rho = std::pow(tp1, -spec.rho_exp);
      s.xi = s.alpha / s.rho;
      const double rho_prev =
          t == 0 ? 1.0 : std::pow(static_cast<double>(t), -spec.rho_exp);
      s.eta = (s.rho - spec.w * s.alpha) / rho_prev;
      return s;
    }
  }
  return s;
}

LearnerState initial_state(int dim, const Vector& theta0, const Vector& u0) {
  LearnerState st;
  st.theta = theta0.size() ? theta0 : Vector::Zero(dim);
  st.u = u0.size() ? u0 : Vector::Zero(dim);
  if (st.theta.size() != dim || st.u.size() != dim)
    throw ConfigError("initial vectors do not match the feature dimension");
  st.theta_prev = st.theta;
  st.v = Vector::Zero(dim);
  st.t = 0;
  return st;
}

namespace {

double td_error(const Transition& tr, double gamma, const Vector& theta) {
  return tr.r + gamma * theta.dot(tr.phi_next) - theta.dot(tr.phi);
}

void guard(const LearnerState& s) {
  if (!s.theta.allFinite() || !s.u.allFinite() || !s.v.allFinite() ||
      s.theta.norm() > kDivergenceGuard)
    throw DivergenceError("learner iterate diverged", s.t);
}

}  // namespace

Vector theta_direction(Algo algo, const Transition& tr, double gamma,
                       const Vector& u, const Vector& theta) {
  const double phi_u = tr.phi.dot(u);
  switch (algo) {
    case Algo::gtd:
    case Algo::gtd2:
      return (tr.phi - gamma * tr.phi_next) * phi_u;
    case Algo::tdc:
      return td_error(tr, gamma, theta) * tr.phi - gamma * phi_u * tr.phi_next;
  }
  return Vector();
}

Vector u_direction(Algo algo, const Transition& tr, double gamma, const Vector& u,
                   const Vector& theta) {
  const double delta = td_error(tr, gamma, theta);
  switch (algo) {
    case Algo::gtd:
      return delta * tr.phi - u;
    case Algo::gtd2:
    case Algo::tdc:
      return (delta - tr.phi.dot(u)) * tr.phi;
  }
  return Vector();
}

namespace {

LearnerState step_vanilla(Algo algo, const LearnerState& s, const Transition& tr,
                          const StepSizes& step, double gamma) {
  LearnerState next = s;
  next.theta = s.theta + step.alpha * theta_direction(algo, tr, gamma, s.u, s.theta);
  next.u = s.u + step.beta * u_direction(algo, tr, gamma, s.u, s.theta);
  next.theta_prev = s.theta;
  next.t = s.t + 1;
  guard(next);
  return next;
}

}  // namespace

LearnerState step_gtd(const LearnerState& s, const Transition& tr,
                      const StepSizes& step, double gamma) {
  return step_vanilla(Algo::gtd, s, tr, step, gamma);
}

LearnerState step_gtd2(const LearnerState& s, const Transition& tr,
                       const StepSizes& step, double gamma) {
  return step_vanilla(Algo::gtd2, s, tr, step, gamma);
}

LearnerState step_tdc(const LearnerState& s, const Transition& tr,
                      const StepSizes& step, double gamma) {
  return step_vanilla(Algo::tdc, s, tr, step, gamma);
}

LearnerState step_momentum_two_form(Algo algo, const LearnerState& s,
                                    const Transition& tr, const StepSizes& step,
                                    double gamma) {
  LearnerState next = s;
  next.theta = s.theta + step.alpha * theta_direction(algo, tr, gamma, s.u, s.theta) +
               step.eta * (s.theta - s.theta_prev);
  next.u = s.u + step.beta * u_direction(algo, tr, gamma, s.u, s.theta);
  next.theta_prev = s.theta;
  next.t = s.t + 1;
  guard(next);
  return next;
}

LearnerState step_momentum_three_form(Algo algo, const LearnerState& s,
                                      const Transition& tr, const StepSizes& step,
                                      double gamma, double w) {
  LearnerState next = s;
  next.v =
      s.v + step.xi * (theta_direction(algo, tr, gamma, s.u, s.theta) - w * s.v);
  next.u = s.u + step.beta * u_direction(algo, tr, gamma, s.u, s.theta);
  // theta <- theta + rho v_{t+1} absorbs the epsilon_t = v_{t+1} - v_t
  // correction exactly, keeping the two forms algebraically identical.
  next.theta = s.theta + step.rho * next.v;
  next.theta_prev = s.theta;
  next.t = s.t + 1;
  guard(next);
  return next;
}

Learner::Learner(Algo algo, Form form, ScheduleSpec spec, int dim, double gamma,
                 const Vector& theta0, const Vector& u0)
    : algo_(algo), form_(form), spec_(spec), gamma_(gamma) {
  warnings_ = spec_.validate();
  const bool momentum = form != Form::vanilla;
  const bool momentum_regime = spec.regime != Regime::vanilla;
  if (momentum != momentum_regime)
    throw ConfigError(momentum
                          ? "momentum forms require a one_ts or three_ts schedule"
                          : "the vanilla form requires a vanilla schedule");
  state_ = initial_state(dim, theta0, u0);
}

void Learner::step(const Transition& tr) {
  if (tr.phi.size() != state_.theta.size() ||
      tr.phi_next.size() != state_.theta.size())
    throw ConfigError("transition feature dimension does not match the learner");
  const StepSizes sizes = schedule_at(spec_, state_.t);
  switch (form_) {
    case Form::vanilla:
      switch (algo_) {
        case Algo::gtd: state_ = step_gtd(state_, tr, sizes, gamma_); break;
        case Algo::gtd2: state_ = step_gtd2(state_, tr, sizes, gamma_); break;
        case Algo::tdc: state_ = step_tdc(state_, tr, sizes, gamma_); break;
      }
      break;
    case Form::two_form:
      state_ = step_momentum_two_form(algo_, state_, tr, sizes, gamma_);
      break;
    case Form::three_form:
      state_ = step_momentum_three_form(algo_, state_, tr, sizes, gamma_, spec_.w);
      break;
  }
}

Learner make_learner(Algo algo, Form form, const ScheduleSpec& spec, int dim,
                     double gamma, const Vector& theta0, const Vector& u0) {
  return Learner(algo, form, spec, dim, gamma, theta0, u0);
}

}  // namespace gtdm

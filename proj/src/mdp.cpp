#include "mdp.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace gtdm {

namespace {

constexpr double kProbTol = 1e-12;

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

Policy single_action_policy(int n_states) {
  Policy pi;
  pi.probs = Matrix::Ones(n_states, 1);
  return pi;
}

}  // namespace

void TabularMDP::validate() const {
  check(n_states > 0 && n_actions > 0, "MDP must have positive state/action counts");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0,1]");
  check(static_cast<int>(terminal.size()) == n_states, "terminal flag size mismatch");
  check(start_distribution.size() == n_states, "start distribution size mismatch");
  check(start_distribution.minCoeff() >= 0.0, "start distribution has negative entries");
  check(std::abs(start_distribution.sum() - 1.0) <= kProbTol,
        "start distribution does not sum to 1");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double ps = p(s, a, s2);
        check(ps >= 0.0, "negative transition probability");
        sum += ps;
      }
      check(std::abs(sum - 1.0) <= kProbTol, "transition kernel row does not sum to 1");
      if (is_terminal(s)) {
        check(p(s, a, s) == 1.0 && r(s, a, s) == 0.0,
              "terminal states must self-loop with reward 0");
      }
    }
  }
}

void Policy::validate(const TabularMDP& mdp) const {
  check(probs.rows() == mdp.n_states && probs.cols() == mdp.n_actions,
        "policy shape mismatch");
  check(probs.minCoeff() >= 0.0, "policy has negative probabilities");
  for (int s = 0; s < mdp.n_states; ++s) {
    check(std::abs(probs.row(s).sum() - 1.0) <= kProbTol, "policy row does not sum to 1");
  }
}

Environment build_boyan_chain(int n_states) {
  check(n_states >= 4, "boyan chain needs at least 4 states");
  const int n = n_states;
  const int last = n - 1;  // absorbing

  TabularMDP mdp;
  mdp.n_states = n;
  mdp.n_actions = 1;
  mdp.gamma = 0.95;
  mdp.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n) * n, 0.0);
  mdp.terminal.assign(n, 0);
  mdp.terminal[last] = 1;
  mdp.start_distribution = Vector::Zero(n);
  mdp.start_distribution[0] = 1.0;

  for (int s = 0; s < last - 1; ++s) {
    mdp.p(s, 0, s + 1) = 0.5;
    mdp.p(s, 0, s + 2) = 0.5;
    mdp.r(s, 0, s + 1) = -3.0;
    mdp.r(s, 0, s + 2) = -3.0;
  }
  // Second-to-last state can only step +1; that forced move pays -2.
  mdp.p(last - 1, 0, last) = 1.0;
  mdp.r(last - 1, 0, last) = -2.0;
  mdp.p(last, 0, last) = 1.0;

  // Four hat features anchored evenly over the non-terminal range [0, n-2];
  // anchor rows are one-hot, rows in between are convex combinations of the
  // two flanking anchors. For n = 14 the anchors sit at states 0, 4, 8, 12.
  const int d = 4;
  const double spacing = static_cast<double>(n - 2) / (d - 1);
  FeatureMap fm;
  fm.phi = Matrix::Zero(n, d);
  for (int s = 0; s < last; ++s) {
    for (int k = 0; k < d; ++k) {
      const double dist = std::abs(s - k * spacing) / spacing;
      if (dist < 1.0) fm.phi(s, k) = 1.0 - dist;
    }
  }

  Environment env{"boyan" + std::to_string(n), std::move(mdp), single_action_policy(n),
                  std::move(fm)};
  env.mdp.validate();
  env.policy.validate(env.mdp);
  return env;
}

namespace {

// Overlapping unit-norm ramp: the first ceil(n/2) states accumulate leading
// basis directions, the remaining states shed them from the front. For n = 5
// this is the classic d = 3 set {e1, (e1+e2)/sqrt2, (e1+e2+e3)/sqrt3,
// (e2+e3)/sqrt2, e3}.
Matrix dependent_features(int n_interior) {
  const int d = (n_interior + 1) / 2;
  Matrix phi = Matrix::Zero(n_interior, d);
  for (int i = 0; i < n_interior; ++i) {
    int lo, hi;  // inclusive range of active coordinates
    if (i < d) {
      lo = 0;
      hi = i;
    } else {
      lo = i - d + 1;
      hi = d - 1;
    }
    const double val = 1.0 / std::sqrt(static_cast<double>(hi - lo + 1));
    for (int k = lo; k <= hi; ++k) phi(i, k) = val;
  }
  return phi;
}

}  // namespace

Environment build_random_walk(int n_interior, double left_reward, double right_reward) {
  check(n_interior >= 3 && n_interior % 2 == 1,
        "random walk needs an odd number (>= 3) of interior states");
  const int n = n_interior + 2;  // terminals at 0 and n-1

  TabularMDP mdp;
  mdp.n_states = n;
  mdp.n_actions = 1;
  mdp.gamma = 1.0;
  mdp.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n) * n, 0.0);
  mdp.terminal.assign(n, 0);
  mdp.terminal[0] = 1;
  mdp.terminal[n - 1] = 1;
  mdp.start_distribution = Vector::Zero(n);
  mdp.start_distribution[1 + (n_interior - 1) / 2] = 1.0;

  for (int s = 1; s <= n_interior; ++s) {
    mdp.p(s, 0, s - 1) = 0.5;
    mdp.p(s, 0, s + 1) = 0.5;
  }
  mdp.r(1, 0, 0) = left_reward;
  mdp.r(n_interior, 0, n - 1) = right_reward;
  mdp.p(0, 0, 0) = 1.0;
  mdp.p(n - 1, 0, n - 1) = 1.0;

  FeatureMap fm;
  const Matrix interior = dependent_features(n_interior);
  fm.phi = Matrix::Zero(n, interior.cols());
  fm.phi.middleRows(1, n_interior) = interior;

  Environment env{"rw" + std::to_string(n_interior), std::move(mdp),
                  single_action_policy(n), std::move(fm)};
  env.mdp.validate();
  env.policy.validate(env.mdp);
  return env;
}

Environment build_random_mdp(std::uint64_t seed, int n_states, int n_actions) {
  check(n_states > 0 && n_actions > 0, "random MDP needs positive sizes");
  Rng rng(seed);
  const int n = n_states;
  const int k = n_actions;
  constexpr double kJitter = 1e-5;  // keeps every row strictly positive

  TabularMDP mdp;
  mdp.n_states = n;
  mdp.n_actions = k;
  mdp.gamma = 0.95;
  mdp.transition.assign(static_cast<std::size_t>(n) * k * n, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n) * k * n, 0.0);
  mdp.terminal.assign(n, 0);

  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < k; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n; ++s2) {
        const double w = rng.uniform() + kJitter;
        mdp.p(s, a, s2) = w;
        sum += w;
      }
      for (int s2 = 0; s2 < n; ++s2) mdp.p(s, a, s2) /= sum;
      for (int s2 = 0; s2 < n; ++s2) mdp.r(s, a, s2) = rng.uniform();
    }
  }

  Policy pi;
  pi.probs = Matrix::Zero(n, k);
  for (int s = 0; s < n; ++s) {
    double sum = 0.0;
    for (int a = 0; a < k; ++a) {
      const double w = rng.uniform() + kJitter;
      pi.probs(s, a) = w;
      sum += w;
    }
    pi.probs.row(s) /= sum;
  }

  mdp.start_distribution = Vector::Zero(n);
  {
    double sum = 0.0;
    for (int s = 0; s < n; ++s) {
      const double w = rng.uniform() + kJitter;
      mdp.start_distribution[s] = w;
      sum += w;
    }
    mdp.start_distribution /= sum;
  }

  const int d = 10;
  FeatureMap fm;
  fm.phi = Matrix::Zero(n, d);
  for (int s = 0; s < n; ++s) {
    for (int j = 0; j + 1 < d; ++j) fm.phi(s, j) = rng.uniform(0.0, 10.0);
    fm.phi(s, d - 1) = 1.0;
    fm.phi.row(s) /= fm.phi.row(s).norm();
  }

  Environment env{"randmdp(" + std::to_string(seed) + "," + std::to_string(n) + "," +
                      std::to_string(k) + ")",
                  std::move(mdp), std::move(pi), std::move(fm)};
  env.mdp.validate();
  env.policy.validate(env.mdp);
  return env;
}

Environment make_environment(const std::string& spec) {
  if (spec == "boyan14") return build_boyan_chain(14);
  if (spec.rfind("boyan", 0) == 0) {
    const std::string tail = spec.substr(5);
    try {
      return build_boyan_chain(std::stoi(tail));
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad boyan size in '" + spec + "'");
    }
  }
  if (spec == "rw5") return build_random_walk(5, 0.0, 1.0);
  if (spec == "rw19") return build_random_walk(19, -1.0, 1.0);
  if (spec.rfind("randmdp", 0) == 0) {
    std::uint64_t seed = 0;
    int n = 20, k = 5;
    const std::string tail = spec.substr(7);
    if (!tail.empty()) {
      unsigned long long seed_in = 0;
      if (std::sscanf(tail.c_str(), "(%llu,%d,%d)", &seed_in, &n, &k) != 3)
        throw ConfigError("expected randmdp(seed,n,k), got '" + spec + "'");
      seed = seed_in;
    }
    return build_random_mdp(seed, n, k);
  }
  throw ConfigError("unknown environment '" + spec +
                    "' (expected boyan14, rw5, rw19 or randmdp(seed,n,k))");
}

namespace {

Transition make_transition(const Environment& env, int s, int a, int s2) {
  Transition t;
  t.s = s;
  t.a = a;
  t.s_next = s2;
  t.r = env.mdp.r(s, a, s2);
  t.done = env.mdp.is_terminal(s2);
  t.phi = env.features.row(s);
  t.phi_next = t.done ? Vector::Zero(env.features.dim()) : env.features.row(s2);
  return t;
}

}  // namespace

Episode sample_episode(const Environment& env, Rng& rng, long step_cap) {
  Episode ep;
  Vector row(env.mdp.n_states);
  int s = rng.categorical(env.mdp.start_distribution);
  if (env.mdp.is_terminal(s)) return ep;
  for (long step = 0; step < step_cap; ++step) {
    const int a = rng.categorical(env.policy.probs.row(s).transpose());
    for (int s2 = 0; s2 < env.mdp.n_states; ++s2) row[s2] = env.mdp.p(s, a, s2);
    const int s2 = rng.categorical(row);
    ep.steps.push_back(make_transition(env, s, a, s2));
    if (env.mdp.is_terminal(s2)) return ep;
    s = s2;
  }
  ep.truncated = true;
  return ep;
}

IidSampler::IidSampler(const Environment& env, const Vector& d_pi)
    : env_(&env), d_pi_(d_pi) {
  if (d_pi_.size() != env.mdp.n_states)
    throw ConfigError("stationary distribution size mismatch");
}

Transition IidSampler::sample(Rng& rng) const {
  const Environment& env = *env_;
  const int s = rng.categorical(d_pi_);
  const int a = rng.categorical(env.policy.probs.row(s).transpose());
  Vector row(env.mdp.n_states);
  for (int s2 = 0; s2 < env.mdp.n_states; ++s2) row[s2] = env.mdp.p(s, a, s2);
  const int s2 = rng.categorical(row);
  return make_transition(env, s, a, s2);
}

void dump_environment(const Environment& env, std::ostream& out) {
  char buf[128];
  out << "# environment " << env.name << "\n";
  out << "n_states " << env.mdp.n_states << "\n";
  out << "n_actions " << env.mdp.n_actions << "\n";
  std::snprintf(buf, sizeof(buf), "gamma %.17g\n", env.mdp.gamma);
  out << buf;
  out << "transitions\n";
  for (int s = 0; s < env.mdp.n_states; ++s)
    for (int a = 0; a < env.mdp.n_actions; ++a)
      for (int s2 = 0; s2 < env.mdp.n_states; ++s2) {
        if (env.mdp.p(s, a, s2) == 0.0) continue;
        std::snprintf(buf, sizeof(buf), "%d %d %d %.17g %.17g\n", s, a, s2,
                      env.mdp.p(s, a, s2), env.mdp.r(s, a, s2));
        out << buf;
      }
  out << "terminal";
  for (int s = 0; s < env.mdp.n_states; ++s) out << ' ' << (env.mdp.is_terminal(s) ? 1 : 0);
  out << "\nstart";
  for (int s = 0; s < env.mdp.n_states; ++s) {
    std::snprintf(buf, sizeof(buf), " %.17g", env.mdp.start_distribution[s]);
    out << buf;
  }
  out << "\npolicy\n";
  for (int s = 0; s < env.mdp.n_states; ++s) {
    for (int a = 0; a < env.mdp.n_actions; ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g%c", env.policy.probs(s, a),
                    a + 1 == env.mdp.n_actions ? '\n' : ' ');
      out << buf;
    }
  }
  out << "features\n";
  for (int s = 0; s < env.mdp.n_states; ++s) {
    for (int j = 0; j < env.features.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g%c", env.features.phi(s, j),
                    j + 1 == env.features.dim() ? '\n' : ' ');
      out << buf;
    }
  }
}

}  // namespace gtdm

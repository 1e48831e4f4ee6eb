#ifndef GTDM_MDP_HPP
#define GTDM_MDP_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace gtdm {

// Finite MDP with a dense transition kernel P(s'|s,a) and per-transition
// expected rewards r(s,a,s'). Terminal states self-loop with reward 0 in the
// kernel; episode logic treats them as absorbing.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward;      // [s][a][s']
  std::vector<std::uint8_t> terminal;
  double gamma = 0.0;
  Vector start_distribution;

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a, int s2) const {
    return reward[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& r(int s, int a, int s2) {
    return reward[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  bool is_terminal(int s) const { return terminal[s] != 0; }

  // Checks row-stochasticity, probability signs, gamma range, start
  // distribution normalization and the terminal self-loop convention.
  // Throws ConfigError on violation.
  void validate() const;
};

struct Policy {
  Matrix probs;  // n_states x n_actions, rows sum to 1

  void validate(const TabularMDP& mdp) const;
};

// Per-state feature vectors; row s is phi(s)^T. Terminal states carry the
// zero vector so the TD bootstrap term vanishes at episode end.
struct FeatureMap {
  Matrix phi;  // n_states x d

  int dim() const { return static_cast<int>(phi.cols()); }
  Vector row(int s) const { return phi.row(s).transpose(); }
};

struct Transition {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
  bool done = false;
  Vector phi;
  Vector phi_next;  // zero vector when done
};

// Environment bundle: everything a learner or an exact-model computation
// needs, addressable by name from the CLI and configs.
struct Environment {
  std::string name;
  TabularMDP mdp;
  Policy policy;
  FeatureMap features;
};

// Chain of n_states in a line; from each non-terminal state move +1 or +2
// with equal probability (only +1 where +2 would overshoot). Rewards -3 per
// transition except the forced final step into the absorbing state, which
// pays -2. Spiked features: 4 piecewise-linear hats anchored across the
// non-terminal range; the absorbing state has the zero feature vector.
Environment build_boyan_chain(int n_states);

// Linear arrangement of n_interior states between two absorbing ends; a
// single action moves left/right with equal probability. Exiting left pays
// left_reward, exiting right pays right_reward, all other transitions 0,
// gamma = 1. Episodes start deterministically at the center state.
// Features: the overlapping unit-norm "dependent" ramp of dimension
// ceil((n_interior+1)/2).
Environment build_random_walk(int n_interior, double left_reward, double right_reward);

// Seeded dense random MDP: kernel/policy/start rows are uniform [0,1] draws
// plus 1e-5, row-normalized; rewards uniform [0,1]; gamma = 0.95. Features
// have dimension 10 with the last position pinned to 1, the rest uniform in
// [0,10], each row scaled to unit Euclidean norm.
Environment build_random_mdp(std::uint64_t seed, int n_states, int n_actions);

// Parses "boyan14", "rw5", "rw19" or "randmdp(seed,n,k)" (also "randmdp"
// with defaults 0,20,5). Throws ConfigError for unknown names.
Environment make_environment(const std::string& spec);

struct Episode {
  std::vector<Transition> steps;
  bool truncated = false;  // step cap hit before reaching a terminal state
};

// Samples a trajectory from the start distribution until absorption or
// step_cap transitions (truncated, not an error). An absorbing start state
// yields an empty trajectory.
Episode sample_episode(const Environment& env, Rng& rng, long step_cap = 1000000);

// Draws transitions i.i.d.: s ~ d_pi, a ~ pi(.|s), s' ~ P(.|s,a). The
// stationary distribution is supplied by the caller (see compute_model; for
// episodic chains it is the restart-augmented one).
class IidSampler {
 public:
  IidSampler(const Environment& env, const Vector& d_pi);

  Transition sample(Rng& rng) const;

 private:
  const Environment* env_;
  Vector d_pi_;
};

// Plain-text dump of the kernel (one row `s a s' p r` per nonzero
// transition) plus terminal flags, start distribution, policy and feature
// blocks, for diffing against independent implementations.
void dump_environment(const Environment& env, std::ostream& out);

}  // namespace gtdm

#endif

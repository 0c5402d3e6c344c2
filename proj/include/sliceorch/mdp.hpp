#ifndef SLICEORCH_MDP_HPP_
#define SLICEORCH_MDP_HPP_

#include <string>
#include <vector>

#include "sliceorch/common.hpp"

namespace sliceorch {

struct Transition {
  std::vector<double> state_vec;
  std::vector<double> action_vec;
  double logp = 0.0;
  double reward = 0.0;
  double cost = 0.0;
  bool done = false;
};

// Ordered transitions plus the per-step statistics filled in by
// compute_advantages for both the reward and the cost stream.
struct Trajectory {
  std::vector<Transition> transitions;
  std::vector<double> reward_returns;
  std::vector<double> cost_returns;
  std::vector<double> reward_advantages;
  std::vector<double> cost_advantages;

  size_t size() const { return transitions.size(); }
};

struct DiscountConfig {
  double gamma = 0.99;
  double lambda_gae = 0.95;

  void validate() const {
    if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gamma must be in [0, 1)");
    if (lambda_gae < 0.0 || lambda_gae > 1.0) throw ConfigError("lambda_gae must be in [0, 1]");
  }
};

// Discounted returns, G_t = r_t + gamma * G_{t+1}.
std::vector<double> compute_returns(const std::vector<double>& rewards, double gamma);

// GAE over both streams. reward_values / cost_values carry one bootstrap
// entry beyond the trajectory length (0 when the episode is done).
void compute_advantages(Trajectory& traj,
                        const std::vector<double>& reward_values,
                        const std::vector<double>& cost_values,
                        const DiscountConfig& cfg);

// Shift/scale to mean 0, std 1 (std floored at 1e-8, so constants map to 0).
std::vector<double> normalize_advantages(const std::vector<double>& values);

// JSON record file for offline inspection and the imitation module.
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

}  // namespace sliceorch

#endif  // SLICEORCH_MDP_HPP_

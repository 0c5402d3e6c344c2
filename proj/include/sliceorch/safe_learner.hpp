#ifndef SLICEORCH_SAFE_LEARNER_HPP_
#define SLICEORCH_SAFE_LEARNER_HPP_

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sliceorch/env.hpp"
#include "sliceorch/mdp.hpp"
#include "sliceorch/neural.hpp"

namespace sliceorch {

struct LagrangianState {
  double lambda = 0.0;
  double eta = 0.05;       // sub-gradient step size
  int update_period = 5;   // rollouts between multiplier updates
};

// r - lambda * c
double shaped_reward(double r, double c, const LagrangianState& lag);

// Dual ascent on the average constraint violation, projected to lambda >= 0.
LagrangianState update_multiplier(LagrangianState lag, double avg_cost);

// Ensemble regressor of the immediate constraint value c(s, a). Input is the
// concatenation of state and action vectors; disagreement across members is
// the uncertainty signal for the switching gate.
class CostCritic {
 public:
  CostCritic() = default;
  CostCritic(int state_dim, int action_dim, const std::vector<int>& hidden,
             int ensemble_size, Rng& rng);

  int ensemble_size() const { return static_cast<int>(members_.size()); }
  int input_dim() const { return members_.empty() ? 0 : members_[0].input_dim(); }
  std::vector<ParamFunction>& members() { return members_; }
  const std::vector<ParamFunction>& members() const { return members_; }

  struct Prediction {
    double mean = 0.0;
    double std = 0.0;  // 0 by convention for a single member
  };

  Prediction predict(const std::vector<double>& state_vec,
                     const std::vector<double>& action_vec) const;

  // One regression step per member toward the observed immediate costs.
  // Returns the post-step mean squared error.
  double train_batch(const std::vector<std::vector<double>>& states,
                     const std::vector<std::vector<double>>& actions,
                     const std::vector<double>& costs, double lr);

 private:
  std::vector<ParamFunction> members_;
  std::vector<OptimizerState> opt_;
};

struct SwitchConfig {
  double threshold = 0.0;
  double kappa = 1.0;  // uncertainty multiplier
  bool enabled = true;

  void validate() const {
    if (kappa < 0.0) throw ConfigError("switch kappa must be >= 0");
  }

  bool invoke_baseline(double mean_cost, double std_cost) const {
    return enabled && mean_cost + kappa * std_cost > threshold;
  }
};

// Clipped-surrogate policy loss and its analytic gradient over the policy
// parameters (mean net then log_std, concatenated).
struct SurrogateBatch {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> raw_actions;
  std::vector<double> old_logps;
  std::vector<double> advantages;
};

struct SurrogateResult {
  double loss = 0.0;
  std::vector<double> grad_mean_net;
  std::vector<double> grad_log_std;
  bool valid = true;  // false when a non-finite ratio rejected the batch
};

SurrogateResult surrogate_loss(const SurrogateBatch& batch, const GaussianPolicy& policy,
                               double clip_eps, double entropy_coef);

struct SafeLearnerConfig {
  int iterations = 150;
  int rollout_len = 256;
  int surrogate_epochs = 8;
  int minibatch = 64;
  double clip_eps = 0.2;
  double policy_lr = 3e-4;
  double critic_lr = 1e-3;
  double entropy_coef = 1e-3;
  double init_log_std = std::log(0.3);
  std::vector<int> hidden = {64, 64};  // two hidden layers, per testbed sizing
  int ensemble_size = 5;
  int critic_epochs = 4;
  DiscountConfig discount;
  ExplorationConfig exploration;
  LagrangianState lagrangian;
  SwitchConfig gate;
  std::uint64_t seed = 0;
  int rebalance_period = 10;  // evaluation windows between SLA rebalances

  void validate() const;
};

struct ReportRow {
  int iteration = 0;
  double mean_reward = 0.0;
  double mean_cost = 0.0;
  double violation_rate = 0.0;
  double lambda = 0.0;
  double switch_rate = 0.0;
  // per-agent traces; empty for the single-agent configuration
  std::vector<double> agent_lambda;
  std::vector<double> agent_switch_rate;
  std::vector<double> agent_local_cost;
};

struct TrainingReport {
  std::vector<ReportRow> rows;
  int num_agents = 1;
  bool aborted = false;
  std::string abort_reason;

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
};

// Monolithic safety DRL: one agent orchestrating every domain with the
// global cost stream. Equivalent to train_distributed with a single
// all-domain assignment.
TrainingReport train_safe(SliceEnv& env, const SafeLearnerConfig& cfg,
                          GaussianPolicy* warm_start = nullptr,
                          GaussianPolicy* trained_out = nullptr);

}  // namespace sliceorch

#endif  // SLICEORCH_SAFE_LEARNER_HPP_

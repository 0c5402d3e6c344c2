#ifndef SLICEORCH_MULTI_AGENT_HPP_
#define SLICEORCH_MULTI_AGENT_HPP_

#include <vector>

#include "sliceorch/env.hpp"
#include "sliceorch/safe_learner.hpp"

namespace sliceorch {

struct AgentAssignment {
  int agent_id = 0;
  std::vector<int> domains;  // column indices into the scenario's domain list
  std::vector<int> slices;   // alternative mode: agents own slice rows instead

  bool slice_mode() const { return !slices.empty(); }
};

// Assignments must partition the scenario's domains (disjoint, covering).
void validate_assignments(const std::vector<AgentAssignment>& assignments, int num_domains);

// Default partition: agent 0 = {RAN, EDGE}, agent 1 = {TN}, agent 2 = {CN}.
std::vector<AgentAssignment> default_assignments(const ScenarioConfig& cfg);
std::vector<AgentAssignment> single_assignment(int num_domains);

struct SlaDecomposition {
  Matrix latency_budgets;  // [slice x domain], seconds
};

// budget[k][d] = bound_k * w_d / sum(w); budgets sum exactly to the bound.
SlaDecomposition decompose_sla(const std::vector<SliceSpec>& specs,
                               const std::vector<double>& domain_weights);

// Shift budget toward domains observed over budget, step-limited to 10% of
// each budget per call; per-slice sums never exceed the latency bound.
SlaDecomposition rebalance_sla(const SlaDecomposition& decomp,
                               const Matrix& observed_latency,
                               const std::vector<SliceSpec>& specs);

// Agent observation: scaled rates and backlogs of the owned domains
// (slice-major, domain-minor, each divided by the domain's full service
// rate) followed by the owned latency budgets divided by the slice bound.
std::vector<double> local_view(const NetworkState& state, const AgentAssignment& assignment,
                               const SlaDecomposition& decomp, const ScenarioConfig& cfg);

int local_view_dim(const AgentAssignment& assignment, const ScenarioConfig& cfg);

// Worst margin of the owned per-domain latencies against budgets, combined
// with the global per-slice throughput margin (throughput is a bottleneck
// constraint and is enforced by every agent).
double local_cost(const StepOutcome& outcome, const AgentAssignment& assignment,
                  const SlaDecomposition& decomp, const ScenarioConfig& cfg);

// One agent's learnable components.
struct AgentLearner {
  AgentAssignment assignment;
  GaussianPolicy policy;
  ParamFunction reward_critic;      // local view -> reward value
  ParamFunction cost_value_critic;  // local view -> cost value
  CostCritic gate_critic;           // (view, executed action) -> immediate cost
  OptimizerState opt_mean, opt_log_std, opt_reward_critic, opt_cost_value;
  LagrangianState lag;
  double window_cost_sum = 0.0;
  long window_cost_count = 0;
  int version = 0;
};

// One agent's experience from a synchronized episode batch.
struct AgentBatch {
  Trajectory traj;  // state_vec = local view, action_vec = raw policy action
  std::vector<std::vector<double>> executed_actions;  // flat executed shares
  std::vector<bool> used_baseline;
};

// Synchronized update across all agents: critics, gate critic and clipped
// surrogate. Either every agent advances one version or, on any failure,
// all parameters roll back and the function returns false.
bool aggregate_and_update(std::vector<AgentLearner>& learners,
                          std::vector<AgentBatch>& batches,
                          const SafeLearnerConfig& cfg);

// Distributed safety DRL per-domain agents with central experience
// aggregation. A single all-domain assignment reproduces train_safe
// byte-for-byte.
TrainingReport train_distributed(SliceEnv& env,
                                 const std::vector<AgentAssignment>& assignments,
                                 const SafeLearnerConfig& cfg,
                                 std::vector<GaussianPolicy>* warm_start = nullptr,
                                 std::vector<GaussianPolicy>* trained_out = nullptr);

}  // namespace sliceorch

#endif  // SLICEORCH_MULTI_AGENT_HPP_

#ifndef SLICEORCH_IMITATION_HPP_
#define SLICEORCH_IMITATION_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sliceorch/env.hpp"
#include "sliceorch/multi_agent.hpp"
#include "sliceorch/neural.hpp"

namespace sliceorch {

// Baseline (state, action) pairs for behavior cloning. Views use the
// single-agent local_view encoding so a cloned policy slots directly into
// the safe learner as a warm start.
struct DemonstrationSet {
  struct Record {
    std::vector<double> state_vec;  // local view, all domains
    std::vector<double> shares;     // flat feasible shares, slice-major
  };
  std::vector<Record> records;
  std::uint64_t scenario_hash = 0;
  std::vector<std::uint64_t> seeds;
  int num_slices = 0;
  int num_domains = 0;

  void save(const std::string& path) const;
  static DemonstrationSet load(const std::string& path);
};

// Rolls out the baseline policy across seeds, n_steps each.
DemonstrationSet collect_demonstrations(SliceEnv& env, int n_steps,
                                        const std::vector<std::uint64_t>& seeds);

struct BcResult {
  GaussianPolicy policy;
  std::vector<double> loss_trace;  // one entry per epoch
  bool aborted = false;
};

// Supervised regression of project_action(policy mean) onto the
// demonstrated shares. The policy's log_std is left untouched.
BcResult bc_train(const GaussianPolicy& policy, const DemonstrationSet& demos,
                  int epochs, double lr);

struct ImitationEval {
  double policy_usage = 0.0;    // mean per-step resource usage (-reward)
  double baseline_usage = 0.0;
  double mean_action_gap = 0.0;  // mean elementwise |policy - baseline|
};

// Deterministic (mean-action) policy vs baseline on identical seeds.
ImitationEval evaluate_imitation(const GaussianPolicy& policy, SliceEnv& env,
                                 int episodes, int steps_per_episode,
                                 std::uint64_t seed_base = 10000);

// Mean per-step resource usage of an arbitrary deterministic policy.
double mean_usage(SliceEnv& env, int episodes, int steps, std::uint64_t seed_base,
                  const std::function<AllocationAction(const NetworkState&)>& act);

}  // namespace sliceorch

#endif  // SLICEORCH_IMITATION_HPP_

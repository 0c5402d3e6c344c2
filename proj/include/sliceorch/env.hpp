#ifndef SLICEORCH_ENV_HPP_
#define SLICEORCH_ENV_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sliceorch/common.hpp"

namespace sliceorch {

// Technical domains of the end-to-end chain, in traversal order.
enum class Domain { RAN = 0, TN = 1, CN = 2, EDGE = 3 };

const char* domain_name(Domain d);
Domain domain_from_name(const std::string& name);

struct DomainSpec {
  Domain id = Domain::RAN;
  double capacity = 1.0;      // abstract resource units
  double service_rate = 1.0;  // jobs/sec per resource unit

  double full_rate() const { return capacity * service_rate; }
};

// Sinusoid-plus-noise arrival process, clamped at zero.
struct TrafficModel {
  double base_rate = 0.0;  // jobs/sec
  double amplitude = 0.0;  // jobs/sec
  double period = 50.0;    // timeslots
  double noise_std = 0.0;  // jobs/sec
};

struct SliceSpec {
  int id = 0;
  double latency_bound = 1.0;    // seconds, end-to-end
  double min_throughput = 0.0;   // jobs/sec
  TrafficModel traffic;
};

struct ScenarioConfig {
  std::vector<DomainSpec> domains;
  std::vector<SliceSpec> slices;
  double l_max = 10.0;               // latency cap for unstable queues
  double headroom = 1.2;             // baseline over-provisioning factor
  std::vector<double> weights;       // per-domain usage weights, default 1.0
  std::vector<double> decomp_weights;            // SLA decomposition proxy, default 1.0
  std::vector<std::vector<int>> assignments;     // agent -> domain columns; empty = default

  int num_slices() const { return static_cast<int>(slices.size()); }
  int num_domains() const { return static_cast<int>(domains.size()); }

  // Fills unset weight vectors with 1.0 entries.
  void apply_defaults();

  // Throws ConfigError on violated invariants.
  void validate() const;

  // Strict JSON ingestion: unknown keys rejected, errors carry context.
  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig from_file(const std::string& path);
  std::string to_json_text() const;

  // Stable content hash used to tie demonstration sets to scenarios.
  std::uint64_t hash() const;
};

// MDP state: per-slice, per-domain arrival rates and queue backlogs.
struct NetworkState {
  int t = 0;
  Matrix rates;     // [slice x domain], jobs/sec
  Matrix backlogs;  // [slice x domain], jobs

  // Flat observation: rates slice-major domain-minor, then backlogs likewise.
  std::vector<double> observation() const;
};

// Resource shares a_{m,k} per slice row and domain column, each in [0,1],
// column sums <= 1.
struct AllocationAction {
  Matrix shares;  // [slice x domain]

  bool feasible(double tol = 1e-9) const;
};

struct StepOutcome {
  NetworkState next_state;
  double reward = 0.0;
  double cost = 0.0;
  std::vector<double> per_slice_latency;     // seconds, end-to-end
  std::vector<double> per_slice_throughput;  // jobs/sec
  Matrix domain_latency;                     // [slice x domain], seconds
  bool sla_violated = false;
};

struct BaselineResult {
  AllocationAction action;
  bool saturated = false;  // some domain hit capacity and was renormalized
};

constexpr double kThroughputEps = 1e-6;
constexpr double kSlotSeconds = 1.0;  // one timeslot

// Negated weighted resource usage: r = -sum_m w_m sum_k a_{m,k}.
double reward_fn(const AllocationAction& action, const std::vector<double>& weights);

// Worst SLA margin across slices and dimensions; c <= 0 iff all SLAs met.
double cost_fn(const std::vector<double>& latencies,
               const std::vector<double>& throughputs,
               const std::vector<SliceSpec>& specs);

// Discrete-time sliced-network simulator. Each (slice, domain) pair is an
// M/M/1-style server with rate service_rate * capacity * share; backlog
// carries between slots and adds to effective arrivals, capped at the
// domain's full service rate.
class SliceEnv {
 public:
  explicit SliceEnv(ScenarioConfig cfg);

  const ScenarioConfig& scenario() const { return cfg_; }
  const NetworkState& state() const { return state_; }
  int observation_dim() const { return 2 * cfg_.num_slices() * cfg_.num_domains(); }
  int action_dim() const { return cfg_.num_slices() * cfg_.num_domains(); }

  NetworkState reset(std::uint64_t seed);

  // Advances one slot. Throws FeasibilityError on an infeasible action.
  StepOutcome step(const AllocationAction& action);

  // Rule-based over-provisioning policy; deterministic given the state.
  BaselineResult baseline_policy(const NetworkState& state) const;

 private:
  double effective_arrival(const NetworkState& s, int k, int d) const;
  void sample_rates(NetworkState& s) const;

  ScenarioConfig cfg_;
  NetworkState state_;
  mutable Rng rng_;
};

}  // namespace sliceorch

#endif  // SLICEORCH_ENV_HPP_

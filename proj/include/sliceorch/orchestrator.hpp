#ifndef SLICEORCH_ORCHESTRATOR_HPP_
#define SLICEORCH_ORCHESTRATOR_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sliceorch/env.hpp"
#include "sliceorch/safe_learner.hpp"

namespace sliceorch {

// Per-domain control entity. Read-state and apply-action are its only two
// interaction points; actions reach the network exclusively through commit.
class DomainManager {
 public:
  DomainManager(SliceEnv& env, int domain_index);

  const DomainSpec& domain() const;

  struct DomainState {
    std::vector<double> rates;     // one entry per slice
    std::vector<double> backlogs;  // one entry per slice
  };

  DomainState read_state() const;
  void apply_action(const std::vector<double>& shares_column);

  bool has_pending() const { return has_pending_; }
  const std::vector<double>& pending() const { return pending_; }
  long applied_count() const { return applied_; }
  void clear_pending() { has_pending_ = false; }

 private:
  SliceEnv* env_;
  int domain_index_;
  std::vector<double> pending_;
  bool has_pending_ = false;
  long applied_ = 0;
};

// Desk-scale NSMF: coordinates one DomainManager per domain and is the only
// path through which the simulated network advances.
class EndToEndOrchestrator {
 public:
  explicit EndToEndOrchestrator(SliceEnv& env);

  SliceEnv& env() { return *env_; }
  DomainManager& manager(int domain_index) { return managers_[domain_index]; }
  int num_domains() const { return static_cast<int>(managers_.size()); }

  // Splits the action into per-domain columns, hands each to its manager,
  // then advances the network one slot.
  StepOutcome apply(const AllocationAction& action);

  // Advances once all managers hold a pending column.
  StepOutcome commit();

  long steps_taken() const { return steps_; }

 private:
  SliceEnv* env_;
  std::vector<DomainManager> managers_;
  long steps_ = 0;
};

enum class Algorithm { Safe, Distributed, ImitationSafe, BaselineOnly };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct ExperimentConfig {
  std::string scenario_path;
  ScenarioConfig scenario;
  Algorithm algorithm = Algorithm::Safe;
  std::vector<std::uint64_t> seeds = {0};
  SafeLearnerConfig learner;
  int bc_epochs = 300;
  double bc_lr = 1e-3;
  int demo_steps = 10000;
  int baseline_steps = 100;  // rollout length for baseline-only runs
  std::string out_dir = "runs";

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& scenario_base_dir = "");
  std::string manifest_json() const;
};

struct ExperimentResult {
  std::vector<std::string> report_paths;
  std::vector<std::string> checkpoint_paths;
  bool ok = true;
  std::string error;
};

// One output directory per (algorithm, seed) with CSV report, manifest and
// checkpoints. Deterministic: equal manifests produce equal outputs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CdfPoint {
  double level = 0.0;
  double cumulative_probability = 0.0;
};

// Empirical CDF over the per-iteration violation rates of a set of reports.
std::vector<CdfPoint> violation_cdf(const std::vector<std::string>& report_paths);

std::vector<double> read_report_column(const std::string& path, const std::string& column);

void write_cdf_csv(const std::vector<std::pair<std::string, std::vector<CdfPoint>>>& schemes,
                   std::ostream& os);

}  // namespace sliceorch

#endif  // SLICEORCH_ORCHESTRATOR_HPP_

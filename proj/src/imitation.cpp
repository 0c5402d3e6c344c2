#include "sliceorch/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sliceorch {

using nlohmann::json;

void DemonstrationSet::save(const std::string& path) const {
  json root;
  root["format"] = "sliceorch-demos-v1";
  root["scenario_hash"] = scenario_hash;
  root["seeds"] = seeds;
  root["num_slices"] = num_slices;
  root["num_domains"] = num_domains;
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back({{"state", r.state_vec}, {"shares", r.shares}});
  root["records"] = recs;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open demonstration file for writing: " + path);
  out << root.dump();
}

DemonstrationSet DemonstrationSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open demonstration file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (root.value("format", "") != "sliceorch-demos-v1")
    throw ConfigError(path + ": not a sliceorch demonstration file");
  DemonstrationSet set;
  set.scenario_hash = root["scenario_hash"].get<std::uint64_t>();
  set.seeds = root["seeds"].get<std::vector<std::uint64_t>>();
  set.num_slices = root["num_slices"].get<int>();
  set.num_domains = root["num_domains"].get<int>();
  for (const auto& jr : root["records"]) {
    DemonstrationSet::Record r;
    r.state_vec = jr["state"].get<std::vector<double>>();
    r.shares = jr["shares"].get<std::vector<double>>();
    set.records.push_back(std::move(r));
  }
  return set;
}

DemonstrationSet collect_demonstrations(SliceEnv& env, int n_steps,
                                        const std::vector<std::uint64_t>& seeds) {
  if (n_steps < 1) throw ConfigError("collect_demonstrations: n_steps must be >= 1");
  if (seeds.empty()) throw ConfigError("collect_demonstrations: at least one seed required");
  const ScenarioConfig& scen = env.scenario();
  SlaDecomposition decomp = decompose_sla(scen.slices, scen.decomp_weights);
  AgentAssignment all = single_assignment(scen.num_domains())[0];

  DemonstrationSet set;
  set.scenario_hash = scen.hash();
  set.seeds = seeds;
  set.num_slices = scen.num_slices();
  set.num_domains = scen.num_domains();
  for (std::uint64_t seed : seeds) {
    env.reset(seed);
    for (int t = 0; t < n_steps; ++t) {
      NetworkState state = env.state();
      BaselineResult base = env.baseline_policy(state);
      DemonstrationSet::Record r;
      r.state_vec = local_view(state, all, decomp, scen);
      r.shares = base.action.shares.data();
      set.records.push_back(std::move(r));
      env.step(base.action);
    }
  }
  return set;
}

BcResult bc_train(const GaussianPolicy& policy, const DemonstrationSet& demos,
                  int epochs, double lr) {
  if (demos.records.empty()) throw ConfigError("bc_train: empty demonstration set");
  const int act_dim = policy.mean_net.output_dim();
  if (static_cast<int>(demos.records[0].shares.size()) != act_dim)
    throw DimensionError("bc_train: action dimension mismatch");
  if (static_cast<int>(demos.records[0].state_vec.size()) != policy.mean_net.input_dim())
    throw DimensionError("bc_train: state dimension mismatch");

  const int K = demos.num_slices;
  const int D = demos.num_domains;
  if (K < 1 || D < 1 || K * D != act_dim)
    throw DimensionError("bc_train: demonstration set lacks a consistent slice/domain shape");

  BcResult res;
  res.policy = policy;
  OptimizerState opt;

  constexpr size_t kBatch = 256;
  const size_t n = demos.records.size();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < n; start += kBatch) {
      size_t stop = std::min(n, start + kBatch);
      const double bn = static_cast<double>(stop - start);
      std::vector<double> grads(res.policy.mean_net.params().size(), 0.0);
      double loss = 0.0;
      for (size_t i = start; i < stop; ++i) {
        const auto& rec = demos.records[i];
        std::vector<double> raw = res.policy.mean(rec.state_vec);
        Matrix proj = project_action(raw, K, D);
        std::vector<double> gshares(static_cast<size_t>(act_dim));
        for (int j = 0; j < act_dim; ++j) {
          double diff = proj.data()[j] - rec.shares[j];
          loss += diff * diff / (bn * act_dim);
          gshares[j] = 2.0 * diff / (bn * act_dim);
        }
        std::vector<double> graw = project_action_backward(raw, gshares, K, D);
        std::vector<double> g = res.policy.mean_net.backward(rec.state_vec, graw);
        for (size_t j = 0; j < grads.size(); ++j) grads[j] += g[j];
      }
      if (!std::isfinite(loss)) {
        res.aborted = true;
        return res;
      }
      epoch_loss += loss;
      ++batches;
      if (lr > 0.0) grad_step(res.policy.mean_net.params(), grads, opt, lr);
    }
    res.loss_trace.push_back(epoch_loss / static_cast<double>(batches));
  }
  return res;
}

double mean_usage(SliceEnv& env, int episodes, int steps, std::uint64_t seed_base,
                  const std::function<AllocationAction(const NetworkState&)>& act) {
  double usage = 0.0;
  long count = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(seed_base + static_cast<std::uint64_t>(ep));
    for (int t = 0; t < steps; ++t) {
      StepOutcome out = env.step(act(env.state()));
      usage += -out.reward;
      ++count;
    }
  }
  return usage / static_cast<double>(count);
}

ImitationEval evaluate_imitation(const GaussianPolicy& policy, SliceEnv& env,
                                 int episodes, int steps_per_episode,
                                 std::uint64_t seed_base) {
  if (episodes < 1) throw ConfigError("evaluate_imitation: episodes must be >= 1");
  const ScenarioConfig& scen = env.scenario();
  const int K = scen.num_slices();
  const int D = scen.num_domains();
  SlaDecomposition decomp = decompose_sla(scen.slices, scen.decomp_weights);
  AgentAssignment all = single_assignment(D)[0];

  auto policy_action = [&](const NetworkState& s) {
    std::vector<double> view = local_view(s, all, decomp, scen);
    AllocationAction a;
    a.shares = project_action(policy.mean(view), K, D);
    return a;
  };
  auto baseline_action = [&](const NetworkState& s) { return env.baseline_policy(s).action; };

  ImitationEval eval;
  eval.policy_usage = mean_usage(env, episodes, steps_per_episode, seed_base, policy_action);
  eval.baseline_usage = mean_usage(env, episodes, steps_per_episode, seed_base, baseline_action);

  // action gap measured on the baseline's visited states
  double gap = 0.0;
  long count = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(seed_base + static_cast<std::uint64_t>(ep));
    for (int t = 0; t < steps_per_episode; ++t) {
      NetworkState s = env.state();
      AllocationAction pa = policy_action(s);
      AllocationAction ba = baseline_action(s);
      for (int j = 0; j < K * D; ++j)
        gap += std::abs(pa.shares.data()[j] - ba.shares.data()[j]);
      count += K * D;
      env.step(ba);
    }
  }
  eval.mean_action_gap = gap / static_cast<double>(count);
  return eval;
}

}  // namespace sliceorch

#include "sliceorch/mdp.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sliceorch {

using nlohmann::json;

std::vector<double> compute_returns(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty()) throw DimensionError("compute_returns: empty reward list");
  std::vector<double> returns(rewards.size());
  double g = 0.0;
  for (size_t i = rewards.size(); i-- > 0;) {
    g = rewards[i] + gamma * g;
    returns[i] = g;
  }
  return returns;
}

namespace {
// values carries the bootstrap entry at index n (0 when the episode ended).
void gae_stream(const std::vector<double>& signal, const std::vector<double>& values,
                const DiscountConfig& cfg,
                std::vector<double>& advantages, std::vector<double>& returns) {
  const size_t n = signal.size();
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double adv = 0.0;
  for (size_t i = n; i-- > 0;) {
    double delta = signal[i] + cfg.gamma * values[i + 1] - values[i];
    adv = delta + cfg.gamma * cfg.lambda_gae * adv;
    advantages[i] = adv;
    returns[i] = adv + values[i];
  }
}
}  // namespace

void compute_advantages(Trajectory& traj,
                        const std::vector<double>& reward_values,
                        const std::vector<double>& cost_values,
                        const DiscountConfig& cfg) {
  cfg.validate();
  const size_t n = traj.size();
  if (n == 0) throw DimensionError("compute_advantages: empty trajectory");
  if (reward_values.size() != n + 1 || cost_values.size() != n + 1)
    throw DimensionError("compute_advantages: values must have length |transitions| + 1");

  std::vector<double> rewards(n), costs(n);
  for (size_t i = 0; i < n; ++i) {
    rewards[i] = traj.transitions[i].reward;
    costs[i] = traj.transitions[i].cost;
  }
  gae_stream(rewards, reward_values, cfg, traj.reward_advantages, traj.reward_returns);
  gae_stream(costs, cost_values, cfg, traj.cost_advantages, traj.cost_returns);
}

std::vector<double> normalize_advantages(const std::vector<double>& values) {
  const size_t n = values.size();
  if (n < 2) throw DimensionError("normalize_advantages: need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  double std = std::sqrt(var / static_cast<double>(n));
  std = std::max(std, 1e-8);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = (values[i] - mean) / std;
  return out;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  json root;
  root["format"] = "sliceorch-trajectory-v1";
  json steps = json::array();
  for (const auto& t : traj.transitions) {
    steps.push_back({{"state", t.state_vec},
                     {"action", t.action_vec},
                     {"logp", t.logp},
                     {"reward", t.reward},
                     {"cost", t.cost},
                     {"done", t.done}});
  }
  root["transitions"] = steps;
  if (!traj.reward_advantages.empty()) {
    root["reward_returns"] = traj.reward_returns;
    root["cost_returns"] = traj.cost_returns;
    root["reward_advantages"] = traj.reward_advantages;
    root["cost_advantages"] = traj.cost_advantages;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trajectory file for writing: " + path);
  out << root.dump();
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (root.value("format", "") != "sliceorch-trajectory-v1")
    throw ConfigError(path + ": not a sliceorch trajectory file");
  Trajectory traj;
  for (const auto& js : root["transitions"]) {
    Transition t;
    t.state_vec = js["state"].get<std::vector<double>>();
    t.action_vec = js["action"].get<std::vector<double>>();
    t.logp = js["logp"].get<double>();
    t.reward = js["reward"].get<double>();
    t.cost = js["cost"].get<double>();
    t.done = js["done"].get<bool>();
    traj.transitions.push_back(std::move(t));
  }
  if (root.contains("reward_advantages")) {
    traj.reward_returns = root["reward_returns"].get<std::vector<double>>();
    traj.cost_returns = root["cost_returns"].get<std::vector<double>>();
    traj.reward_advantages = root["reward_advantages"].get<std::vector<double>>();
    traj.cost_advantages = root["cost_advantages"].get<std::vector<double>>();
  }
  return traj;
}

}  // namespace sliceorch

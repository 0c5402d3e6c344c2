#include "sliceorch/safe_learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sliceorch/multi_agent.hpp"

namespace sliceorch {

double shaped_reward(double r, double c, const LagrangianState& lag) {
  return r - lag.lambda * c;
}

LagrangianState update_multiplier(LagrangianState lag, double avg_cost) {
  lag.lambda = std::max(0.0, lag.lambda + lag.eta * avg_cost);
  return lag;
}

CostCritic::CostCritic(int state_dim, int action_dim, const std::vector<int>& hidden,
                       int ensemble_size, Rng& rng) {
  if (ensemble_size < 1) throw ConfigError("cost critic ensemble size must be >= 1");
  std::vector<int> sizes;
  sizes.push_back(state_dim + action_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  for (int e = 0; e < ensemble_size; ++e) {
    members_.emplace_back(sizes);
    members_.back().init(rng);
  }
  opt_.resize(ensemble_size);
}

CostCritic::Prediction CostCritic::predict(const std::vector<double>& state_vec,
                                           const std::vector<double>& action_vec) const {
  if (members_.empty()) throw DimensionError("predict_cost: empty ensemble");
  std::vector<double> in = state_vec;
  in.insert(in.end(), action_vec.begin(), action_vec.end());
  if (static_cast<int>(in.size()) != members_[0].input_dim())
    throw DimensionError("predict_cost: state+action dimension mismatch");
  Prediction p;
  std::vector<double> preds(members_.size());
  for (size_t e = 0; e < members_.size(); ++e) {
    preds[e] = members_[e].forward(in)[0];
    p.mean += preds[e];
  }
  p.mean /= static_cast<double>(members_.size());
  if (members_.size() > 1) {
    double var = 0.0;
    for (double v : preds) var += (v - p.mean) * (v - p.mean);
    p.std = std::sqrt(var / static_cast<double>(members_.size()));
  }
  return p;
}

double CostCritic::train_batch(const std::vector<std::vector<double>>& states,
                               const std::vector<std::vector<double>>& actions,
                               const std::vector<double>& costs, double lr) {
  const size_t n = states.size();
  if (n == 0 || actions.size() != n || costs.size() != n)
    throw DimensionError("train_cost_critic: batch size mismatch");
  if (!all_finite(costs)) throw FeasibilityError("train_cost_critic: non-finite targets");

  std::vector<std::vector<double>> inputs(n);
  for (size_t i = 0; i < n; ++i) {
    inputs[i] = states[i];
    inputs[i].insert(inputs[i].end(), actions[i].begin(), actions[i].end());
  }

  for (size_t e = 0; e < members_.size(); ++e) {
    std::vector<double> grads(members_[e].params().size(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      double pred = members_[e].forward(inputs[i])[0];
      double up = 2.0 * (pred - costs[i]) / static_cast<double>(n);
      std::vector<double> g = members_[e].backward(inputs[i], {up});
      for (size_t j = 0; j < grads.size(); ++j) grads[j] += g[j];
    }
    grad_step(members_[e].params(), grads, opt_[e], lr);
  }

  double mse = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& m : members_) mean += m.forward(inputs[i])[0];
    mean /= static_cast<double>(members_.size());
    mse += (mean - costs[i]) * (mean - costs[i]);
  }
  return mse / static_cast<double>(n);
}

SurrogateResult surrogate_loss(const SurrogateBatch& batch, const GaussianPolicy& policy,
                               double clip_eps, double entropy_coef) {
  const size_t n = batch.states.size();
  if (n == 0 || batch.raw_actions.size() != n || batch.old_logps.size() != n ||
      batch.advantages.size() != n)
    throw DimensionError("surrogate_loss: batch field lengths differ");

  SurrogateResult res;
  res.grad_mean_net.assign(policy.mean_net.params().size(), 0.0);
  res.grad_log_std.assign(policy.log_std.size(), 0.0);

  std::vector<double> sd = policy.stds();
  double obj_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> mu = policy.mean(batch.states[i]);
    double logp = gaussian_logp(batch.raw_actions[i], mu, sd);
    double ratio = std::exp(logp - batch.old_logps[i]);
    if (!std::isfinite(ratio)) {
      res.valid = false;
      return res;
    }
    double a = batch.advantages[i];
    double clipped = clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    obj_sum += std::min(ratio * a, clipped * a);

    // gradient flows only where the unclipped term is active
    bool active = !((a > 0.0 && ratio > 1.0 + clip_eps) || (a < 0.0 && ratio < 1.0 - clip_eps));
    if (active) {
      double scale = -ratio * a / static_cast<double>(n);  // d(-obj)/d logp
      std::vector<double> dmu = gaussian_logp_grad_mean(batch.raw_actions[i], mu, sd);
      for (double& v : dmu) v *= scale;
      std::vector<double> g = policy.mean_net.backward(batch.states[i], dmu);
      for (size_t j = 0; j < g.size(); ++j) res.grad_mean_net[j] += g[j];
      std::vector<double> dls = gaussian_logp_grad_log_std(batch.raw_actions[i], mu, sd);
      for (size_t j = 0; j < dls.size(); ++j) res.grad_log_std[j] += scale * dls[j];
    }
  }

  // Gaussian entropy bonus: H = sum_i (log_std_i + 0.5 ln(2*pi*e))
  double entropy = 0.0;
  for (double ls : policy.log_std) entropy += ls + 0.5 * (1.8378770664093453 + 1.0);
  res.loss = -obj_sum / static_cast<double>(n) - entropy_coef * entropy;
  for (size_t j = 0; j < res.grad_log_std.size(); ++j) res.grad_log_std[j] -= entropy_coef;

  if (!std::isfinite(res.loss) || !all_finite(res.grad_mean_net) ||
      !all_finite(res.grad_log_std))
    res.valid = false;
  return res;
}

void SafeLearnerConfig::validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (rollout_len < 1) throw ConfigError("rollout_len must be >= 1");
  if (surrogate_epochs < 0) throw ConfigError("surrogate_epochs must be >= 0");
  if (minibatch < 1) throw ConfigError("minibatch must be >= 1");
  if (clip_eps <= 0.0 || clip_eps >= 1.0) throw ConfigError("clip_eps must be in (0, 1)");
  if (policy_lr <= 0.0 || critic_lr <= 0.0) throw ConfigError("learning rates must be > 0");
  if (ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
  if (lagrangian.lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (lagrangian.eta < 0.0) throw ConfigError("eta must be >= 0");
  if (lagrangian.update_period < 1) throw ConfigError("update_period must be >= 1");
  if (rebalance_period < 1) throw ConfigError("rebalance_period must be >= 1");
  discount.validate();
  exploration.validate();
  gate.validate();
}

namespace {
std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}
}  // namespace

void TrainingReport::write_csv(std::ostream& os) const {
  os << "iteration,mean_reward,mean_cost,violation_rate,lambda,switch_rate";
  if (num_agents > 1) {
    for (int a = 0; a < num_agents; ++a)
      os << ",agent_" << a << "_lambda,agent_" << a << "_switch_rate,agent_" << a
         << "_local_cost";
  }
  os << "\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << fmt(r.mean_reward) << ',' << fmt(r.mean_cost) << ','
       << fmt(r.violation_rate) << ',' << fmt(r.lambda) << ',' << fmt(r.switch_rate);
    if (num_agents > 1) {
      for (int a = 0; a < num_agents; ++a)
        os << ',' << fmt(r.agent_lambda[a]) << ',' << fmt(r.agent_switch_rate[a]) << ','
           << fmt(r.agent_local_cost[a]);
    }
    os << "\n";
  }
}

std::string TrainingReport::to_csv() const {
  std::ostringstream ss;
  write_csv(ss);
  return ss.str();
}

TrainingReport train_safe(SliceEnv& env, const SafeLearnerConfig& cfg,
                          GaussianPolicy* warm_start, GaussianPolicy* trained_out) {
  auto assignments = single_assignment(env.scenario().num_domains());
  std::vector<GaussianPolicy> warm;
  if (warm_start) warm.push_back(*warm_start);
  std::vector<GaussianPolicy> trained;
  TrainingReport report = train_distributed(env, assignments, cfg,
                                            warm_start ? &warm : nullptr,
                                            trained_out ? &trained : nullptr);
  if (trained_out && !trained.empty()) *trained_out = std::move(trained[0]);
  return report;
}

}  // namespace sliceorch

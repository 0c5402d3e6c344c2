#include "sliceorch/multi_agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sliceorch/orchestrator.hpp"

namespace sliceorch {

void validate_assignments(const std::vector<AgentAssignment>& assignments, int num_domains) {
  if (assignments.empty()) throw ConfigError("at least one agent assignment required");
  bool slice_mode = assignments[0].slice_mode();
  for (const auto& a : assignments)
    if (a.slice_mode() != slice_mode)
      throw ConfigError("assignments must be uniformly by-domain or by-slice");
  if (slice_mode) return;  // slice coverage is checked against the scenario by the engine
  std::vector<int> seen(num_domains, 0);
  for (const auto& a : assignments) {
    if (a.domains.empty()) throw ConfigError("agent " + std::to_string(a.agent_id) +
                                             " owns no domains");
    for (int d : a.domains) {
      if (d < 0 || d >= num_domains)
        throw ConfigError("assignment references domain index out of range");
      ++seen[d];
    }
  }
  for (int d = 0; d < num_domains; ++d)
    if (seen[d] != 1)
      throw ConfigError("assignments must partition the domain set (domain " +
                        std::to_string(d) + " covered " + std::to_string(seen[d]) + "x)");
}

std::vector<AgentAssignment> default_assignments(const ScenarioConfig& cfg) {
  if (!cfg.assignments.empty()) {
    std::vector<AgentAssignment> out;
    for (size_t i = 0; i < cfg.assignments.size(); ++i)
      out.push_back({static_cast<int>(i), cfg.assignments[i], {}});
    validate_assignments(out, cfg.num_domains());
    return out;
  }
  // Fig-style default: {RAN, EDGE}, {TN}, {CN}, restricted to present domains.
  std::vector<std::vector<Domain>> groups = {
      {Domain::RAN, Domain::EDGE}, {Domain::TN}, {Domain::CN}};
  std::vector<AgentAssignment> out;
  for (const auto& g : groups) {
    AgentAssignment a;
    a.agent_id = static_cast<int>(out.size());
    for (Domain id : g)
      for (int d = 0; d < cfg.num_domains(); ++d)
        if (cfg.domains[d].id == id) a.domains.push_back(d);
    if (!a.domains.empty()) out.push_back(std::move(a));
  }
  validate_assignments(out, cfg.num_domains());
  return out;
}

std::vector<AgentAssignment> single_assignment(int num_domains) {
  AgentAssignment a;
  a.agent_id = 0;
  for (int d = 0; d < num_domains; ++d) a.domains.push_back(d);
  return {a};
}

namespace {
// Scales a budget row down until it sums to at most the bound. The plain
// proportional formula can overshoot by a few ULPs, which would break the
// per-slice budget guarantee.
void cap_budget_row(Matrix& budgets, int k, double bound) {
  const int D = budgets.cols();
  double sum = 0.0;
  for (int d = 0; d < D; ++d) sum += budgets(k, d);
  while (sum > bound) {
    double scale = bound / sum;
    if (!(scale < 1.0)) scale = std::nextafter(1.0, 0.0);
    for (int d = 0; d < D; ++d) budgets(k, d) *= scale;
    double next = 0.0;
    for (int d = 0; d < D; ++d) next += budgets(k, d);
    if (next >= sum) {
      for (int d = 0; d < D; ++d) budgets(k, d) = std::nextafter(budgets(k, d), 0.0);
      next = 0.0;
      for (int d = 0; d < D; ++d) next += budgets(k, d);
    }
    sum = next;
  }
}
}  // namespace

SlaDecomposition decompose_sla(const std::vector<SliceSpec>& specs,
                               const std::vector<double>& domain_weights) {
  if (domain_weights.empty()) throw ConfigError("decompose_sla: empty weights");
  double wsum = 0.0;
  for (double w : domain_weights) {
    if (w <= 0.0) throw ConfigError("decompose_sla: weights must be > 0");
    wsum += w;
  }
  SlaDecomposition out;
  out.latency_budgets = Matrix(static_cast<int>(specs.size()),
                               static_cast<int>(domain_weights.size()));
  for (size_t k = 0; k < specs.size(); ++k)
    for (size_t d = 0; d < domain_weights.size(); ++d)
      out.latency_budgets(static_cast<int>(k), static_cast<int>(d)) =
          specs[k].latency_bound * domain_weights[d] / wsum;
  for (size_t k = 0; k < specs.size(); ++k)
    cap_budget_row(out.latency_budgets, static_cast<int>(k), specs[k].latency_bound);
  return out;
}

SlaDecomposition rebalance_sla(const SlaDecomposition& decomp,
                               const Matrix& observed_latency,
                               const std::vector<SliceSpec>& specs) {
  const int K = decomp.latency_budgets.rows();
  const int D = decomp.latency_budgets.cols();
  if (observed_latency.rows() != K || observed_latency.cols() != D)
    throw DimensionError("rebalance_sla: observation shape mismatch");

  constexpr double kStepCap = 0.10;  // at most 10% of a budget moves per call
  SlaDecomposition out = decomp;
  for (int k = 0; k < K; ++k) {
    double total_need = 0.0, total_slack = 0.0;
    for (int d = 0; d < D; ++d) {
      double diff = observed_latency(k, d) - decomp.latency_budgets(k, d);
      if (diff > 0.0) total_need += diff;
      else total_slack += -diff;
    }
    if (total_need <= 0.0 || total_slack <= 0.0) continue;
    double transfer = std::min(total_need, total_slack);
    // collect from slack domains, each capped at 10% of its budget
    double collected = 0.0;
    std::vector<double> give(D, 0.0);
    for (int d = 0; d < D; ++d) {
      double diff = decomp.latency_budgets(k, d) - observed_latency(k, d);
      if (diff <= 0.0) continue;
      give[d] = std::min(kStepCap * decomp.latency_budgets(k, d),
                         transfer * diff / total_slack);
      collected += give[d];
    }
    if (collected <= 0.0) continue;
    for (int d = 0; d < D; ++d) {
      double diff = observed_latency(k, d) - decomp.latency_budgets(k, d);
      if (diff > 0.0)
        out.latency_budgets(k, d) += collected * diff / total_need;
      else
        out.latency_budgets(k, d) -= give[d];
    }
    // guard the per-slice sum against accumulation drift
    cap_budget_row(out.latency_budgets, k, specs[k].latency_bound);
  }
  return out;
}

int local_view_dim(const AgentAssignment& assignment, const ScenarioConfig& cfg) {
  if (assignment.slice_mode())
    return 3 * static_cast<int>(assignment.slices.size()) * cfg.num_domains();
  return 3 * cfg.num_slices() * static_cast<int>(assignment.domains.size());
}

std::vector<double> local_view(const NetworkState& state, const AgentAssignment& assignment,
                               const SlaDecomposition& decomp, const ScenarioConfig& cfg) {
  std::vector<double> view;
  auto push_cell = [&](int k, int d) {
    view.push_back(state.rates(k, d) / cfg.domains[d].full_rate());
  };
  auto push_backlog = [&](int k, int d) {
    view.push_back(state.backlogs(k, d) / cfg.domains[d].full_rate());
  };
  auto push_budget = [&](int k, int d) {
    view.push_back(decomp.latency_budgets(k, d) / cfg.slices[k].latency_bound);
  };
  if (assignment.slice_mode()) {
    view.reserve(3 * assignment.slices.size() * cfg.num_domains());
    for (int k : assignment.slices)
      for (int d = 0; d < cfg.num_domains(); ++d) push_cell(k, d);
    for (int k : assignment.slices)
      for (int d = 0; d < cfg.num_domains(); ++d) push_backlog(k, d);
    for (int k : assignment.slices)
      for (int d = 0; d < cfg.num_domains(); ++d) push_budget(k, d);
  } else {
    view.reserve(3 * cfg.num_slices() * assignment.domains.size());
    for (int k = 0; k < cfg.num_slices(); ++k)
      for (int d : assignment.domains) push_cell(k, d);
    for (int k = 0; k < cfg.num_slices(); ++k)
      for (int d : assignment.domains) push_backlog(k, d);
    for (int k = 0; k < cfg.num_slices(); ++k)
      for (int d : assignment.domains) push_budget(k, d);
  }
  return view;
}

double local_cost(const StepOutcome& outcome, const AgentAssignment& assignment,
                  const SlaDecomposition& decomp, const ScenarioConfig& cfg) {
  double worst = -std::numeric_limits<double>::infinity();
  if (assignment.slice_mode()) {
    // per-slice agents keep the global end-to-end form, restricted to rows
    for (int k : assignment.slices) {
      double lat = (outcome.per_slice_latency[k] - cfg.slices[k].latency_bound) /
                   cfg.slices[k].latency_bound;
      double tp = (cfg.slices[k].min_throughput - outcome.per_slice_throughput[k]) /
                  std::max(cfg.slices[k].min_throughput, kThroughputEps);
      worst = std::max(worst, std::max(lat, tp));
    }
    return worst;
  }
  for (int k = 0; k < cfg.num_slices(); ++k) {
    for (int d : assignment.domains) {
      double b = decomp.latency_budgets(k, d);
      worst = std::max(worst, (outcome.domain_latency(k, d) - b) / b);
    }
    // throughput is a bottleneck constraint: every agent enforces it fully
    double tp = (cfg.slices[k].min_throughput - outcome.per_slice_throughput[k]) /
                std::max(cfg.slices[k].min_throughput, kThroughputEps);
    worst = std::max(worst, tp);
  }
  return worst;
}

namespace {

// AgentLearner is value-copyable; a plain copy is the rollback snapshot.

// One full-batch regression step on a scalar critic.
void critic_step(ParamFunction& critic, OptimizerState& opt,
                 const std::vector<std::vector<double>>& inputs,
                 const std::vector<double>& targets, double lr) {
  std::vector<double> grads(critic.params().size(), 0.0);
  const double n = static_cast<double>(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i) {
    double pred = critic.forward(inputs[i])[0];
    double up = 2.0 * (pred - targets[i]) / n;
    std::vector<double> g = critic.backward(inputs[i], {up});
    for (size_t j = 0; j < grads.size(); ++j) grads[j] += g[j];
  }
  if (!grad_step(critic.params(), grads, opt, lr))
    throw FeasibilityError("critic update rejected: non-finite gradient");
}

bool update_one_agent(AgentLearner& learner, AgentBatch& batch,
                      const SafeLearnerConfig& cfg) {
  const size_t n = batch.traj.size();
  if (n == 0) return true;
  for (const auto& t : batch.traj.transitions)
    if (!std::isfinite(t.reward) || !std::isfinite(t.cost) || !std::isfinite(t.logp))
      return false;

  std::vector<std::vector<double>> views(n);
  for (size_t i = 0; i < n; ++i) views[i] = batch.traj.transitions[i].state_vec;

  // value estimates with a zero bootstrap: each rollout ends its episode
  std::vector<double> vr(n + 1, 0.0), vc(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) {
    vr[i] = learner.reward_critic.forward(views[i])[0];
    vc[i] = learner.cost_value_critic.forward(views[i])[0];
  }
  compute_advantages(batch.traj, vr, vc, cfg.discount);

  // critics regress toward the empirical returns
  for (int e = 0; e < cfg.critic_epochs; ++e) {
    critic_step(learner.reward_critic, learner.opt_reward_critic, views,
                batch.traj.reward_returns, cfg.critic_lr);
    critic_step(learner.cost_value_critic, learner.opt_cost_value, views,
                batch.traj.cost_returns, cfg.critic_lr);
  }

  // gate critic learns the immediate cost of every executed action
  {
    std::vector<double> costs(n);
    for (size_t i = 0; i < n; ++i) costs[i] = batch.traj.transitions[i].cost;
    for (int e = 0; e < cfg.critic_epochs; ++e)
      learner.gate_critic.train_batch(views, batch.executed_actions, costs, cfg.critic_lr);
  }

  // policy surrogate on the steps whose executed action came from the policy
  std::vector<size_t> on_policy;
  for (size_t i = 0; i < n; ++i)
    if (!batch.used_baseline[i]) on_policy.push_back(i);
  if (on_policy.size() >= 2 && cfg.surrogate_epochs > 0) {
    std::vector<double> shaped(on_policy.size());
    for (size_t j = 0; j < on_policy.size(); ++j) {
      size_t i = on_policy[j];
      shaped[j] = batch.traj.reward_advantages[i] -
                  learner.lag.lambda * batch.traj.cost_advantages[i];
    }
    std::vector<double> adv = normalize_advantages(shaped);

    for (int e = 0; e < cfg.surrogate_epochs; ++e) {
      for (size_t start = 0; start < on_policy.size();
           start += static_cast<size_t>(cfg.minibatch)) {
        size_t stop = std::min(on_policy.size(), start + static_cast<size_t>(cfg.minibatch));
        SurrogateBatch sb;
        for (size_t j = start; j < stop; ++j) {
          size_t i = on_policy[j];
          sb.states.push_back(views[i]);
          sb.raw_actions.push_back(batch.traj.transitions[i].action_vec);
          sb.old_logps.push_back(batch.traj.transitions[i].logp);
          sb.advantages.push_back(adv[j]);
        }
        SurrogateResult res = surrogate_loss(sb, learner.policy, cfg.clip_eps,
                                             cfg.entropy_coef);
        if (!res.valid) return false;
        if (!grad_step(learner.policy.mean_net.params(), res.grad_mean_net,
                       learner.opt_mean, cfg.policy_lr))
          return false;
        if (!grad_step(learner.policy.log_std, res.grad_log_std, learner.opt_log_std,
                       cfg.policy_lr))
          return false;
        learner.policy.clamp_log_std();
      }
    }
  }
  ++learner.version;
  return true;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ULL + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

bool aggregate_and_update(std::vector<AgentLearner>& learners,
                          std::vector<AgentBatch>& batches,
                          const SafeLearnerConfig& cfg) {
  if (learners.size() != batches.size())
    throw DimensionError("aggregate_and_update: one batch per learner required");
  std::vector<AgentLearner> snaps = learners;

  bool ok = true;
  try {
    for (size_t a = 0; a < learners.size() && ok; ++a)
      ok = update_one_agent(learners[a], batches[a], cfg);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok) learners = std::move(snaps);
  return ok;
}

TrainingReport train_distributed(SliceEnv& env,
                                 const std::vector<AgentAssignment>& assignments,
                                 const SafeLearnerConfig& cfg,
                                 std::vector<GaussianPolicy>* warm_start,
                                 std::vector<GaussianPolicy>* trained_out) {
  cfg.validate();
  const ScenarioConfig& scen = env.scenario();
  const int K = scen.num_slices();
  const int D = scen.num_domains();
  validate_assignments(assignments, D);
  const bool slice_mode = assignments[0].slice_mode();
  if (slice_mode) {
    std::vector<int> seen(K, 0);
    for (const auto& a : assignments)
      for (int k : a.slices) {
        if (k < 0 || k >= K) throw ConfigError("slice assignment out of range");
        ++seen[k];
      }
    for (int k = 0; k < K; ++k)
      if (seen[k] != 1) throw ConfigError("slice assignments must partition the slices");
  }
  const int n_agents = static_cast<int>(assignments.size());
  const bool global_cost_stream = (n_agents == 1);

  SlaDecomposition decomp = decompose_sla(scen.slices, scen.decomp_weights);

  // deterministic construction order: per agent policy, critics, gate ensemble
  Rng init_rng(mix_seed(cfg.seed, 1));
  std::vector<AgentLearner> learners(n_agents);
  for (int a = 0; a < n_agents; ++a) {
    AgentLearner& l = learners[a];
    l.assignment = assignments[a];
    int view_dim = local_view_dim(l.assignment, scen);
    int act_dim = slice_mode ? static_cast<int>(l.assignment.slices.size()) * D
                             : K * static_cast<int>(l.assignment.domains.size());
    std::vector<int> policy_sizes = {view_dim};
    policy_sizes.insert(policy_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    policy_sizes.push_back(act_dim);
    l.policy = GaussianPolicy(policy_sizes, cfg.init_log_std, init_rng);
    if (warm_start) {
      if (warm_start->size() != static_cast<size_t>(n_agents))
        throw DimensionError("warm start: one policy per agent required");
      if ((*warm_start)[a].mean_net.layer_sizes() != policy_sizes)
        throw DimensionError("warm start: policy shape mismatch for agent " +
                             std::to_string(a));
      l.policy = (*warm_start)[a];
    }
    std::vector<int> critic_sizes = {view_dim};
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(1);
    l.reward_critic = ParamFunction(critic_sizes);
    l.reward_critic.init(init_rng);
    l.cost_value_critic = ParamFunction(critic_sizes);
    l.cost_value_critic.init(init_rng);
    l.gate_critic = CostCritic(view_dim, act_dim, cfg.hidden, cfg.ensemble_size, init_rng);
    l.lag = cfg.lagrangian;
  }

  Rng act_rng(mix_seed(cfg.seed, 2));
  EndToEndOrchestrator orch(env);

  TrainingReport report;
  report.num_agents = n_agents;

  Matrix window_latency(K, D);
  long window_steps = 0;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    env.reset(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(iter)));

    std::vector<AgentBatch> batches(n_agents);
    double sum_reward = 0.0, sum_cost = 0.0;
    long violations = 0, switches = 0;
    std::vector<long> agent_switches(n_agents, 0);
    std::vector<double> agent_cost_sum(n_agents, 0.0);

    for (int t = 0; t < cfg.rollout_len; ++t) {
      NetworkState state = env.state();
      BaselineResult base = env.baseline_policy(state);

      AllocationAction composed;
      composed.shares = Matrix(K, D);
      struct StepStash {
        std::vector<double> view, raw, executed;
        double logp = 0.0;
        bool used_baseline = false;
      };
      std::vector<StepStash> stash(n_agents);

      // slice-mode renormalization spans agents, so shares compose first
      for (int a = 0; a < n_agents; ++a) {
        AgentLearner& l = learners[a];
        StepStash& st = stash[a];
        st.view = local_view(state, l.assignment, decomp, scen);
        std::vector<double> mu = l.policy.mean(st.view);
        std::vector<double> sd = l.policy.stds();
        st.raw.resize(mu.size());
        for (size_t i = 0; i < mu.size(); ++i) {
          double noise = sd[i] * act_rng.normal();
          st.raw[i] = mu[i] + clamp(noise, -cfg.exploration.H, cfg.exploration.H);
        }
        st.logp = gaussian_logp(st.raw, mu, sd);
      }

      if (slice_mode) {
        // joint projection: squash everyone, then renormalize full columns
        Matrix raw_full(K, D);
        for (int a = 0; a < n_agents; ++a) {
          const auto& rows = learners[a].assignment.slices;
          for (size_t j = 0; j < rows.size(); ++j)
            for (int d = 0; d < D; ++d)
              raw_full(rows[j], d) = stash[a].raw[j * D + d];
        }
        Matrix proposal = project_action(raw_full.data(), K, D);
        for (int a = 0; a < n_agents; ++a) {
          AgentLearner& l = learners[a];
          StepStash& st = stash[a];
          const auto& rows = l.assignment.slices;
          std::vector<double> flat;
          for (int k : rows)
            for (int d = 0; d < D; ++d) flat.push_back(proposal(k, d));
          auto pred = l.gate_critic.predict(st.view, flat);
          st.used_baseline = cfg.gate.invoke_baseline(pred.mean, pred.std);
          st.executed.clear();
          for (size_t j = 0; j < rows.size(); ++j)
            for (int d = 0; d < D; ++d) {
              double v = st.used_baseline ? base.action.shares(rows[j], d)
                                          : proposal(rows[j], d);
              st.executed.push_back(v);
              composed.shares(rows[j], d) = v;
            }
        }
        // mixing baseline rows with proposals can overfill a column
        for (int d = 0; d < D; ++d) {
          double sum = 0.0;
          for (int k = 0; k < K; ++k) sum += composed.shares(k, d);
          if (sum > 1.0)
            for (int k = 0; k < K; ++k) composed.shares(k, d) /= sum;
        }
      } else {
        for (int a = 0; a < n_agents; ++a) {
          AgentLearner& l = learners[a];
          StepStash& st = stash[a];
          const auto& cols = l.assignment.domains;
          Matrix proposal = project_action(st.raw, K, static_cast<int>(cols.size()));
          auto pred = l.gate_critic.predict(st.view, proposal.data());
          st.used_baseline = cfg.gate.invoke_baseline(pred.mean, pred.std);
          st.executed.clear();
          for (int k = 0; k < K; ++k)
            for (size_t j = 0; j < cols.size(); ++j) {
              double v = st.used_baseline ? base.action.shares(k, cols[j])
                                          : proposal(k, static_cast<int>(j));
              st.executed.push_back(v);
              composed.shares(k, cols[j]) = v;
            }
        }
      }

      StepOutcome out = orch.apply(composed);

      sum_reward += out.reward;
      sum_cost += out.cost;
      if (out.sla_violated) ++violations;
      for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d) window_latency(k, d) += out.domain_latency(k, d);
      ++window_steps;

      for (int a = 0; a < n_agents; ++a) {
        AgentLearner& l = learners[a];
        StepStash& st = stash[a];
        double r_local;
        if (slice_mode) {
          r_local = 0.0;
          for (int k : l.assignment.slices)
            for (int d = 0; d < D; ++d)
              r_local -= scen.weights[d] * composed.shares(k, d);
        } else {
          r_local = 0.0;
          for (int d : l.assignment.domains) {
            double col = 0.0;
            for (int k = 0; k < K; ++k) col += composed.shares(k, d);
            r_local -= scen.weights[d] * col;
          }
        }
        double c_local = global_cost_stream ? out.cost
                                            : local_cost(out, l.assignment, decomp, scen);
        Transition tr;
        tr.state_vec = std::move(st.view);
        tr.action_vec = std::move(st.raw);
        tr.logp = st.logp;
        tr.reward = r_local;
        tr.cost = c_local;
        tr.done = (t + 1 == cfg.rollout_len);
        batches[a].traj.transitions.push_back(std::move(tr));
        batches[a].executed_actions.push_back(std::move(st.executed));
        batches[a].used_baseline.push_back(st.used_baseline);
        l.window_cost_sum += c_local;
        ++l.window_cost_count;
        if (st.used_baseline) {
          ++agent_switches[a];
          ++switches;
        }
        agent_cost_sum[a] += c_local;
      }
    }

    if (!aggregate_and_update(learners, batches, cfg)) {
      report.aborted = true;
      report.abort_reason = "agent update failed at iteration " + std::to_string(iter) +
                            "; batch rolled back";
      break;
    }

    if ((iter + 1) % cfg.lagrangian.update_period == 0) {
      for (auto& l : learners) {
        if (l.window_cost_count > 0)
          l.lag = update_multiplier(l.lag, l.window_cost_sum /
                                               static_cast<double>(l.window_cost_count));
        l.window_cost_sum = 0.0;
        l.window_cost_count = 0;
      }
    }

    if ((iter + 1) % cfg.rebalance_period == 0 && window_steps > 0) {
      Matrix mean_latency(K, D);
      for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d)
          mean_latency(k, d) = window_latency(k, d) / static_cast<double>(window_steps);
      decomp = rebalance_sla(decomp, mean_latency, scen.slices);
      window_latency = Matrix(K, D);
      window_steps = 0;
    }

    const double steps = static_cast<double>(cfg.rollout_len);
    ReportRow row;
    row.iteration = iter;
    row.mean_reward = sum_reward / steps;
    row.mean_cost = sum_cost / steps;
    row.violation_rate = static_cast<double>(violations) / steps;
    row.switch_rate = static_cast<double>(switches) / (steps * n_agents);
    if (n_agents == 1) {
      row.lambda = learners[0].lag.lambda;
    } else {
      double lsum = 0.0;
      for (const auto& l : learners) lsum += l.lag.lambda;
      row.lambda = lsum / n_agents;
      for (int a = 0; a < n_agents; ++a) {
        row.agent_lambda.push_back(learners[a].lag.lambda);
        row.agent_switch_rate.push_back(static_cast<double>(agent_switches[a]) / steps);
        row.agent_local_cost.push_back(agent_cost_sum[a] / steps);
      }
    }
    report.rows.push_back(std::move(row));
  }

  if (trained_out) {
    trained_out->clear();
    for (const auto& l : learners) trained_out->push_back(l.policy);
  }
  return report;
}

}  // namespace sliceorch

#include "sliceorch/orchestrator.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sliceorch/imitation.hpp"
#include "sliceorch/multi_agent.hpp"

namespace sliceorch {

using nlohmann::json;
namespace fs = std::filesystem;

DomainManager::DomainManager(SliceEnv& env, int domain_index)
    : env_(&env), domain_index_(domain_index) {}

const DomainSpec& DomainManager::domain() const {
  return env_->scenario().domains[domain_index_];
}

DomainManager::DomainState DomainManager::read_state() const {
  DomainState ds;
  const NetworkState& s = env_->state();
  for (int k = 0; k < env_->scenario().num_slices(); ++k) {
    ds.rates.push_back(s.rates(k, domain_index_));
    ds.backlogs.push_back(s.backlogs(k, domain_index_));
  }
  return ds;
}

void DomainManager::apply_action(const std::vector<double>& shares_column) {
  if (static_cast<int>(shares_column.size()) != env_->scenario().num_slices())
    throw DimensionError("apply_action: one share per slice required");
  pending_ = shares_column;
  has_pending_ = true;
  ++applied_;
}

EndToEndOrchestrator::EndToEndOrchestrator(SliceEnv& env) : env_(&env) {
  for (int d = 0; d < env.scenario().num_domains(); ++d) managers_.emplace_back(env, d);
}

StepOutcome EndToEndOrchestrator::apply(const AllocationAction& action) {
  const int K = env_->scenario().num_slices();
  if (action.shares.cols() != num_domains() || action.shares.rows() != K)
    throw DimensionError("orchestrator: action shape mismatch");
  for (int d = 0; d < num_domains(); ++d) {
    std::vector<double> column(K);
    for (int k = 0; k < K; ++k) column[k] = action.shares(k, d);
    managers_[d].apply_action(column);
  }
  return commit();
}

StepOutcome EndToEndOrchestrator::commit() {
  const int K = env_->scenario().num_slices();
  AllocationAction action;
  action.shares = Matrix(K, num_domains());
  for (int d = 0; d < num_domains(); ++d) {
    if (!managers_[d].has_pending())
      throw FeasibilityError("commit: domain " +
                             std::string(domain_name(managers_[d].domain().id)) +
                             " has no pending action");
    for (int k = 0; k < K; ++k) action.shares(k, d) = managers_[d].pending()[k];
    managers_[d].clear_pending();
  }
  ++steps_;
  return env_->step(action);
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Safe: return "safe";
    case Algorithm::Distributed: return "distributed";
    case Algorithm::ImitationSafe: return "imitation+safe";
    case Algorithm::BaselineOnly: return "baseline-only";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "safe") return Algorithm::Safe;
  if (name == "distributed") return Algorithm::Distributed;
  if (name == "imitation+safe") return Algorithm::ImitationSafe;
  if (name == "baseline-only") return Algorithm::BaselineOnly;
  throw ConfigError("unknown algorithm \"" + name +
                    "\" (expected safe, distributed, imitation+safe or baseline-only)");
}

namespace {
void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& ctx) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key \"" + it.key() + "\" in " + ctx);
}

template <typename T>
void maybe(const json& obj, const std::string& key, T& target) {
  if (obj.contains(key)) target = obj[key].get<T>();
}
}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& scenario_base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config parse error: ") + e.what());
  }
  reject_unknown(root,
                 {"scenario", "algorithm", "seeds", "learner", "bc_epochs", "bc_lr",
                  "demo_steps", "baseline_steps", "out_dir"},
                 "experiment config");
  ExperimentConfig cfg;
  if (!root.contains("scenario") || !root["scenario"].is_string())
    throw ConfigError("experiment config requires a \"scenario\" path");
  cfg.scenario_path = root["scenario"].get<std::string>();
  fs::path sp(cfg.scenario_path);
  if (sp.is_relative() && !scenario_base_dir.empty()) sp = fs::path(scenario_base_dir) / sp;
  cfg.scenario = ScenarioConfig::from_file(sp.string());
  if (root.contains("algorithm"))
    cfg.algorithm = algorithm_from_name(root["algorithm"].get<std::string>());
  maybe(root, "seeds", cfg.seeds);
  if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
  maybe(root, "bc_epochs", cfg.bc_epochs);
  maybe(root, "bc_lr", cfg.bc_lr);
  maybe(root, "demo_steps", cfg.demo_steps);
  maybe(root, "baseline_steps", cfg.baseline_steps);
  maybe(root, "out_dir", cfg.out_dir);
  if (root.contains("learner")) {
    const json& jl = root["learner"];
    reject_unknown(jl,
                   {"iterations", "rollout_len", "surrogate_epochs", "minibatch", "clip_eps",
                    "policy_lr", "critic_lr", "entropy_coef", "init_log_std", "hidden",
                    "ensemble_size", "critic_epochs", "gamma", "lambda_gae", "sigma", "H",
                    "eta", "update_period", "gate_enabled", "gate_threshold", "gate_kappa",
                    "rebalance_period"},
                   "learner");
    SafeLearnerConfig& l = cfg.learner;
    maybe(jl, "iterations", l.iterations);
    maybe(jl, "rollout_len", l.rollout_len);
    maybe(jl, "surrogate_epochs", l.surrogate_epochs);
    maybe(jl, "minibatch", l.minibatch);
    maybe(jl, "clip_eps", l.clip_eps);
    maybe(jl, "policy_lr", l.policy_lr);
    maybe(jl, "critic_lr", l.critic_lr);
    maybe(jl, "entropy_coef", l.entropy_coef);
    maybe(jl, "init_log_std", l.init_log_std);
    maybe(jl, "hidden", l.hidden);
    maybe(jl, "ensemble_size", l.ensemble_size);
    maybe(jl, "critic_epochs", l.critic_epochs);
    maybe(jl, "gamma", l.discount.gamma);
    maybe(jl, "lambda_gae", l.discount.lambda_gae);
    maybe(jl, "sigma", l.exploration.sigma);
    maybe(jl, "H", l.exploration.H);
    maybe(jl, "eta", l.lagrangian.eta);
    maybe(jl, "update_period", l.lagrangian.update_period);
    maybe(jl, "gate_enabled", l.gate.enabled);
    maybe(jl, "gate_threshold", l.gate.threshold);
    maybe(jl, "gate_kappa", l.gate.kappa);
    maybe(jl, "rebalance_period", l.rebalance_period);
  }
  cfg.learner.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str(), fs::path(path).parent_path().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string ExperimentConfig::manifest_json() const {
  json root;
  root["version"] = "sliceorch-1.0.0";
  root["scenario_path"] = scenario_path;
  root["scenario"] = json::parse(scenario.to_json_text());
  root["algorithm"] = algorithm_name(algorithm);
  root["seeds"] = seeds;
  root["out_dir"] = out_dir;
  root["bc_epochs"] = bc_epochs;
  root["bc_lr"] = bc_lr;
  root["demo_steps"] = demo_steps;
  root["baseline_steps"] = baseline_steps;
  const SafeLearnerConfig& l = learner;
  root["learner"] = {{"iterations", l.iterations},
                     {"rollout_len", l.rollout_len},
                     {"surrogate_epochs", l.surrogate_epochs},
                     {"minibatch", l.minibatch},
                     {"clip_eps", l.clip_eps},
                     {"policy_lr", l.policy_lr},
                     {"critic_lr", l.critic_lr},
                     {"entropy_coef", l.entropy_coef},
                     {"init_log_std", l.init_log_std},
                     {"hidden", l.hidden},
                     {"ensemble_size", l.ensemble_size},
                     {"critic_epochs", l.critic_epochs},
                     {"gamma", l.discount.gamma},
                     {"lambda_gae", l.discount.lambda_gae},
                     {"sigma", l.exploration.sigma},
                     {"H", l.exploration.H},
                     {"eta", l.lagrangian.eta},
                     {"update_period", l.lagrangian.update_period},
                     {"gate_enabled", l.gate.enabled},
                     {"gate_threshold", l.gate.threshold},
                     {"gate_kappa", l.gate.kappa},
                     {"rebalance_period", l.rebalance_period}};
  return root.dump(2);
}

namespace {
TrainingReport run_baseline_only(SliceEnv& env, const SafeLearnerConfig& lcfg,
                                 int steps_per_episode) {
  TrainingReport report;
  report.num_agents = 1;
  EndToEndOrchestrator orch(env);
  for (int iter = 0; iter < lcfg.iterations; ++iter) {
    env.reset(lcfg.seed * 1000003ULL + static_cast<std::uint64_t>(iter));
    double sum_r = 0.0, sum_c = 0.0;
    long violations = 0;
    for (int t = 0; t < steps_per_episode; ++t) {
      BaselineResult base = env.baseline_policy(env.state());
      StepOutcome out = orch.apply(base.action);
      sum_r += out.reward;
      sum_c += out.cost;
      if (out.sla_violated) ++violations;
    }
    ReportRow row;
    row.iteration = iter;
    row.mean_reward = sum_r / steps_per_episode;
    row.mean_cost = sum_c / steps_per_episode;
    row.violation_rate = static_cast<double>(violations) / steps_per_episode;
    row.lambda = 0.0;
    row.switch_rate = 1.0;  // every action came from the baseline
    report.rows.push_back(row);
  }
  return report;
}
}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  for (std::uint64_t seed : cfg.seeds) {
    fs::path dir = fs::path(cfg.out_dir) /
                   (std::string(algorithm_name(cfg.algorithm)) + "_seed" + std::to_string(seed));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      result.ok = false;
      result.error = "cannot create output directory " + dir.string();
      return result;
    }

    SafeLearnerConfig lcfg = cfg.learner;
    lcfg.seed = seed;
    SliceEnv env(cfg.scenario);

    TrainingReport report;
    std::vector<GaussianPolicy> policies;
    try {
      switch (cfg.algorithm) {
        case Algorithm::Safe: {
          GaussianPolicy trained;
          report = train_safe(env, lcfg, nullptr, &trained);
          policies.push_back(std::move(trained));
          break;
        }
        case Algorithm::Distributed: {
          auto assignments = default_assignments(cfg.scenario);
          report = train_distributed(env, assignments, lcfg, nullptr, &policies);
          break;
        }
        case Algorithm::ImitationSafe: {
          std::vector<std::uint64_t> demo_seeds;
          for (int j = 0; j < 10; ++j) demo_seeds.push_back(seed * 100 + j);
          int per_seed = std::max(1, cfg.demo_steps / 10);
          DemonstrationSet demos = collect_demonstrations(env, per_seed, demo_seeds);
          // clone into the same shape train_safe builds
          std::vector<int> sizes = {local_view_dim(single_assignment(cfg.scenario.num_domains())[0],
                                                   cfg.scenario)};
          sizes.insert(sizes.end(), lcfg.hidden.begin(), lcfg.hidden.end());
          sizes.push_back(env.action_dim());
          Rng bc_rng(seed);
          GaussianPolicy init(sizes, lcfg.init_log_std, bc_rng);
          BcResult bc = bc_train(init, demos, cfg.bc_epochs, cfg.bc_lr);
          // exploration must not stay collapsed by cloning
          bc.policy.log_std.assign(bc.policy.log_std.size(), lcfg.init_log_std);
          GaussianPolicy trained;
          report = train_safe(env, lcfg, &bc.policy, &trained);
          policies.push_back(std::move(trained));
          std::ofstream bcs(dir / "bc_loss.csv");
          bcs << "epoch,loss\n";
          for (size_t e = 0; e < bc.loss_trace.size(); ++e)
            bcs << e << ',' << bc.loss_trace[e] << "\n";
          break;
        }
        case Algorithm::BaselineOnly:
          report = run_baseline_only(env, lcfg, cfg.baseline_steps);
          break;
      }
    } catch (const std::exception& e) {
      result.ok = false;
      result.error = e.what();
    }

    fs::path report_path = dir / "report.csv";
    {
      std::ofstream out(report_path);
      report.write_csv(out);
    }
    result.report_paths.push_back(report_path.string());
    for (size_t a = 0; a < policies.size(); ++a) {
      fs::path ck = dir / ("policy_agent" + std::to_string(a) + ".bin");
      save_policy(ck.string(), policies[a]);
      result.checkpoint_paths.push_back(ck.string());
    }
    {
      std::ofstream mf(dir / "manifest.json");
      json m = json::parse(cfg.manifest_json());
      m["seed"] = seed;
      m["aborted"] = report.aborted;
      if (report.aborted) m["abort_reason"] = report.abort_reason;
      if (!result.ok) m["error"] = result.error;
      mf << m.dump(2);
    }
    if (!result.ok) return result;  // partial outputs flushed above
  }
  return result;
}

std::vector<double> read_report_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(path + ": empty report");
  std::vector<std::string> names;
  std::stringstream hs(header);
  std::string cell;
  int idx = -1;
  while (std::getline(hs, cell, ',')) {
    if (cell == column) idx = static_cast<int>(names.size());
    names.push_back(cell);
  }
  if (idx < 0) throw ConfigError(path + ": no column named " + column);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col == idx) values.push_back(std::stod(cell));
      ++col;
    }
  }
  return values;
}

std::vector<CdfPoint> violation_cdf(const std::vector<std::string>& report_paths) {
  if (report_paths.empty()) throw ConfigError("violation_cdf: no reports given");
  std::vector<double> rates;
  for (const auto& p : report_paths) {
    auto col = read_report_column(p, "violation_rate");
    rates.insert(rates.end(), col.begin(), col.end());
  }
  if (rates.empty()) throw ConfigError("violation_cdf: reports contain no rows");
  std::sort(rates.begin(), rates.end());
  std::vector<CdfPoint> cdf;
  const double n = static_cast<double>(rates.size());
  for (size_t i = 0; i < rates.size(); ++i) {
    if (i + 1 < rates.size() && rates[i + 1] == rates[i]) continue;
    cdf.push_back({rates[i], static_cast<double>(i + 1) / n});
  }
  return cdf;
}

void write_cdf_csv(const std::vector<std::pair<std::string, std::vector<CdfPoint>>>& schemes,
                   std::ostream& os) {
  os << "scheme,violation_level,cumulative_probability\n";
  for (const auto& [name, cdf] : schemes)
    for (const auto& pt : cdf)
      os << name << ',' << pt.level << ',' << pt.cumulative_probability << "\n";
}

}  // namespace sliceorch

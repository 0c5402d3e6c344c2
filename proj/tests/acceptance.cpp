// Acceptance gate: one pass/fail line per criterion, exit code = #failures.
// argv[1] points at the directory holding the checked-in scenario files.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "sliceorch/imitation.hpp"
#include "sliceorch/multi_agent.hpp"
#include "sliceorch/orchestrator.hpp"

using namespace sliceorch;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int criterion, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

double finite_diff_worst(ParamFunction& f, Rng& rng) {
  std::vector<double> x(f.input_dim()), up(f.output_dim());
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto& v : up) v = rng.uniform(-1.0, 1.0);
  std::vector<double> analytic = f.backward(x, up);
  const double h = 1e-5;
  double worst = 0.0;
  for (size_t j = 0; j < f.params().size(); ++j) {
    double save = f.params()[j];
    f.params()[j] = save + h;
    std::vector<double> yp = f.forward(x);
    f.params()[j] = save - h;
    std::vector<double> ym = f.forward(x);
    f.params()[j] = save;
    double num = 0.0;
    for (int o = 0; o < f.output_dim(); ++o) num += up[o] * (yp[o] - ym[o]);
    num /= 2.0 * h;
    worst = std::max(worst, std::abs(analytic[j] - num) / std::max(1.0, std::abs(num)));
  }
  return worst;
}

void criterion1(const ScenarioConfig& toy, const ScenarioConfig& dflt) {
  Timer timer;
  SafeLearnerConfig lcfg;
  Rng rng(100);
  double worst = 0.0;
  for (const ScenarioConfig* scen : {&toy, &dflt}) {
    AgentAssignment all = single_assignment(scen->num_domains())[0];
    int view = local_view_dim(all, *scen);
    int act = scen->num_slices() * scen->num_domains();
    std::vector<std::vector<int>> shapes;
    std::vector<int> policy = {view};
    policy.insert(policy.end(), lcfg.hidden.begin(), lcfg.hidden.end());
    policy.push_back(act);
    shapes.push_back(policy);
    std::vector<int> critic = {view};
    critic.insert(critic.end(), lcfg.hidden.begin(), lcfg.hidden.end());
    critic.push_back(1);
    shapes.push_back(critic);
    std::vector<int> gate = {view + act};
    gate.insert(gate.end(), lcfg.hidden.begin(), lcfg.hidden.end());
    gate.push_back(1);
    shapes.push_back(gate);
    for (const auto& sizes : shapes) {
      ParamFunction f(sizes);
      f.init(rng);
      worst = std::max(worst, finite_diff_worst(f, rng));
    }
  }
  report(1, "gradient correctness", worst < 1e-4 && timer.seconds() < 10.0,
         fmt("max relative error %.3g (tolerance 1e-4)", worst), timer.seconds());
}

// ---------------------------------------------------------- criteria 2 and 4

struct ToyRun {
  std::uint64_t seed;
  double usage_gap = 0.0;
  double violation = 0.0;
  bool lambda_ok = false;
  double q4_cost = 0.0;
};

SafeLearnerConfig toy_learner_config(std::uint64_t seed) {
  SafeLearnerConfig cfg;
  cfg.iterations = 200;
  cfg.policy_lr = 1e-3;
  cfg.critic_epochs = 8;
  cfg.gate.kappa = 0.5;
  cfg.seed = seed;
  return cfg;
}

double toy_oracle_usage(SliceEnv& env, int episodes, int steps, std::uint64_t seed_base) {
  const ScenarioConfig& scen = env.scenario();
  const double full = scen.domains[0].full_rate();
  const double bound = scen.slices[0].latency_bound;
  double usage = 0.0;
  long n = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(seed_base + ep);
    for (int t = 0; t < steps; ++t) {
      const NetworkState& s = env.state();
      double eff = std::min(s.rates(0, 0) + s.backlogs(0, 0), full);
      double best = 1.0;
      for (int g = 0; g <= 50; ++g) {  // 51-point action grid
        double a = g / 50.0;
        double mu = full * a;
        double lat = (mu > eff) ? std::min(1.0 / (mu - eff), scen.l_max) : scen.l_max;
        if ((lat - bound) / bound <= 0.0) {
          best = a;
          break;
        }
      }
      AllocationAction act;
      act.shares = Matrix(1, 1, best);
      env.step(act);
      usage += best;
      ++n;
    }
  }
  return usage / static_cast<double>(n);
}

void criteria2and4(const ScenarioConfig& toy) {
  Timer timer;
  SliceEnv env(toy);
  const double oracle = toy_oracle_usage(env, 5, 256, 777);

  std::vector<ToyRun> runs;
  for (std::uint64_t seed : {11ull, 33ull, 44ull}) {
    ToyRun run;
    run.seed = seed;
    SafeLearnerConfig cfg = toy_learner_config(seed);
    GaussianPolicy trained;
    TrainingReport rep = train_safe(env, cfg, nullptr, &trained);

    // evaluation: deterministic mean policy on fresh fixed-seed episodes
    auto all = single_assignment(toy.num_domains())[0];
    SlaDecomposition decomp = decompose_sla(toy.slices, toy.decomp_weights);
    double usage = 0.0;
    long n = 0, viol = 0;
    for (int ep = 0; ep < 5; ++ep) {
      env.reset(777 + ep);
      for (int t = 0; t < 256; ++t) {
        std::vector<double> view = local_view(env.state(), all, decomp, toy);
        AllocationAction act;
        act.shares = project_action(trained.mean(view), 1, 1);
        StepOutcome out = env.step(act);
        usage += act.shares(0, 0);
        if (out.sla_violated) ++viol;
        ++n;
      }
    }
    run.usage_gap = std::abs(usage / n - oracle) / oracle;
    run.violation = static_cast<double>(viol) / n;

    // lambda non-decreasing whenever the preceding update window had mean
    // cost > 0; final quartile mean cost < 0
    run.lambda_ok = true;
    double lam_prev = cfg.lagrangian.lambda, win_cost = 0.0;
    int win_n = 0;
    for (const auto& row : rep.rows) {
      win_cost += row.mean_cost;
      ++win_n;
      if (win_n == cfg.lagrangian.update_period) {
        if (win_cost / win_n > 0.0 && row.lambda < lam_prev - 1e-12) run.lambda_ok = false;
        lam_prev = row.lambda;
        win_cost = 0.0;
        win_n = 0;
      }
    }
    double q4 = 0.0;
    int nq = 0;
    for (size_t i = rep.rows.size() * 3 / 4; i < rep.rows.size(); ++i) {
      q4 += rep.rows[i].mean_cost;
      ++nq;
    }
    run.q4_cost = q4 / nq;
    runs.push_back(run);
  }

  bool pass2 = timer.seconds() < 300.0;
  bool pass4 = true;
  std::string detail2 = fmt("grid-oracle usage %.4f;", oracle), detail4;
  for (const auto& r : runs) {
    pass2 = pass2 && r.usage_gap <= 0.10 && r.violation <= 0.02;
    pass4 = pass4 && r.lambda_ok && r.q4_cost < 0.0;
    detail2 += fmt(" seed gap %.1f%% viol %.2f%%;", 100.0 * r.usage_gap, 100.0 * r.violation);
    detail4 += fmt(" seed q4 cost %.3f mono %.0f;", r.q4_cost, r.lambda_ok ? 1.0 : 0.0);
  }
  double secs = timer.seconds();
  report(2, "toy CMDP grid-oracle equivalence", pass2, detail2, secs);
  report(4, "Lagrangian constraint satisfaction", pass4, detail4, 0.0);
}

// ---------------------------------------------------------------- criterion 3

void criterion3(const ScenarioConfig& dflt) {
  Timer timer;
  int dominant = 0;
  std::string detail;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    double rates[2];
    for (int gate_on = 0; gate_on < 2; ++gate_on) {
      SafeLearnerConfig cfg;
      cfg.iterations = 50;
      cfg.seed = seed;
      cfg.gate.enabled = (gate_on == 1);
      SliceEnv env(dflt);
      TrainingReport rep = train_safe(env, cfg);
      double v = 0.0;
      for (const auto& r : rep.rows) v += r.violation_rate;
      rates[gate_on] = v / rep.rows.size();
    }
    bool ok = rates[0] >= 0.10 && rates[1] <= 0.02;
    if (ok) ++dominant;
    detail += fmt(" seed off %.1f%% on %.2f%%;", 100.0 * rates[0], 100.0 * rates[1]);
  }
  report(3, "baseline-switching violation reduction",
         dominant >= 4 && timer.seconds() < 600.0,
         fmt("%0.f/5 seeds dominant;", static_cast<double>(dominant)) + detail,
         timer.seconds());
}

// ---------------------------------------------------------------- criterion 5

void criterion5(const ScenarioConfig& dflt) {
  Timer timer;
  SliceEnv env(dflt);
  std::vector<std::uint64_t> seeds;
  for (int j = 0; j < 10; ++j) seeds.push_back(4200 + j);
  DemonstrationSet demos = collect_demonstrations(env, 1000, seeds);  // 10k pairs

  SafeLearnerConfig lcfg;
  AgentAssignment all = single_assignment(dflt.num_domains())[0];
  std::vector<int> sizes = {local_view_dim(all, dflt)};
  sizes.insert(sizes.end(), lcfg.hidden.begin(), lcfg.hidden.end());
  sizes.push_back(dflt.num_slices() * dflt.num_domains());
  Rng rng(7);
  GaussianPolicy init(sizes, lcfg.init_log_std, rng);
  BcResult bc = bc_train(init, demos, 300, 1e-3);

  double ratio = bc.loss_trace.front() / std::max(bc.loss_trace.back(), 1e-300);
  ImitationEval eval = evaluate_imitation(bc.policy, env, 5, 200, 9000);
  double gap = std::abs(eval.policy_usage - eval.baseline_usage) / eval.baseline_usage;

  report(5, "imitation warm start", !bc.aborted && gap <= 0.05 && ratio >= 10.0 &&
             timer.seconds() < 180.0,
         fmt("usage gap %.2f%% (<=5%%), BC loss ratio %.0fx (>=10x)", 100.0 * gap, ratio),
         timer.seconds());
}

// ---------------------------------------------------------------- criterion 6

void criterion6(const ScenarioConfig& dflt) {
  Timer timer;
  SafeLearnerConfig cfg;
  cfg.iterations = 20;
  cfg.rollout_len = 128;
  cfg.seed = 123;

  SliceEnv env1(dflt);
  TrainingReport mono = train_safe(env1, cfg);
  SliceEnv env2(dflt);
  TrainingReport dist = train_distributed(env2, single_assignment(dflt.num_domains()), cfg);

  bool equal = mono.to_csv() == dist.to_csv();
  report(6, "multi-agent reduction", equal && timer.seconds() < 300.0,
         equal ? "1-agent distributed CSV is byte-identical to the monolithic learner"
               : "CSV outputs differ",
         timer.seconds());
}

// ---------------------------------------------------------------- criterion 7

void criterion7() {
  Timer timer;
  Rng rng(900);
  long decomp_bad = 0;
  for (int rep = 0; rep < 100000; ++rep) {
    int D = 1 + static_cast<int>(rng.next_u64() % 4);
    int K = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<SliceSpec> specs(K);
    for (auto& s : specs) s.latency_bound = rng.uniform(0.01, 10.0);
    std::vector<double> w(D);
    for (auto& v : w) v = rng.uniform(0.01, 10.0);
    SlaDecomposition d = decompose_sla(specs, w);
    for (int reb = 0; reb < 3; ++reb) {
      for (int k = 0; k < K; ++k) {
        double sum = 0.0;
        for (int dd = 0; dd < D; ++dd) sum += d.latency_budgets(k, dd);
        if (sum > specs[k].latency_bound) ++decomp_bad;
      }
      Matrix obs(K, D);
      for (int k = 0; k < K; ++k)
        for (int dd = 0; dd < D; ++dd)
          obs(k, dd) = rng.uniform(0.0, 2.0 * specs[k].latency_bound);
      d = rebalance_sla(d, obs, specs);
    }
  }

  // local safety implies global safety
  ScenarioConfig scen;
  scen.domains = {{Domain::RAN, 1.0, 40.0},
                  {Domain::TN, 1.0, 40.0},
                  {Domain::CN, 1.0, 40.0},
                  {Domain::EDGE, 1.0, 40.0}};
  SliceSpec s0;
  s0.id = 0;
  s0.latency_bound = 1.0;
  SliceSpec s1;
  s1.id = 1;
  s1.latency_bound = 0.8;
  s1.min_throughput = 0.5;
  scen.slices = {s0, s1};
  scen.apply_defaults();
  SlaDecomposition decomp = decompose_sla(scen.slices, scen.decomp_weights);
  auto assignments = default_assignments(scen);

  long sound_bad = 0, accepted = 0;
  while (accepted < 10000) {
    StepOutcome out;
    out.domain_latency = Matrix(2, 4);
    out.per_slice_latency.assign(2, 0.0);
    out.per_slice_throughput = {rng.uniform(0.0, 30.0), rng.uniform(0.4, 5.0)};
    for (int k = 0; k < 2; ++k)
      for (int d = 0; d < 4; ++d) {
        double b = decomp.latency_budgets(k, d);
        // mostly-safe sampling keeps the acceptance rate workable
        out.domain_latency(k, d) =
            rng.uniform() < 0.85 ? rng.uniform(0.0, b) : rng.uniform(b, 3.0 * b);
        out.per_slice_latency[k] += out.domain_latency(k, d);
      }
    bool all_safe = true;
    for (const auto& a : assignments)
      if (local_cost(out, a, decomp, scen) > 0.0) all_safe = false;
    bool tp_ok = out.per_slice_throughput[1] >= scen.slices[1].min_throughput;
    if (!all_safe || !tp_ok) continue;
    ++accepted;
    if (cost_fn(out.per_slice_latency, out.per_slice_throughput, scen.slices) > 0.0)
      ++sound_bad;
  }

  report(7, "SLA decomposition soundness",
         decomp_bad == 0 && sound_bad == 0 && timer.seconds() < 30.0,
         fmt("budget overshoots %.0f/1e5, unsound safe steps %.0f/1e4",
             static_cast<double>(decomp_bad), static_cast<double>(sound_bad)),
         timer.seconds());
}

// ---------------------------------------------------------------- criterion 8

void criterion8(const ScenarioConfig& dflt) {
  Timer timer;
  Rng rng(321);

  long proj_bad = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    int K = 1 + static_cast<int>(rng.next_u64() % 4);
    int D = 1 + static_cast<int>(rng.next_u64() % 4);
    std::vector<double> raw(static_cast<size_t>(K) * D);
    for (auto& v : raw) v = rng.uniform(-10.0, 10.0);
    AllocationAction a;
    a.shares = project_action(raw, K, D);
    if (!a.feasible(1e-12)) ++proj_bad;
  }

  long sign_bad = 0, reward_bad = 0;
  {
    SliceEnv env(dflt);
    env.reset(31);
    const int K = dflt.num_slices(), D = dflt.num_domains();
    double wsum = 0.0;
    for (double w : dflt.weights) wsum += w;
    for (int t = 0; t < 10000; ++t) {
      std::vector<double> raw(static_cast<size_t>(K) * D);
      for (auto& v : raw) v = rng.uniform(-4.0, 4.0);
      AllocationAction a;
      a.shares = project_action(raw, K, D);
      StepOutcome out = env.step(a);
      if (out.sla_violated != (out.cost >= 0.0)) ++sign_bad;
      if (!(out.reward <= 0.0 && out.reward >= -static_cast<double>(K) * wsum)) ++reward_bad;
    }
  }

  long det_bad = 0;
  {
    SliceEnv env_a(dflt), env_b(dflt);
    env_a.reset(77);
    env_b.reset(77);
    Rng act(5);
    const int K = dflt.num_slices(), D = dflt.num_domains();
    for (int t = 0; t < 10000; ++t) {
      std::vector<double> raw(static_cast<size_t>(K) * D);
      for (auto& v : raw) v = act.uniform(-4.0, 4.0);
      AllocationAction a;
      a.shares = project_action(raw, K, D);
      StepOutcome oa = env_a.step(a);
      StepOutcome ob = env_b.step(a);
      if (!(oa.next_state.rates == ob.next_state.rates &&
            oa.next_state.backlogs == ob.next_state.backlogs && oa.reward == ob.reward &&
            oa.cost == ob.cost))
        ++det_bad;
    }
  }

  report(8, "determinism and invariants",
         proj_bad == 0 && sign_bad == 0 && reward_bad == 0 && det_bad == 0 &&
             timer.seconds() < 120.0,
         fmt("projection %.0f, cost-sign %.0f, reward-bound ", static_cast<double>(proj_bad),
             static_cast<double>(sign_bad)) +
             fmt("%.0f, determinism %.0f bad cases", static_cast<double>(reward_bad),
                 static_cast<double>(det_bad)),
         timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <scenario-dir>\n");
    return 64;
  }
  const std::string dir = argv[1];
  ScenarioConfig toy = ScenarioConfig::from_file(dir + "/toy_cmdp.json");
  ScenarioConfig dflt = ScenarioConfig::from_file(dir + "/default_2slice.json");

  criterion1(toy, dflt);
  criteria2and4(toy);
  criterion3(dflt);
  criterion5(dflt);
  criterion6(dflt);
  criterion7();
  criterion8(dflt);

  if (g_failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  return g_failures;
}

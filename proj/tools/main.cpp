// sliceorch command line: experiment runner, report post-processing,
// demonstration collection and behavior cloning.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sliceorch/imitation.hpp"
#include "sliceorch/multi_agent.hpp"
#include "sliceorch/orchestrator.hpp"

namespace so = sliceorch;
namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
            const std::string& out_dir, const std::string& algo) {
  so::ExperimentConfig cfg = so::ExperimentConfig::from_file(config_path);
  if (!seeds.empty()) cfg.seeds = seeds;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!algo.empty()) cfg.algorithm = so::algorithm_from_name(algo);
  so::ExperimentResult res = so::run_experiment(cfg);
  for (const auto& p : res.report_paths) std::cout << "report: " << p << "\n";
  for (const auto& p : res.checkpoint_paths) std::cout << "checkpoint: " << p << "\n";
  if (!res.ok) {
    std::cerr << "experiment failed: " << res.error << "\n";
    return 2;
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& reports, const std::string& out_path) {
  std::vector<std::pair<std::string, std::vector<so::CdfPoint>>> schemes;
  for (const auto& r : reports) {
    std::string name = fs::path(r).parent_path().filename().string();
    if (name.empty()) name = fs::path(r).stem().string();
    schemes.emplace_back(name, so::violation_cdf({r}));
  }
  if (out_path.empty()) {
    so::write_cdf_csv(schemes, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw so::ConfigError("cannot open output file: " + out_path);
    so::write_cdf_csv(schemes, out);
  }
  return 0;
}

int cmd_demo_collect(const std::string& scenario_path, std::uint64_t seed_base, int steps,
                     int num_seeds, const std::string& out_path) {
  so::SliceEnv env(so::ScenarioConfig::from_file(scenario_path));
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < num_seeds; ++i) seeds.push_back(seed_base + i);
  so::DemonstrationSet demos = so::collect_demonstrations(env, steps, seeds);
  demos.save(out_path);
  std::cout << "collected " << demos.records.size() << " demonstrations -> " << out_path
            << "\n";
  return 0;
}

int cmd_bc(const std::string& scenario_path, const std::string& demos_path, int epochs,
           double lr, std::uint64_t seed, const std::string& out_path) {
  so::ScenarioConfig scen = so::ScenarioConfig::from_file(scenario_path);
  so::DemonstrationSet demos = so::DemonstrationSet::load(demos_path);
  if (demos.scenario_hash != scen.hash())
    throw so::ConfigError("demonstration set was collected on a different scenario");
  so::SafeLearnerConfig lcfg;
  std::vector<int> sizes = {
      so::local_view_dim(so::single_assignment(scen.num_domains())[0], scen)};
  sizes.insert(sizes.end(), lcfg.hidden.begin(), lcfg.hidden.end());
  sizes.push_back(scen.num_slices() * scen.num_domains());
  so::Rng rng(seed);
  so::GaussianPolicy init(sizes, lcfg.init_log_std, rng);
  so::BcResult res = so::bc_train(init, demos, epochs, lr);
  if (res.aborted) {
    std::cerr << "bc training aborted on non-finite loss\n";
    return 2;
  }
  so::save_policy(out_path, res.policy);
  std::cout << "bc loss " << res.loss_trace.front() << " -> " << res.loss_trace.back()
            << " over " << res.loss_trace.size() << " epochs; policy -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"end-to-end network slicing orchestration experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path, algo;
  std::vector<std::uint64_t> seeds;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--seed", seeds, "seed override (repeatable)");
  run->add_option("--out", out_path, "output directory override");
  run->add_option("--algo", algo, "algorithm override");

  std::vector<std::string> report_files;
  std::string report_out;
  auto* report = app.add_subcommand("report", "violation CDFs from training reports");
  report->add_option("reports", report_files, "report.csv files")->required();
  report->add_option("--out", report_out, "output CSV (default stdout)");

  std::string scenario_path, demos_out = "demos.json";
  std::uint64_t seed = 0;
  int steps = 1000, num_seeds = 10;
  auto* demo = app.add_subcommand("demo-collect", "record baseline demonstrations");
  demo->add_option("--config", scenario_path, "scenario JSON")->required();
  demo->add_option("--seed", seed, "base seed");
  demo->add_option("--steps", steps, "steps per seed");
  demo->add_option("--num-seeds", num_seeds, "number of seeds");
  demo->add_option("--out", demos_out, "output demonstration file");

  std::string bc_scenario, bc_demos, bc_out = "policy.bin";
  int bc_epochs = 300;
  double bc_lr = 1e-3;
  std::uint64_t bc_seed = 0;
  auto* bc = app.add_subcommand("bc", "behavior-clone the baseline policy");
  bc->add_option("--config", bc_scenario, "scenario JSON")->required();
  bc->add_option("--demos", bc_demos, "demonstration file")->required();
  bc->add_option("--epochs", bc_epochs, "training epochs");
  bc->add_option("--lr", bc_lr, "learning rate");
  bc->add_option("--seed", bc_seed, "init seed");
  bc->add_option("--out", bc_out, "output policy checkpoint");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seeds, out_path, algo);
    if (report->parsed()) return cmd_report(report_files, report_out);
    if (demo->parsed()) return cmd_demo_collect(scenario_path, seed, steps, num_seeds, demos_out);
    if (bc->parsed()) return cmd_bc(bc_scenario, bc_demos, bc_epochs, bc_lr, bc_seed, bc_out);
  } catch (const so::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

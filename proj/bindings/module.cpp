#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sliceorch/imitation.hpp"
#include "sliceorch/multi_agent.hpp"
#include "sliceorch/orchestrator.hpp"

namespace py = pybind11;
using namespace sliceorch;

namespace {

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  return rows;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size())
      throw DimensionError("ragged nested list cannot form a matrix");
    for (size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_sliceorch, m) {
  m.doc() = "end-to-end network slicing simulator and safe orchestration learners";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DimensionError>(m, "DimensionError");
  py::register_exception<FeasibilityError>(m, "FeasibilityError");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_static("from_file", &ScenarioConfig::from_file, py::arg("path"))
      .def_static("from_json_text", &ScenarioConfig::from_json_text, py::arg("text"))
      .def("to_json_text", &ScenarioConfig::to_json_text)
      .def("hash", &ScenarioConfig::hash)
      .def_property_readonly("num_slices", &ScenarioConfig::num_slices)
      .def_property_readonly("num_domains", &ScenarioConfig::num_domains);

  py::class_<NetworkState>(m, "NetworkState")
      .def_readonly("t", &NetworkState::t)
      .def_property_readonly("rates",
                             [](const NetworkState& s) { return matrix_to_rows(s.rates); })
      .def_property_readonly(
          "backlogs", [](const NetworkState& s) { return matrix_to_rows(s.backlogs); })
      .def("observation", &NetworkState::observation);

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("reward", &StepOutcome::reward)
      .def_readonly("cost", &StepOutcome::cost)
      .def_readonly("sla_violated", &StepOutcome::sla_violated)
      .def_readonly("per_slice_latency", &StepOutcome::per_slice_latency)
      .def_readonly("per_slice_throughput", &StepOutcome::per_slice_throughput)
      .def_property_readonly("next_state",
                             [](const StepOutcome& o) { return o.next_state; });

  py::class_<SliceEnv>(m, "SliceEnv")
      .def(py::init([](const ScenarioConfig& cfg) { return SliceEnv(cfg); }),
           py::arg("scenario"))
      .def_static(
          "from_file",
          [](const std::string& path) { return SliceEnv(ScenarioConfig::from_file(path)); },
          py::arg("path"))
      .def_property_readonly("observation_dim", &SliceEnv::observation_dim)
      .def_property_readonly("action_dim", &SliceEnv::action_dim)
      .def("reset", &SliceEnv::reset, py::arg("seed"))
      .def(
          "step",
          [](SliceEnv& env, const std::vector<std::vector<double>>& shares) {
            AllocationAction a;
            a.shares = rows_to_matrix(shares);
            return env.step(a);
          },
          py::arg("shares"))
      .def(
          "baseline_action",
          [](SliceEnv& env, const NetworkState& s) {
            return matrix_to_rows(env.baseline_policy(s).action.shares);
          },
          py::arg("state"))
      .def("state", &SliceEnv::state);

  m.def(
      "project_action",
      [](const std::vector<double>& raw, int num_slices, int num_domains) {
        return matrix_to_rows(project_action(raw, num_slices, num_domains));
      },
      py::arg("raw"), py::arg("num_slices"), py::arg("num_domains"));

  py::class_<GaussianPolicy>(m, "GaussianPolicy")
      .def("mean", &GaussianPolicy::mean, py::arg("state_vec"))
      .def_property_readonly("action_dim", &GaussianPolicy::action_dim)
      .def_property_readonly(
          "input_dim", [](const GaussianPolicy& p) { return p.mean_net.input_dim(); })
      .def_static("load", &load_policy, py::arg("path"))
      .def("save", [](const GaussianPolicy& p, const std::string& path) {
        save_policy(path, p);
      });

  py::class_<TrainingReport>(m, "TrainingReport")
      .def_readonly("num_agents", &TrainingReport::num_agents)
      .def_readonly("aborted", &TrainingReport::aborted)
      .def_readonly("abort_reason", &TrainingReport::abort_reason)
      .def("to_csv", &TrainingReport::to_csv)
      .def_property_readonly("iterations",
                             [](const TrainingReport& r) { return r.rows.size(); });

  m.def(
      "train_safe",
      [](SliceEnv& env, int iterations, int rollout_len, std::uint64_t seed,
         bool gate_enabled) {
        SafeLearnerConfig cfg;
        cfg.iterations = iterations;
        cfg.rollout_len = rollout_len;
        cfg.seed = seed;
        cfg.gate.enabled = gate_enabled;
        GaussianPolicy trained;
        TrainingReport rep = train_safe(env, cfg, nullptr, &trained);
        return py::make_tuple(rep, trained);
      },
      py::arg("env"), py::arg("iterations") = 150, py::arg("rollout_len") = 256,
      py::arg("seed") = 0, py::arg("gate_enabled") = true);

  m.def(
      "train_distributed",
      [](SliceEnv& env, int iterations, int rollout_len, std::uint64_t seed) {
        SafeLearnerConfig cfg;
        cfg.iterations = iterations;
        cfg.rollout_len = rollout_len;
        cfg.seed = seed;
        return train_distributed(env, default_assignments(env.scenario()), cfg);
      },
      py::arg("env"), py::arg("iterations") = 150, py::arg("rollout_len") = 256,
      py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_path) {
        ExperimentResult res = run_experiment(ExperimentConfig::from_file(config_path));
        if (!res.ok) throw std::runtime_error("experiment failed: " + res.error);
        return py::make_tuple(res.report_paths, res.checkpoint_paths);
      },
      py::arg("config_path"));

  m.def(
      "collect_demonstrations",
      [](SliceEnv& env, int n_steps, const std::vector<std::uint64_t>& seeds,
         const std::string& out_path) {
        DemonstrationSet demos = collect_demonstrations(env, n_steps, seeds);
        if (!out_path.empty()) demos.save(out_path);
        return demos.records.size();
      },
      py::arg("env"), py::arg("n_steps"), py::arg("seeds"), py::arg("out_path") = "");
}

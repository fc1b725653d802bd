#include "goose/config.hpp"
#include "goose/experiment.hpp"
#include "goose/gp.hpp"
#include "goose/metrics.hpp"
#include "goose/plant.hpp"
#include "goose/report.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace goose;

namespace {

py::dict step_columns(const std::vector<StepRecord>& steps) {
  std::vector<std::size_t> iteration;
  std::vector<double> time, y_f, y_q, limit, compute_time;
  std::vector<bool> violation, accepted, added, fallback;
  std::vector<std::vector<double>> task, x_opt;
  for (const auto& r : steps) {
    iteration.push_back(r.iteration);
    time.push_back(r.time);
    y_f.push_back(r.y_f);
    y_q.push_back(r.y_q);
    limit.push_back(r.limit);
    compute_time.push_back(r.compute_time);
    violation.push_back(r.violation);
    accepted.push_back(r.accepted);
    added.push_back(r.added_to_gp);
    fallback.push_back(r.seed_fallback);
    task.emplace_back(r.task.begin(), r.task.end());
    x_opt.emplace_back(r.x_opt.begin(), r.x_opt.end());
  }
  py::dict d;
  d["iteration"] = iteration;
  d["time"] = time;
  d["task"] = task;
  d["x_opt"] = x_opt;
  d["cost"] = y_f;
  d["constraint"] = y_q;
  d["limit"] = limit;
  d["violation"] = violation;
  d["accepted"] = accepted;
  d["added_to_gp"] = added;
  d["seed_fallback"] = fallback;
  d["compute_time"] = compute_time;
  return d;
}

py::dict artifact_dict(const RunArtifact& a) {
  py::dict arms;
  for (const auto& arm : a.arms) {
    py::dict d;
    d["steps"] = step_columns(arm.run.steps);
    d["final_optima"] = step_columns(arm.final_optima);
    d["violations"] = arm.violations;
    d["ignored"] = arm.run.ignored;
    d["points_added"] = arm.run.points_added;
    d["seed_fallbacks"] = arm.run.seed_fallbacks;
    d["termination_time"] = arm.run.termination_time;
    arms[py::str(arm.spec.name)] = d;
  }
  py::dict out;
  out["scenario"] = a.scenario;
  out["seed"] = a.seed;
  out["iterations"] = a.iterations;
  out["arms"] = arms;
  return out;
}

}  // namespace

PYBIND11_MODULE(_goose, m) {
  m.doc() = "Safe contextual Bayesian optimization of motion controller gains";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  m.def(
      "validate_config",
      [](const std::filesystem::path& file) {
        const ExperimentConfig cfg = load_config(file);
        cfg.validate();
        return cfg.scenario;
      },
      py::arg("config"), "Parse and validate a scenario config; returns its scenario name.");

  m.def(
      "run",
      [](const std::filesystem::path& file, std::uint64_t seed, std::optional<std::filesystem::path> out,
         bool desk_scale) {
        ExperimentConfig cfg = load_config(file);
        cfg.seed = seed;
        if (desk_scale) {
          cfg = cfg.desk_scale();
        }
        RunArtifact artifact;
        {
          py::gil_scoped_release release;
          artifact = run_experiment(cfg);
          if (out) {
            save_artifact(artifact, *out);
          }
        }
        return artifact_dict(artifact);
      },
      py::arg("config"), py::arg("seed"), py::arg("out") = std::nullopt,
      py::arg("desk_scale") = false,
      "Run a scenario; optionally persist the artifact. Returns per-arm step columns.");

  m.def(
      "load_artifact",
      [](const std::filesystem::path& dir) { return artifact_dict(load_artifact(dir)); },
      py::arg("artifact"));

  m.def(
      "report",
      [](const std::filesystem::path& dir, const std::string& kind,
         std::optional<std::filesystem::path> out, double payload) {
        const RunArtifact a = load_artifact(dir);
        return emit_report(a, report_kind_from(kind), out.value_or(dir / "report"), payload);
      },
      py::arg("artifact"), py::arg("kind"), py::arg("out") = std::nullopt,
      py::arg("payload") = 0.4, "Write plot-data CSVs; returns their paths.");

  py::class_<GpModel>(m, "GP")
      .def(py::init([](const Vector& lengthscales, double prior_std, double noise_std,
                       double prior_mean, double beta) {
             return GpModel(KernelSpec(lengthscales, prior_std), noise_std, PriorMean(prior_mean),
                            beta);
           }),
           py::arg("lengthscales"), py::arg("prior_std"), py::arg("noise_std"),
           py::arg("prior_mean") = 0.0, py::arg("beta") = 3.0)
      .def("add", &GpModel::add_observation, py::arg("x"), py::arg("y"))
      .def("remove_oldest", &GpModel::remove_oldest)
      .def(
          "posterior",
          [](const GpModel& gp, const Vector& x) {
            const auto p = gp.posterior(x);
            return py::make_tuple(p.mean, p.variance);
          },
          py::arg("x"), "Posterior (mean, variance).")
      .def("lcb", &GpModel::lcb, py::arg("x"))
      .def("ucb", &GpModel::ucb, py::arg("x"))
      .def("mean_gradient", &GpModel::posterior_mean_gradient, py::arg("x"))
      .def("__len__", &GpModel::size);

  m.def(
      "simulate",
      [](const Vector& x_opt, double stepsize, double payload, std::uint64_t seed) {
        PlantParams plant;
        plant.payload = payload;
        const MotionRun run =
            simulate_closed_loop(ControllerGains::from_opt(x_opt), generate_trajectory(stepsize), plant, seed);
        const MetricConfig metrics;
        py::dict d;
        d["time"] = run.time;
        d["p_ref"] = run.p_ref;
        d["p_e"] = run.p_e;
        d["v_e"] = run.v_e;
        d["unstable"] = run.unstable;
        d["settle_index"] = run.settle_index;
        const RunMetrics rm = evaluate_run(run, metrics, 5.0, 10.0);
        d["cost"] = rm.cost;
        d["constraint"] = rm.constraint;
        return d;
      },
      py::arg("x_opt"), py::arg("stepsize"), py::arg("payload") = 0.4, py::arg("seed") = 0,
      "One closed-loop move on the default plant; stepsize in metres, x_opt = [Kp, Vkp, Vki, Aff].");

  m.def(
      "cost",
      [](const std::vector<double>& p_e, std::size_t n_s, std::size_t n_p, bool log) {
        MetricConfig c;
        if (!log) {
          c.transform = CostTransform::Raw;
          c.cost_scale = 1.0;
        }
        return cost(p_e, n_s, n_p, c);
      },
      py::arg("p_e"), py::arg("n_s"), py::arg("n_p"), py::arg("log") = true);
  m.def(
      "constraint",
      [](const std::vector<double>& v_e, std::size_t n_s, std::size_t n_p, bool scaled) {
        MetricConfig c;
        if (!scaled) {
          c.constraint_scale = 1.0;
        }
        return constraint(v_e, n_s, n_p, c);
      },
      py::arg("v_e"), py::arg("n_s"), py::arg("n_p"), py::arg("scaled") = true);
  m.def("recovery_iterations",
        [](const std::filesystem::path& dir, const std::string& arm, std::size_t period,
           double tolerance) {
          return recovery_iterations(load_artifact(dir).arm(arm).run.steps, period, tolerance);
        },
        py::arg("artifact"), py::arg("arm"), py::arg("period"), py::arg("tolerance") = 0.1);
}

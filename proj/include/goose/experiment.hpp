#pragma once

#include "goose/baselines.hpp"
#include "goose/goose.hpp"
#include "goose/metrics.hpp"
#include "goose/parallel.hpp"
#include "goose/plant.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace goose {

/// Hyperparameters of one GP over x_opt plus the [log10 stepsize, payload]
/// task block. Drift-aware arms append `drift_lengthscale`.
struct GpSettings {
  Vector lengthscales;
  double sigma_n = 0.0;
  double mu_0 = 0.0;
  double sigma_v = 1.0;
  double beta = 3.0;
  /// Use the constraint limit as the prior mean.
  bool mu_0_is_limit = false;
};

enum class StepMode { Constant, Random, List };
enum class PredictorKind { Schedule, Hold };

struct ScheduleSpec {
  StepMode stepsize = StepMode::Constant;
  /// log10 of the stepsize in mm.
  double log_step = 1.0;
  double log_step_min = 0.0;
  double log_step_max = 2.0;
  std::vector<double> log_steps;
  std::vector<double> payloads{0.4};
  /// Iterations per payload before switching to the next; 0 keeps the first.
  std::size_t payload_period = 0;
  /// Drift in um/s, linear from start to end over the run.
  double drift_start = 0.0;
  double drift_end = 0.0;
};

enum class Method { Goose, Lpv, Static };

const char* to_string(Method m);

struct ArmSpec {
  std::string name;
  Method method = Method::Goose;
  Variant variant = Variant::Modified;
  std::size_t data_limit = 0;
  /// Task carries the drift level as a third dimension.
  bool drift_in_task = false;
  Scheme scheme = Scheme::Serial;
  PredictorKind predictor = PredictorKind::Schedule;
};

struct LpvSpec {
  Grid gain_grid;
  /// Log10 stepsizes and payloads the grid is recorded at.
  Grid task_grid;
};

struct ExperimentConfig {
  std::string scenario;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;

  GpSettings gp_f;
  GpSettings gp_q;
  double drift_lengthscale = 300.0;

  double c = 1.0;
  double xi = 0.0;
  std::size_t termination_count = 30;
  Vector task_change_threshold;
  double drift_change_threshold = 0.0;
  double epsilon = 0.0;
  bool override_validation = false;

  std::size_t n_particles = 50;
  std::size_t pso_iterations = 100;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  double initial_speed_fraction = 0.5;

  Vector lower;
  Vector upper;
  std::vector<Vector> safe_seed;
  /// Rows of x_opt followed by [log10 stepsize, payload].
  std::vector<Vector> initial_samples;

  ScheduleSpec schedule;
  PlantParams plant;
  MotionLimits limits;
  double hold = 0.25;
  MetricConfig metrics;
  double unstable_cost = 5.0;
  double unstable_constraint = 10.0;

  ParallelConfig parallel;
  LpvSpec lpv;
  std::vector<ArmSpec> arms;

  /// Overrides applied by the desk-scale variant.
  std::optional<std::size_t> desk_iterations;

  /// Field-path checks plus the prior tuning check for every GoOSE arm.
  void validate() const;
  /// Copy with the desk-scale overrides applied.
  ExperimentConfig desk_scale() const;
};

/// Task schedule for one arm: [log10 stepsize, payload] or, for drift-aware
/// arms, [log10 stepsize, payload, drift].
std::vector<Vector> make_schedule(const ExperimentConfig& cfg, const ArmSpec& arm);

/// Drift level (um/s) the plant sees at iteration k.
double drift_at(const ScheduleSpec& s, std::size_t k, std::size_t iterations);

/// Simulated machine. Noise depends only on the run seed and iteration, so
/// every arm sees the same noise realizations.
class PlantMachine {
 public:
  PlantMachine(const ExperimentConfig& cfg, std::uint64_t seed);

  /// Runs one move; `task` is [log10 stepsize, payload, ...] and the drift
  /// comes from the schedule.
  Measurement measure(std::size_t k, const Vector& x_opt, const Vector& task) const;
  /// Same with an explicit noise stream, used for initial and grid samples.
  Measurement measure_with(std::uint64_t stream, const Vector& x_opt, const Vector& task,
                           double drift_um_s) const;

 private:
  const ExperimentConfig& cfg_;
  std::uint64_t seed_;
};

/// GoOSE optimizer for one arm, seeded with the initial samples.
GooseOptimizer make_optimizer(const ExperimentConfig& cfg, const ArmSpec& arm,
                              const PlantMachine& machine);

struct ArmResult {
  ArmSpec spec;
  ParallelResult run;
  std::size_t violations = 0;
  /// Final optimum per distinct schedule task (GoOSE arms only).
  std::vector<StepRecord> final_optima;
  std::optional<GainGrid> grid;
};

struct RunArtifact {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::vector<ArmResult> arms;

  const ArmResult& arm(const std::string& name) const;
};

RunArtifact run_experiment(const ExperimentConfig& cfg);

/// Writes summary.json and one steps CSV per arm (plus the LPV grid).
void save_artifact(const RunArtifact& artifact, const std::filesystem::path& dir);
RunArtifact load_artifact(const std::filesystem::path& dir);

}  // namespace goose

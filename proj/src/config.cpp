#include "goose/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace goose {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string at_index(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(path, "expected an object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError(join(path, item.key()), "unknown key");
    }
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError(path, "expected a number");
  }
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw ConfigError(path, "expected true or false");
  }
  return j.get<bool>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path, "expected a string");
  }
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], at_index(path, i)));
  }
  return out;
}

Vector vec(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Vector> rows(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of arrays");
  }
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vec(j[i], at_index(path, i)));
  }
  return out;
}

Grid grid(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of axes");
  }
  Grid out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(numbers(j[i], at_index(path, i)));
    if (out.back().empty()) {
      throw ConfigError(at_index(path, i), "axis must not be empty");
    }
  }
  return out;
}

template <typename T, typename F>
void optional(const json& obj, const char* key, const std::string& path, T& target, F read) {
  if (obj.contains(key)) {
    target = read(obj.at(key), join(path, key));
  }
}

template <typename T, typename F>
T required(const json& obj, const char* key, const std::string& path, F read) {
  if (!obj.contains(key)) {
    throw ConfigError(join(path, key), "required");
  }
  return read(obj.at(key), join(path, key));
}

GpSettings read_gp(const json& j, const std::string& path) {
  reject_unknown(j, path, {"lengthscales", "sigma_n", "mu_0", "sigma_v", "beta"});
  GpSettings g;
  g.lengthscales = required<Vector>(j, "lengthscales", path, vec);
  g.sigma_n = required<double>(j, "sigma_n", path, number);
  g.sigma_v = required<double>(j, "sigma_v", path, number);
  optional(j, "beta", path, g.beta, number);
  if (!j.contains("mu_0")) {
    throw ConfigError(join(path, "mu_0"), "required");
  }
  const json& mu = j.at("mu_0");
  if (mu.is_string()) {
    if (mu.get<std::string>() != "c") {
      throw ConfigError(join(path, "mu_0"), "expected a number or \"c\"");
    }
    g.mu_0_is_limit = true;
  } else {
    g.mu_0 = number(mu, join(path, "mu_0"));
  }
  return g;
}

template <typename E>
E choose(const json& j, const std::string& path, std::initializer_list<std::pair<const char*, E>> options) {
  const std::string s = text(j, path);
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) {
      return value;
    }
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(path, "expected one of: " + names);
}

void read_goose(const json& j, const std::string& path, ExperimentConfig& cfg) {
  reject_unknown(j, path,
                 {"c", "xi", "termination_count", "task_change_threshold", "drift_change_threshold",
                  "epsilon", "override_validation"});
  optional(j, "c", path, cfg.c, number);
  optional(j, "xi", path, cfg.xi, number);
  optional(j, "termination_count", path, cfg.termination_count, count);
  optional(j, "task_change_threshold", path, cfg.task_change_threshold, vec);
  optional(j, "drift_change_threshold", path, cfg.drift_change_threshold, number);
  optional(j, "epsilon", path, cfg.epsilon, number);
  optional(j, "override_validation", path, cfg.override_validation, boolean);
}

void read_pso(const json& j, const std::string& path, ExperimentConfig& cfg) {
  reject_unknown(j, path,
                 {"n_particles", "iterations", "inertia", "cognitive", "social",
                  "initial_speed_fraction"});
  optional(j, "n_particles", path, cfg.n_particles, count);
  optional(j, "iterations", path, cfg.pso_iterations, count);
  optional(j, "inertia", path, cfg.inertia, number);
  optional(j, "cognitive", path, cfg.cognitive, number);
  optional(j, "social", path, cfg.social, number);
  optional(j, "initial_speed_fraction", path, cfg.initial_speed_fraction, number);
}

void read_schedule(const json& j, const std::string& path, ScheduleSpec& s) {
  reject_unknown(j, path,
                 {"stepsize", "log_step", "log_step_min", "log_step_max", "log_steps", "payloads",
                  "payload_period", "drift_start", "drift_end"});
  if (j.contains("stepsize")) {
    s.stepsize = choose<StepMode>(j.at("stepsize"), join(path, "stepsize"),
                                  {{"constant", StepMode::Constant},
                                   {"random", StepMode::Random},
                                   {"list", StepMode::List}});
  }
  optional(j, "log_step", path, s.log_step, number);
  optional(j, "log_step_min", path, s.log_step_min, number);
  optional(j, "log_step_max", path, s.log_step_max, number);
  optional(j, "log_steps", path, s.log_steps, numbers);
  optional(j, "payloads", path, s.payloads, numbers);
  optional(j, "payload_period", path, s.payload_period, count);
  optional(j, "drift_start", path, s.drift_start, number);
  optional(j, "drift_end", path, s.drift_end, number);
}

void read_plant(const json& j, const std::string& path, PlantParams& p) {
  reject_unknown(j, path,
                 {"base_mass", "nominal_mass", "damping", "mode_frequency", "mode_payload_factor",
                  "mode_damping", "mode_coupling", "current_lag", "velocity_noise", "position_noise",
                  "friction", "friction_velocity", "integral_scale", "integral_limit", "force_limit", "guard"});
  optional(j, "base_mass", path, p.base_mass, number);
  optional(j, "nominal_mass", path, p.nominal_mass, number);
  optional(j, "damping", path, p.damping, number);
  optional(j, "mode_frequency", path, p.mode_frequency, number);
  optional(j, "mode_payload_factor", path, p.mode_payload_factor, number);
  optional(j, "mode_damping", path, p.mode_damping, number);
  optional(j, "mode_coupling", path, p.mode_coupling, number);
  optional(j, "current_lag", path, p.current_lag, number);
  optional(j, "velocity_noise", path, p.velocity_noise, number);
  optional(j, "position_noise", path, p.position_noise, number);
  optional(j, "friction", path, p.friction, number);
  optional(j, "friction_velocity", path, p.friction_velocity, number);
  optional(j, "integral_scale", path, p.integral_scale, number);
  optional(j, "integral_limit", path, p.integral_limit, number);
  optional(j, "force_limit", path, p.force_limit, number);
  optional(j, "guard", path, p.guard, number);
}

void read_motion(const json& j, const std::string& path, ExperimentConfig& cfg) {
  reject_unknown(j, path, {"v_max", "a_max", "j_max", "hold"});
  optional(j, "v_max", path, cfg.limits.v_max, number);
  optional(j, "a_max", path, cfg.limits.a_max, number);
  optional(j, "j_max", path, cfg.limits.j_max, number);
  optional(j, "hold", path, cfg.hold, number);
  if (!(cfg.limits.v_max > 0.0 && cfg.limits.a_max > 0.0 && cfg.limits.j_max > 0.0)) {
    throw ConfigError(path, "motion limits must be positive");
  }
  if (!(cfg.hold > 0.0)) {
    throw ConfigError(join(path, "hold"), "must be positive");
  }
}

void read_metrics(const json& j, const std::string& path, ExperimentConfig& cfg) {
  reject_unknown(j, path,
                 {"band_low", "band_high", "sigmoid_offset", "sigmoid_slope", "transform",
                  "cost_scale", "constraint_scale", "fs", "unstable_cost", "unstable_constraint"});
  auto& m = cfg.metrics;
  optional(j, "band_low", path, m.band_low, number);
  optional(j, "band_high", path, m.band_high, number);
  optional(j, "sigmoid_offset", path, m.sigmoid_offset, number);
  optional(j, "sigmoid_slope", path, m.sigmoid_slope, number);
  if (j.contains("transform")) {
    m.transform = choose<CostTransform>(j.at("transform"), join(path, "transform"),
                                        {{"log10", CostTransform::Log10}, {"raw", CostTransform::Raw}});
  }
  optional(j, "cost_scale", path, m.cost_scale, number);
  optional(j, "constraint_scale", path, m.constraint_scale, number);
  optional(j, "fs", path, m.fs, number);
  optional(j, "unstable_cost", path, cfg.unstable_cost, number);
  optional(j, "unstable_constraint", path, cfg.unstable_constraint, number);
}

void read_parallel(const json& j, const std::string& path, ParallelConfig& p) {
  reject_unknown(j, path,
                 {"workers", "horizon", "k", "delta_tau", "task_grid", "cycle_time",
                  "seconds_per_unit", "clock", "wall_time_scale", "stop_at_passive", "track_optimum"});
  optional(j, "workers", path, p.workers, count);
  optional(j, "horizon", path, p.horizon, count);
  optional(j, "k", path, p.neighborhood_k, number);
  optional(j, "delta_tau", path, p.delta_tau, vec);
  optional(j, "task_grid", path, p.task_grid, grid);
  optional(j, "cycle_time", path, p.cycle_time, number);
  optional(j, "seconds_per_unit", path, p.seconds_per_unit, number);
  if (j.contains("clock")) {
    p.clock = choose<ClockMode>(j.at("clock"), join(path, "clock"),
                                {{"virtual", ClockMode::Virtual}, {"wall", ClockMode::Wall}});
  }
  optional(j, "wall_time_scale", path, p.wall_time_scale, number);
  optional(j, "stop_at_passive", path, p.stop_at_passive, boolean);
  optional(j, "track_optimum", path, p.track_optimum, boolean);
}

ArmSpec read_arm(const json& j, const std::string& path) {
  reject_unknown(j, path,
                 {"name", "method", "variant", "data_limit", "drift_in_task", "scheme", "predictor"});
  ArmSpec a;
  a.name = required<std::string>(j, "name", path, text);
  if (j.contains("method")) {
    a.method = choose<Method>(j.at("method"), join(path, "method"),
                              {{"goose", Method::Goose}, {"lpv", Method::Lpv}, {"static", Method::Static}});
  }
  if (j.contains("variant")) {
    a.variant = choose<Variant>(j.at("variant"), join(path, "variant"),
                                {{"modified", Variant::Modified}, {"baseline", Variant::Baseline}});
  }
  optional(j, "data_limit", path, a.data_limit, count);
  optional(j, "drift_in_task", path, a.drift_in_task, boolean);
  if (j.contains("scheme")) {
    a.scheme = choose<Scheme>(j.at("scheme"), join(path, "scheme"),
                              {{"serial", Scheme::Serial}, {"para", Scheme::Para}, {"lookup", Scheme::Lookup}});
  }
  if (j.contains("predictor")) {
    a.predictor = choose<PredictorKind>(j.at("predictor"), join(path, "predictor"),
                                        {{"schedule", PredictorKind::Schedule},
                                         {"hold", PredictorKind::Hold}});
  }
  return a;
}

}  // namespace

ExperimentConfig parse_config(const std::string& source) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"scenario", "iterations", "seed", "desk_scale", "gp", "goose", "pso", "bounds",
                  "safe_seed", "initial_samples", "schedule", "plant", "motion", "metrics",
                  "parallel", "lpv", "arms"});
  ExperimentConfig cfg;
  cfg.scenario = required<std::string>(root, "scenario", "", text);
  cfg.iterations = required<std::size_t>(root, "iterations", "", count);
  optional(root, "seed", "", cfg.seed, [](const json& j, const std::string& p) {
    return static_cast<std::uint64_t>(count(j, p));
  });
  if (root.contains("desk_scale")) {
    const json& d = root.at("desk_scale");
    reject_unknown(d, "desk_scale", {"iterations"});
    cfg.desk_iterations = required<std::size_t>(d, "iterations", "desk_scale", count);
  }

  if (!root.contains("gp")) {
    throw ConfigError("gp", "required");
  }
  const json& gp = root.at("gp");
  reject_unknown(gp, "gp", {"f", "q", "drift_lengthscale"});
  cfg.gp_f = required<GpSettings>(gp, "f", "gp", read_gp);
  cfg.gp_q = required<GpSettings>(gp, "q", "gp", read_gp);
  optional(gp, "drift_lengthscale", "gp", cfg.drift_lengthscale, number);

  if (root.contains("goose")) {
    read_goose(root.at("goose"), "goose", cfg);
  }
  if (root.contains("pso")) {
    read_pso(root.at("pso"), "pso", cfg);
  }
  if (!root.contains("bounds")) {
    throw ConfigError("bounds", "required");
  }
  const json& bounds = root.at("bounds");
  reject_unknown(bounds, "bounds", {"lower", "upper"});
  cfg.lower = required<Vector>(bounds, "lower", "bounds", vec);
  cfg.upper = required<Vector>(bounds, "upper", "bounds", vec);
  cfg.safe_seed = required<std::vector<Vector>>(root, "safe_seed", "", rows);
  optional(root, "initial_samples", "", cfg.initial_samples, rows);
  if (root.contains("schedule")) {
    read_schedule(root.at("schedule"), "schedule", cfg.schedule);
  }
  if (root.contains("plant")) {
    read_plant(root.at("plant"), "plant", cfg.plant);
  }
  if (root.contains("motion")) {
    read_motion(root.at("motion"), "motion", cfg);
  }
  if (root.contains("metrics")) {
    read_metrics(root.at("metrics"), "metrics", cfg);
  }
  if (root.contains("parallel")) {
    read_parallel(root.at("parallel"), "parallel", cfg.parallel);
  }
  if (root.contains("lpv")) {
    const json& l = root.at("lpv");
    reject_unknown(l, "lpv", {"gain_grid", "task_grid"});
    cfg.lpv.gain_grid = required<Grid>(l, "gain_grid", "lpv", grid);
    cfg.lpv.task_grid = required<Grid>(l, "task_grid", "lpv", grid);
  }
  if (!root.contains("arms") || !root.at("arms").is_array()) {
    throw ConfigError("arms", "required array");
  }
  const json& arms = root.at("arms");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    cfg.arms.push_back(read_arm(arms[i], at_index("arms", i)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) {
    throw ConfigError("", "cannot open config file " + file.string());
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace goose

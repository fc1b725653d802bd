#include "goose/config.hpp"
#include "goose/experiment.hpp"
#include "goose/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

int run_command(const std::string& config_file, std::uint64_t seed, const std::string& out,
                bool desk) {
  goose::ExperimentConfig cfg = goose::load_config(config_file);
  cfg.seed = seed;
  if (desk) {
    cfg = cfg.desk_scale();
  }
  const goose::RunArtifact artifact = goose::run_experiment(cfg);
  goose::save_artifact(artifact, out);
  fs::copy_file(config_file, fs::path(out) / "config.json", fs::copy_options::overwrite_existing);
  for (const auto& a : artifact.arms) {
    std::cout << a.spec.name << ": " << a.run.steps.size() << " iterations, " << a.violations
              << " violations, " << a.run.seed_fallbacks << " seed fallbacks, "
              << a.run.points_added << " GP points, " << a.run.ignored << " ignored\n";
  }
  std::cout << "artifact written to " << out << '\n';
  return 0;
}

int report_command(const std::string& artifact_dir, const std::string& kind, const std::string& out,
                   double payload) {
  const goose::RunArtifact artifact = goose::load_artifact(artifact_dir);
  const fs::path target = out.empty() ? fs::path(artifact_dir) / "report" : fs::path(out);
  for (const auto& file :
       goose::emit_report(artifact, goose::report_kind_from(kind), target, payload)) {
    std::cout << file.string() << '\n';
  }
  return 0;
}

int validate_command(const std::string& config_file) {
  const goose::ExperimentConfig cfg = goose::load_config(config_file);
  cfg.validate();
  std::cout << config_file << ": ok (" << cfg.scenario << ", " << cfg.arms.size() << " arms, T = "
            << cfg.iterations << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe contextual Bayesian optimization of motion controller gains"};
  app.require_subcommand(1);

  std::string config_file;
  std::uint64_t seed = 0;
  std::string out;
  bool desk = false;
  auto* run = app.add_subcommand("run", "Run a scenario and persist its artifact");
  run->add_option("--config", config_file, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "RNG seed")->required();
  run->add_option("--out", out, "Artifact directory")->required();
  run->add_flag("--desk-scale", desk, "Use the reduced iteration count");

  std::string artifact_dir;
  std::string kind;
  std::string report_out;
  double payload = 0.4;
  auto* report = app.add_subcommand("report", "Emit plot data from an artifact");
  report->add_option("--artifact", artifact_dir, "Artifact directory")->required();
  report->add_option("--kind", kind, "fig5a, fig5b, fig6 or fig8")
      ->required()
      ->check(CLI::IsMember({"fig5a", "fig5b", "fig6", "fig8"}));
  report->add_option("--out", report_out, "Output directory (default <artifact>/report)");
  report->add_option("--payload", payload, "Payload shown by fig6");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", validate_file, "Scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return run_command(config_file, seed, out, desk);
    }
    if (*report) {
      return report_command(artifact_dir, kind, report_out, payload);
    }
    return validate_command(validate_file);
  } catch (const goose::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

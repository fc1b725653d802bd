#include "goose/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace goose {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) {
    throw std::runtime_error("cannot write " + file.string());
  }
  return os;
}

std::string fmt_or_empty(double v) { return std::isnan(v) ? std::string() : fmt(v); }

double stepsize_mm(const StepRecord& r) { return std::pow(10.0, r.task[0]); }

}  // namespace

ReportKind report_kind_from(const std::string& name) {
  if (name == "fig5a") {
    return ReportKind::Fig5a;
  }
  if (name == "fig5b") {
    return ReportKind::Fig5b;
  }
  if (name == "fig6") {
    return ReportKind::Fig6;
  }
  if (name == "fig8") {
    return ReportKind::Fig8;
  }
  throw ContractViolation("unknown report kind '" + name + "' (fig5a, fig5b, fig6, fig8)");
}

const char* to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::Fig5a:
      return "fig5a";
    case ReportKind::Fig5b:
      return "fig5b";
    case ReportKind::Fig6:
      return "fig6";
    case ReportKind::Fig8:
      return "fig8";
  }
  return "fig5a";
}

std::vector<std::size_t> recovery_iterations(const std::vector<StepRecord>& steps,
                                             std::size_t period, double tolerance,
                                             RecoverySignal signal) {
  if (period == 0) {
    throw ContractViolation("recovery_iterations: period must be positive");
  }
  const bool measured = signal == RecoverySignal::Measured;
  auto value = [measured](const StepRecord& r) { return measured ? r.y_f : r.optimum_mean; };
  auto usable = [&](const StepRecord& r) { return !r.violation && std::isfinite(value(r)); };
  std::map<double, double> best;
  for (const auto& r : steps) {
    if (!usable(r)) {
      continue;
    }
    auto [it, fresh] = best.try_emplace(r.task[1], value(r));
    if (!fresh) {
      it->second = std::min(it->second, value(r));
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t start = 0; start < steps.size(); start += period) {
    const std::size_t end = std::min(start + period, steps.size());
    std::size_t n = period;
    for (std::size_t k = start; k < end; ++k) {
      const auto& r = steps[k];
      const auto it = best.find(r.task[1]);
      if (usable(r) && it != best.end() &&
          value(r) <= it->second + tolerance * std::abs(it->second)) {
        n = k - start;
        break;
      }
    }
    out.push_back(n);
  }
  return out;
}

std::array<double, 3> third_means(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 3) {
    throw ContractViolation("third_means: need at least three values");
  }
  std::array<double, 3> out{};
  for (std::size_t part = 0; part < 3; ++part) {
    const std::size_t a = part * n / 3;
    const std::size_t b = (part + 1) * n / 3;
    out[part] = std::accumulate(values.begin() + static_cast<std::ptrdiff_t>(a),
                                values.begin() + static_cast<std::ptrdiff_t>(b), 0.0) /
                static_cast<double>(b - a);
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const RunArtifact& artifact, ReportKind kind,
                                               const std::filesystem::path& out_dir,
                                               double payload) {
  const bool empty = std::all_of(artifact.arms.begin(), artifact.arms.end(),
                                 [](const ArmResult& a) { return a.run.steps.empty(); });
  if (empty) {
    throw ContractViolation("artifact has no records");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> files;
  const std::string name = to_string(kind);

  if (kind == ReportKind::Fig5a) {
    files.push_back(out_dir / (name + ".csv"));
    auto os = open_csv(files.back());
    os << "arm,iteration,payload,predicted_optimum,lcb,ucb,applied_mean,measured_cost,violation\n";
    for (const auto& a : artifact.arms) {
      for (const auto& r : a.run.steps) {
        os << a.spec.name << ',' << r.iteration << ',' << fmt(r.task[1]) << ','
           << fmt_or_empty(r.optimum_mean) << ',' << fmt_or_empty(r.optimum_lcb) << ','
           << fmt_or_empty(r.optimum_ucb) << ',' << fmt(r.predicted_mean) << ',' << fmt(r.y_f)
           << ',' << r.violation << '\n';
      }
    }
    files.push_back(out_dir / (name + "_recovery.csv"));
    auto rs = open_csv(files.back());
    rs << "arm,segment,payload,measured,optimum\n";
    for (const auto& a : artifact.arms) {
      // Segments follow payload changes in the schedule.
      std::size_t period = a.run.steps.size();
      for (std::size_t k = 1; k < a.run.steps.size(); ++k) {
        if (a.run.steps[k].task[1] != a.run.steps[0].task[1]) {
          period = k;
          break;
        }
      }
      const bool tracked = std::all_of(a.run.steps.begin(), a.run.steps.end(),
                                       [](const StepRecord& r) { return !std::isnan(r.optimum_mean); });
      const auto rec = recovery_iterations(a.run.steps, period, 0.1, RecoverySignal::Measured);
      const auto opt = tracked ? recovery_iterations(a.run.steps, period, 0.1, RecoverySignal::Optimum)
                               : std::vector<std::size_t>{};
      for (std::size_t s = 0; s < rec.size(); ++s) {
        rs << a.spec.name << ',' << s << ',' << fmt(a.run.steps[s * period].task[1]) << ',' << rec[s]
           << ',' << (tracked ? std::to_string(opt[s]) : std::string()) << '\n';
      }
    }
  } else if (kind == ReportKind::Fig5b) {
    files.push_back(out_dir / (name + ".csv"));
    auto os = open_csv(files.back());
    os << "arm,iteration,gp_size,work_units,compute_time\n";
    for (const auto& a : artifact.arms) {
      for (const auto& r : a.run.steps) {
        os << a.spec.name << ',' << r.iteration << ',' << r.gp_size << ',' << r.work_units << ','
           << fmt(r.compute_time) << '\n';
      }
    }
  } else if (kind == ReportKind::Fig6) {
    files.push_back(out_dir / (name + ".csv"));
    auto os = open_csv(files.back());
    os << "arm,iteration,stepsize_mm,payload,cost,constraint,limit,violation\n";
    std::size_t rows = 0;
    for (const auto& a : artifact.arms) {
      for (const auto& r : a.run.steps) {
        if (std::abs(r.task[1] - payload) > 1e-9) {
          continue;
        }
        ++rows;
        os << a.spec.name << ',' << r.iteration << ',' << fmt(stepsize_mm(r)) << ','
           << fmt(r.task[1]) << ',' << fmt(r.y_f) << ',' << fmt(r.y_q) << ',' << fmt(r.limit) << ','
           << r.violation << '\n';
      }
    }
    if (rows == 0) {
      throw ContractViolation("artifact has no records at payload " + fmt(payload));
    }
  } else {
    files.push_back(out_dir / (name + ".csv"));
    auto os = open_csv(files.back());
    os << "arm,scheme,iteration,time,points_added,ignored_total,accepted,added_to_gp,seed_fallback\n";
    for (const auto& a : artifact.arms) {
      for (const auto& r : a.run.steps) {
        os << a.spec.name << ',' << to_string(a.spec.scheme) << ',' << r.iteration << ','
           << fmt(r.time) << ',' << r.points_added << ',' << r.ignored_total << ',' << r.accepted
           << ',' << r.added_to_gp << ',' << r.seed_fallback << '\n';
      }
    }
    files.push_back(out_dir / (name + "_summary.csv"));
    auto ss = open_csv(files.back());
    ss << "arm,scheme,termination_time,ignored,points_added,initial_refresh_done\n";
    for (const auto& a : artifact.arms) {
      ss << a.spec.name << ',' << to_string(a.spec.scheme) << ','
         << (a.run.termination_time ? fmt(*a.run.termination_time) : std::string()) << ','
         << a.run.ignored << ',' << a.run.points_added << ','
         << (a.run.initial_refresh_done ? fmt(*a.run.initial_refresh_done) : std::string()) << '\n';
    }
  }
  return files;
}

}  // namespace goose

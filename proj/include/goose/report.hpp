#pragma once

#include "goose/experiment.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace goose {

enum class ReportKind { Fig5a, Fig5b, Fig6, Fig8 };

ReportKind report_kind_from(const std::string& name);
const char* to_string(ReportKind kind);

/// Writes the plot-data CSVs of one kind into `out_dir` and returns their
/// paths. An artifact without records is an error.
std::vector<std::filesystem::path> emit_report(const RunArtifact& artifact, ReportKind kind,
                                               const std::filesystem::path& out_dir,
                                               double payload = 0.4);

/// Curve a recovery count is read from: the measured cost of the applied
/// gains or the tracked pessimistic optimum.
enum class RecoverySignal { Measured, Optimum };

/// Per segment of `period` iterations: iterations until the signal is within
/// `tolerance` (relative) of its best value at that payload over the run.
/// Segments that never get there count as the segment length. Violating
/// measurements never count as recovered.
std::vector<std::size_t> recovery_iterations(const std::vector<StepRecord>& steps,
                                             std::size_t period, double tolerance,
                                             RecoverySignal signal = RecoverySignal::Measured);

/// Means of the first, middle and last third of a series.
std::array<double, 3> third_means(const std::vector<double>& values);

}  // namespace goose

#pragma once

#include "goose/plant.hpp"

#include <span>

namespace goose {

enum class CostTransform { Raw, Log10 };

struct MetricConfig {
  double band_low = 140.0;
  double band_high = 1250.0;
  double sigmoid_offset = 150.0;
  double sigmoid_slope = 10.0;
  CostTransform transform = CostTransform::Log10;
  /// Position error unit before the transform (1e10: 0.1 nm).
  double cost_scale = 1e10;
  /// Velocity error unit for the spectrum (1e5: 10 um/s).
  double constraint_scale = 1e5;
  double fs = 20000.0;

  void validate() const;
};

/// 1 - 1 / (1 + exp(-(i - n_s - offset) / slope))
double sigmoid_filter(double i, double n_s, double offset = 150.0, double slope = 10.0);

/// Weighted mean absolute position error over [n_s, n_P] (sum divided by
/// n_P - n_s), scaled and optionally log10-transformed.
double cost(std::span<const double> p_e, std::size_t n_s, std::size_t n_p, const MetricConfig& cfg);
double cost(const MotionRun& run, const MetricConfig& cfg);

/// Largest in-band DFT magnitude of the filtered velocity error over
/// [n_s, n_P], divided by the window length; no zero padding.
double constraint(std::span<const double> v_e, std::size_t n_s, std::size_t n_p,
                  const MetricConfig& cfg);
double constraint(const MotionRun& run, const MetricConfig& cfg);

struct RunMetrics {
  double cost = 0.0;
  double constraint = 0.0;
  bool unstable = false;
};

/// Metrics for a possibly truncated run: the window ends at the last sample
/// available. A run truncated before n_s + 2 samples gets the guard values.
RunMetrics evaluate_run(const MotionRun& run, const MetricConfig& cfg, double unstable_cost,
                        double unstable_constraint);

}  // namespace goose

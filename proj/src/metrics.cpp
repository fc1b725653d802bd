#include "goose/metrics.hpp"


#include <cmath>
#include <complex>
#include <numbers>

namespace goose {

void MetricConfig::validate() const {
  if (!(band_low > 0.0 && band_low < band_high && band_high < fs / 2.0)) {
    throw ContractViolation("metrics: band must satisfy 0 < low < high < fs/2");
  }
  if (!(sigmoid_offset > 0.0 && sigmoid_slope > 0.0)) {
    throw ContractViolation("metrics: sigmoid offset and slope must be positive");
  }
  if (!(cost_scale > 0.0 && constraint_scale > 0.0)) {
    throw ContractViolation("metrics: unit scales must be positive");
  }
}

double sigmoid_filter(double i, double n_s, double offset, double slope) {
  return 1.0 - 1.0 / (1.0 + std::exp(-(i - n_s - offset) / slope));
}

double cost(std::span<const double> p_e, std::size_t n_s, std::size_t n_p,
            const MetricConfig& cfg) {
  if (!(n_s < n_p) || n_p >= p_e.size()) {
    throw ContractViolation("cost: need n_s < n_P < series length");
  }
  double sum = 0.0;
  for (std::size_t i = n_s; i <= n_p; ++i) {
    const double w = sigmoid_filter(static_cast<double>(i), static_cast<double>(n_s),
                                    cfg.sigmoid_offset, cfg.sigmoid_slope);
    sum += std::abs(w * p_e[i]);
  }
  const double value = cfg.cost_scale * sum / static_cast<double>(n_p - n_s);
  return cfg.transform == CostTransform::Log10 ? std::log10(value) : value;
}

double cost(const MotionRun& run, const MetricConfig& cfg) {
  return cost(run.p_e, run.settle_index, run.end_index, cfg);
}

double constraint(std::span<const double> v_e, std::size_t n_s, std::size_t n_p,
                  const MetricConfig& cfg) {
  if (!(n_s < n_p) || n_p >= v_e.size()) {
    throw ContractViolation("constraint: window needs at least 2 samples");
  }
  const std::size_t n = n_p - n_s + 1;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = cfg.constraint_scale * v_e[n_s + i] *
           sigmoid_filter(static_cast<double>(n_s + i), static_cast<double>(n_s),
                          cfg.sigmoid_offset, cfg.sigmoid_slope);
  }
  // Twiddles indexed by (k * i) mod n keep every bin exact.
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t i = 0; i < n; ++i) {
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n));
  }
  const double df = cfg.fs / static_cast<double>(n);
  double best = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < cfg.band_low || f > cfg.band_high) {
      continue;
    }
    std::complex<double> acc = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * twiddle[idx];
      idx += k;
      if (idx >= n) {
        idx -= n;
      }
    }
    best = std::max(best, std::abs(acc) / static_cast<double>(n));
  }
  return best;
}

double constraint(const MotionRun& run, const MetricConfig& cfg) {
  return constraint(run.v_e, run.settle_index, run.end_index, cfg);
}

RunMetrics evaluate_run(const MotionRun& run, const MetricConfig& cfg, double unstable_cost,
                        double unstable_constraint) {
  RunMetrics out;
  out.unstable = run.unstable;
  if (run.end_index < run.settle_index + 1) {
    out.cost = unstable_cost;
    out.constraint = unstable_constraint;
    return out;
  }
  out.cost = cost(run, cfg);
  out.constraint = constraint(run, cfg);
  if (run.unstable) {
    out.cost = std::max(out.cost, unstable_cost);
    out.constraint = std::max(out.constraint, unstable_constraint);
  }
  return out;
}

}  // namespace goose

#include "goose/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace goose {

RffFunction::RffFunction(Vector lengthscales, double mean, double stddev, std::size_t features,
                         std::uint64_t seed)
    : mean_(mean), amplitude_(stddev * std::sqrt(2.0 / static_cast<double>(features))) {
  if (features == 0 || lengthscales.size() == 0 || (lengthscales.array() <= 0.0).any()) {
    throw ContractViolation("rff: need features and positive lengthscales");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  omega_.resize(static_cast<Eigen::Index>(features), lengthscales.size());
  phase_.resize(static_cast<Eigen::Index>(features));
  for (Eigen::Index i = 0; i < omega_.rows(); ++i) {
    for (Eigen::Index d = 0; d < omega_.cols(); ++d) {
      omega_(i, d) = normal(rng) / lengthscales[d];
    }
    phase_[i] = uniform(rng);
  }
}

double RffFunction::operator()(const VectorRef& x) const {
  if (x.size() != omega_.cols()) {
    throw ContractViolation("rff: dimension mismatch");
  }
  return mean_ + amplitude_ * ((omega_ * x + phase_).array().cos().sum());
}

namespace {

SyntheticProblem draw(std::uint64_t seed, std::size_t attempt, const SyntheticSpec& spec) {
  const auto dim = spec.lengthscales.size();
  // Attempt 0 keeps the plain seed so unconditioned draws stay reproducible.
  const std::uint64_t base = seed + attempt * 1000003ULL;
  SyntheticProblem p{RffFunction(spec.lengthscales, spec.f_mean, spec.f_std, spec.features, base * 2 + 1),
                     RffFunction(spec.lengthscales, spec.c - spec.q_offset, spec.q_std, spec.features,
                                 base * 2 + 2),
                     spec.c, Vector(), Vector::Zero(dim), Vector::Ones(dim)};
  double best = std::numeric_limits<double>::infinity();
  const double step = 1.0 / static_cast<double>(spec.seed_grid - 1);
  for (std::size_t i = 0; i < spec.seed_grid; ++i) {
    for (std::size_t j = 0; j < spec.seed_grid; ++j) {
      Vector x(2);
      x << static_cast<double>(i) * step, static_cast<double>(j) * step;
      const double v = p.q(x);
      if (v < best) {
        best = v;
        p.seed = x;
      }
    }
  }
  return p;
}

}  // namespace

bool strictly_feasible(const SyntheticProblem& p, double margin, std::size_t grid) {
  if (grid < 2 || p.seed.size() != 2) {
    throw ContractViolation("strictly_feasible: 2D problem and a grid of at least 2");
  }
  const double step = 1.0 / static_cast<double>(grid - 1);
  const std::size_t n = grid * grid;
  std::vector<double> fv(n);
  std::vector<double> qv(n);
  std::size_t arg = n;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      Vector x(2);
      x << static_cast<double>(i) * step, static_cast<double>(j) * step;
      const std::size_t id = i * grid + j;
      fv[id] = p.f(x);
      qv[id] = p.q(x);
      if (qv[id] <= p.c && (arg == n || fv[id] < fv[arg])) {
        arg = id;
      }
    }
  }
  if (arg == n || qv[arg] > p.c - margin) {
    return false;
  }
  auto cell = [&](double v) {
    return static_cast<std::size_t>(std::lround(std::clamp(v, 0.0, 1.0) / step));
  };
  const std::size_t start = cell(p.seed[0]) * grid + cell(p.seed[1]);
  if (qv[start] > p.c - margin) {
    return false;
  }
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (id == arg) {
      return true;
    }
    const std::size_t i = id / grid;
    const std::size_t j = id % grid;
    const std::size_t nb[4] = {i > 0 ? id - grid : n, i + 1 < grid ? id + grid : n,
                               j > 0 ? id - 1 : n, j + 1 < grid ? id + 1 : n};
    for (const std::size_t k : nb) {
      if (k < n && !seen[k] && qv[k] <= p.c - margin) {
        seen[k] = 1;
        stack.push_back(k);
      }
    }
  }
  return false;
}

SyntheticProblem make_synthetic(std::uint64_t seed, const SyntheticSpec& spec) {
  if (spec.lengthscales.size() != 2 || spec.seed_grid < 2) {
    throw ContractViolation("make_synthetic: 2D problems with a seed grid of at least 2");
  }
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(spec.max_draws, 1); ++attempt) {
    SyntheticProblem p = draw(seed, attempt, spec);
    p.rejected = attempt;
    if (spec.strict_margin <= 0.0 || strictly_feasible(p, spec.strict_margin, spec.check_grid)) {
      return p;
    }
  }
  throw ContractViolation("make_synthetic: no strictly feasible draw within max_draws");
}

}  // namespace goose

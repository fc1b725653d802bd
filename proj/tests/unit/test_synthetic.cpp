#include "goose/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace goose;

TEST_CASE("random feature draws have the prior moments") {
  // Average over many independent draws at a fixed input.
  const Vector l = Vector::Constant(2, 0.4);
  const Vector x = Vector::Constant(2, 0.3);
  const Vector y = (Vector(2) << 0.3, 0.7).finished();
  double sum = 0.0;
  double sq = 0.0;
  double cross = 0.0;
  const int n = 2000;
  for (int s = 0; s < n; ++s) {
    const RffFunction f(l, 1.0, 0.5, 500, static_cast<std::uint64_t>(s));
    const double a = f(x) - 1.0;
    sum += a;
    sq += a * a;
    cross += a * (f(y) - 1.0);
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sq / n == doctest::Approx(0.25).epsilon(0.1));
  // Covariance at distance 0.4 (one lengthscale): 0.25 * e^{-1/2}.
  CHECK(cross / n == doctest::Approx(0.25 * std::exp(-0.5)).epsilon(0.15));
}

TEST_CASE("synthetic problems") {
  const SyntheticProblem a = make_synthetic(3);
  const SyntheticProblem b = make_synthetic(3);
  CHECK(a.seed == b.seed);
  CHECK(a.f(a.seed) == b.f(b.seed));
  CHECK(a.q(a.seed) <= a.c);
  CHECK((a.seed.array() >= 0.0).all());
  CHECK((a.seed.array() <= 1.0).all());
  CHECK(strictly_feasible(a, 0.36, 100));
  CHECK(a.f.dim() == 2);
}

#include "goose/gp.hpp"
#include "goose/safeset.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace goose;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) {
    out[i++] = x;
  }
  return out;
}

GpModel random_model(std::mt19937_64& rng, Eigen::Index dim, std::size_t n,
                     std::vector<Vector>& xs, std::vector<double>& ys) {
  const Vector l = oracle::uniform(rng, dim, 0.3, 1.5);
  std::uniform_real_distribution<double> u(0.05, 0.4);
  const double sn = u(rng);
  GpModel gp(KernelSpec(l, 1.3), sn, PriorMean(0.7));
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(oracle::uniform(rng, dim, -1.0, 1.0));
    ys.push_back(g(rng));
    gp.add_observation(xs.back(), ys.back());
  }
  return gp;
}

void check_matches(const GpModel& a, const GpModel& b, const std::vector<Vector>& queries,
                   double rel) {
  for (const auto& q : queries) {
    const auto pa = a.posterior(q);
    const auto pb = b.posterior(q);
    CHECK(oracle::close_rel(pa.mean, pb.mean, rel, 1e-14));
    CHECK(oracle::close_rel(pa.variance, pb.variance, rel, 1e-14));
  }
}

}  // namespace

TEST_CASE("kernel_eval closed form") {
  const KernelSpec s(vec({1.0}), 0.36);
  CHECK(kernel_eval(s, vec({0.3}), vec({0.3})) == doctest::Approx(0.1296).epsilon(1e-15));
  const KernelSpec unit(vec({1.0}), 1.0);
  CHECK(kernel_eval(unit, vec({0.0}), vec({1.0})) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(kernel_eval(unit, vec({0.0}), vec({1e3})) == 0.0);
  CHECK_THROWS_AS(kernel_eval(unit, vec({0.0, 1.0}), vec({0.0, 1.0})), ContractViolation);
  CHECK_THROWS_AS(KernelSpec(vec({0.0}), 1.0), ContractViolation);
  CHECK_THROWS_AS(KernelSpec(vec({1.0}), -1.0), ContractViolation);
}

TEST_CASE("exp(-0.5) against a series evaluation") {
  // Taylor sum of e^{-1/2} to 30 terms, independent of std::exp.
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= -0.5 / k;
    sum += term;
  }
  const KernelSpec unit(vec({1.0}), 1.0);
  CHECK(kernel_eval(unit, vec({2.0}), vec({3.0})) == doctest::Approx(sum).epsilon(1e-15));
}

TEST_CASE("multi-task kernel equals the joint SE kernel") {
  const KernelSpec opt(vec({0.4}), 0.6);
  const KernelSpec tau(vec({0.3}), 0.5);
  const KernelSpec joint = joint_kernel(opt, tau);
  CHECK(joint.prior_std == doctest::Approx(0.3));
  CHECK(joint.dim() == 2);

  const InputPoint a{vec({0.1}), vec({0.2})};
  const InputPoint b{vec({0.5}), vec({0.5})};
  const double expected = 0.09 * std::exp(-1.0);
  CHECK(multi_task_kernel_eval(opt, tau, a, b) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(kernel_eval(joint, a.joined(), b.joined()) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(multi_task_kernel_eval(opt, tau, a, a) == doctest::Approx(0.09));

  // Same x_opt, distant task: the task factor governs.
  const InputPoint far{vec({0.1}), vec({5.0})};
  CHECK(multi_task_kernel_eval(opt, tau, a, far) < 1e-30);
  CHECK(multi_task_kernel_eval(opt, tau, a, InputPoint{vec({0.1}), vec({0.35})}) ==
        doctest::Approx(0.36 * 0.25 * std::exp(-0.125)));
}

TEST_CASE("prior and one-point posterior") {
  const double sv = 0.36;
  const double sn = 0.01;
  GpModel gp(KernelSpec(vec({1.0, 2.0}), sv), sn, PriorMean(1.8));
  const Vector x = vec({0.2, 0.4});
  auto p = gp.posterior(x);
  CHECK(p.mean == 1.8);
  CHECK(p.variance == doctest::Approx(sv * sv).epsilon(1e-15));
  CHECK(gp.lcb(x) == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(gp.ucb(x) == doctest::Approx(2.88).epsilon(1e-14));

  gp.add_observation(x, 1.8);
  p = gp.posterior(x);
  const double v2 = sv * sv;
  CHECK(p.mean == doctest::Approx(1.8).epsilon(1e-14));
  CHECK(p.variance == doctest::Approx(v2 - v2 * v2 / (v2 + sn * sn)).epsilon(1e-10));

  gp.set_beta(0.0);
  CHECK(gp.lcb(x) == gp.ucb(x));
  CHECK_THROWS_AS(gp.set_beta(-1.0), ContractViolation);
}

TEST_CASE("posterior matches the dense oracle on random instances") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dims(1, 6);
  std::uniform_int_distribution<int> sizes(0, 50);
  for (int inst = 0; inst < 100; ++inst) {
    const int dim = dims(rng);
    const auto n = static_cast<std::size_t>(sizes(rng));
    std::vector<Vector> xs;
    std::vector<double> ys;
    const GpModel gp = random_model(rng, dim, n, xs, ys);
    for (int k = 0; k < 5; ++k) {
      const Vector q = oracle::uniform(rng, dim, -1.2, 1.2);
      const auto got = gp.posterior(q);
      const auto want = oracle::dense_posterior(gp.kernel().lengthscales, 1.3, gp.noise_std(), 0.7,
                                                xs, ys, q);
      CHECK(oracle::close_rel(got.mean, want.mean, 1e-8, 1e-12));
      CHECK(oracle::close_rel(got.variance, want.variance, 1e-8, 1e-12));
    }
  }
}

TEST_CASE("window operations match batch construction") {
  std::mt19937_64 rng(5);
  std::vector<Vector> xs;
  std::vector<double> ys;
  GpModel gp = random_model(rng, 3, 10, xs, ys);
  std::vector<Vector> queries;
  for (int k = 0; k < 8; ++k) {
    queries.push_back(oracle::uniform(rng, 3, -1.0, 1.0));
  }

  GpModel batch(gp.kernel(), gp.noise_std(), gp.prior_mean());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    batch.add_observation(xs[i], ys[i]);
  }
  check_matches(gp, batch, queries, 1e-10);
  for (const auto& q : queries) {
    const auto want = oracle::dense_posterior(gp.kernel().lengthscales, 1.3, gp.noise_std(), 0.7,
                                              xs, ys, q);
    CHECK(oracle::close_rel(gp.posterior(q).mean, want.mean, 1e-10, 1e-13));
  }

  gp.remove_oldest();
  GpModel tail(gp.kernel(), gp.noise_std(), gp.prior_mean());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    tail.add_observation(xs[i], ys[i]);
  }
  CHECK(gp.size() == 9);
  CHECK(gp.inputs().front() == xs[1]);
  check_matches(gp, tail, queries, 1e-10);

  SUBCASE("add then remove of one point is an identity") {
    GpModel one(gp.kernel(), gp.noise_std(), gp.prior_mean());
    one.add_observation(xs[0], ys[0]);
    one.remove_oldest();
    CHECK(one.empty());
    for (const auto& q : queries) {
      CHECK(one.posterior(q).mean == 0.7);
      CHECK(one.posterior(q).variance == doctest::Approx(1.69).epsilon(1e-15));
    }
    one.remove_oldest();  // empty: no-op
    CHECK(one.empty());
  }

  SUBCASE("constant window under a data limit") {
    const std::size_t limit = 6;
    GpModel w(gp.kernel(), gp.noise_std(), gp.prior_mean());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (w.size() >= limit) {
        w.remove_oldest();
      }
      w.add_observation(xs[i], ys[i]);
      CHECK(w.size() == std::min(i + 1, limit));
    }
    GpModel last(gp.kernel(), gp.noise_std(), gp.prior_mean());
    for (std::size_t i = xs.size() - limit; i < xs.size(); ++i) {
      last.add_observation(xs[i], ys[i]);
    }
    check_matches(w, last, queries, 1e-10);
  }
}

TEST_CASE("observation limits and duplicates") {
  GpModel gp(KernelSpec(vec({1.0}), 1.0), 1e-4, PriorMean(0.0));
  gp.add_observation(vec({0.5}), 2.0);
  CHECK(gp.posterior(vec({0.5})).mean == doctest::Approx(2.0).epsilon(1e-6));
  gp.add_observation(vec({0.5}), 3.0);
  const double m = gp.posterior(vec({0.5})).mean;
  CHECK(m > 2.0);
  CHECK(m < 3.0);
  CHECK_THROWS_AS(gp.add_observation(vec({0.1}), std::numeric_limits<double>::quiet_NaN()),
                  ContractViolation);
  CHECK_THROWS_AS(gp.add_observation(vec({0.1, 0.2}), 1.0), ContractViolation);
  CHECK_THROWS_AS(gp.posterior(vec({0.1, 0.2})), ContractViolation);
  CHECK_THROWS_AS(GpModel(KernelSpec(vec({1.0}), 1.0), 0.0, PriorMean(0.0)), ContractViolation);
}

TEST_CASE("variance is non-increasing as data arrives") {
  std::mt19937_64 rng(21);
  GpModel gp(KernelSpec(vec({0.5, 0.8}), 1.0), 0.1, PriorMean(0.0));
  const Vector q = vec({0.1, -0.2});
  double prev = gp.posterior(q).variance;
  for (int i = 0; i < 40; ++i) {
    gp.add_observation(oracle::uniform(rng, 2, -1.0, 1.0), 0.0);
    const double v = gp.posterior(q).variance;
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("posterior mean gradient") {
  GpModel empty(KernelSpec(vec({1.0, 1.0}), 1.0), 0.1, PriorMean(2.0));
  CHECK(empty.posterior_mean_gradient(vec({0.3, 0.1})).norm() == 0.0);

  GpModel one(KernelSpec(vec({1.0, 1.0}), 1.0), 0.1, PriorMean(0.0));
  one.add_observation(vec({0.3, 0.1}), 1.0);
  CHECK(one.posterior_mean_gradient(vec({0.3, 0.1})).norm() < 1e-15);

  std::mt19937_64 rng(3);
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<Vector> xs;
    std::vector<double> ys;
    const GpModel gp = random_model(rng, 1 + inst % 6, 3 + inst % 10, xs, ys);
    const Vector q = oracle::uniform(rng, gp.kernel().dim(), -1.0, 1.0);
    const Vector g = gp.posterior_mean_gradient(q);
    for (Eigen::Index d = 0; d < q.size(); ++d) {
      const double h = 1e-5;
      Vector a = q;
      Vector b = q;
      a[d] += h;
      b[d] -= h;
      const double fd = (gp.posterior(a).mean - gp.posterior(b).mean) / (2 * h);
      CHECK(oracle::close_rel(g[d], fd, 1e-4, 1e-6));
    }
  }
}

TEST_CASE("constraint limit and task-dependent prior") {
  const ConstraintLimit table({vec({0.0}), vec({1.0})}, {1.0, 2.0});
  CHECK(table.at(vec({0.2})) == 1.0);
  CHECK(table.at(vec({0.9})) == 2.0);
  CHECK(table.at(vec({0.5})) == 1.0);  // tie goes to the earlier entry
  CHECK_THROWS_AS(table.at(vec({0.0, 1.0})), ContractViolation);
  const PriorMean mu = PriorMean::task_dependent(table, 1);
  CHECK(mu(vec({7.0, 0.95})) == 2.0);
  CHECK_FALSE(mu.is_constant());
}

TEST_CASE("hyperparameter check") {
  const double c = 1.0;
  const GpModel f(KernelSpec(vec({1.0}), 0.36), 0.01, PriorMean(1.8), 3.0);
  const GpModel q(KernelSpec(vec({1.0}), 1.0), 0.09, PriorMean(c), 3.0);
  auto r = validate_hyperparameters(f, q, c, 0.0);
  CHECK(r.safety_ok);
  CHECK(r.constraint_prior_ucb == doctest::Approx(4.0));
  CHECK_FALSE(r.expansion_ok);
  CHECK(r.cost_prior_lcb == doctest::Approx(0.72));
  CHECK_FALSE(r.ok());

  r = validate_hyperparameters(f, q, c, 0.72);
  CHECK(r.ok());

  const GpModel q0(KernelSpec(vec({1.0}), 1.0), 0.09, PriorMean(c), 0.0);
  CHECK_FALSE(validate_hyperparameters(f, q0, c, 1.0).safety_ok);
}

TEST_CASE("no data means nothing is pessimistically safe") {
  const GpModel q(KernelSpec(vec({50, 100, 200, 0.5, 0.3, 1.0}), 1.0), 0.09, PriorMean(1.0), 3.0);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const Vector x = oracle::uniform(rng, 6, 0.0, 2000.0);
    CHECK_FALSE(pessimistic_member(q, x, 1.0));
  }
}

#include "goose/parallel.hpp"

#include <doctest.h>

#include <cmath>

using namespace goose;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) {
    out[i++] = x;
  }
  return out;
}

GooseOptimizer toy(std::size_t termination = 8) {
  GooseConfig c;
  c.opt_lower = v({0.0});
  c.opt_upper = v({1.0});
  c.c = 1.0;
  c.xi = 0.72;
  c.termination_count = termination;
  c.task_change_threshold = v({0.5});
  c.n_particles = 15;
  c.pso_iterations = 20;
  GpModel f(KernelSpec(v({0.2, 1.0}), 0.36), 0.01, PriorMean(1.8));
  GpModel q(KernelSpec(v({0.2, 1.0}), 1.0), 0.02, PriorMean(1.0));
  return GooseOptimizer(c, f, q, SafeSeed({v({0.1})}));
}

Measurement plant(std::size_t, const Vector& x, const Vector& task) {
  const double s = x[0];
  return {1.0 + std::pow(s - 0.6 - 0.1 * task[0], 2), -0.5 + 1.6 * s + 0.1 * task[0], false};
}

std::vector<Vector> schedule(std::size_t n) {
  std::vector<Vector> out;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(v({(k / 10) % 2 == 0 ? 0.0 : 1.0}));
  }
  return out;
}

ParallelConfig base(Scheme s) {
  ParallelConfig p;
  p.scheme = s;
  p.seconds_per_unit = 0.0;
  p.base_seed = 12;
  p.task_grid = {{0.0, 0.5, 1.0}};
  p.delta_tau = v({0.5});
  return p;
}

}  // namespace

TEST_CASE("optima grid lookup") {
  const Grid g{{0.0, 0.3, 0.6}, {0.0, 0.2, 0.4}};
  OptimaGrid grid(g, v({9.0}));
  CHECK(grid.size() == 9);
  CHECK(grid.query(v({5.0, -3.0})) == v({9.0}));
  CHECK(grid.cell(0).from_seed);
  CHECK(grid.nearest(v({0.15, 0.0})) == 0);  // tie between cells 0 and 3
  CHECK(grid.nearest(v({0.16, 0.0})) == 3);

  grid.store(4, v({1.5}), 0.2, 5);
  CHECK(grid.query(v({0.3, 0.2})) == v({1.5}));
  grid.store(4, v({2.5}), 0.1, 3);  // older result is dropped
  CHECK(grid.query(v({0.3, 0.2})) == v({1.5}));

  const OptimaGrid big({std::vector<double>(19, 0.0), std::vector<double>(9, 0.0)}, v({0.0}));
  CHECK(big.size() == 171);
}

TEST_CASE("neighborhood equals direct enumeration") {
  const Grid g{{0.0, 0.3, 0.6}, {0.0, 0.2, 0.4}};
  const OptimaGrid grid(g, v({0.0}));
  const Vector delta = v({0.3, 0.2});
  const auto enumerate = [&](const Vector& t, double k) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vector d = (grid.cell(i).task - t).cwiseAbs();
      if (d[0] < k * delta[0] - 1e-9 && d[1] < k * delta[1] - 1e-9) {
        out.push_back(i);
      }
    }
    return out;
  };
  CHECK(grid.neighborhood(v({0.3, 0.2}), 1.0, delta) == std::vector<std::size_t>{4});
  CHECK(grid.neighborhood(v({0.3, 0.2}), 1.5, delta) ==
        std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(grid.neighborhood(v({0.3, 0.2}), 0.0, delta).empty());
  for (const Vector& t : {v({1.0, 0.2}), v({0.45, 0.1}), v({-0.2, 0.55}), v({0.3, 0.3})}) {
    for (double k : {0.5, 1.0, 1.5, 2.5}) {
      CHECK(grid.neighborhood(t, k, delta) == enumerate(t, k));
    }
  }
  CHECK(grid.neighborhood(v({1.0, 0.2}), 1.5, delta) == std::vector<std::size_t>{6, 7, 8});
}

TEST_CASE("para with one worker reproduces the serial decisions") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    ParallelConfig cfg = base(Scheme::Para);
    cfg.workers = 1;
    cfg.horizon = 1;
    cfg.base_seed = seed;
    const auto sched = schedule(30);
    GooseOptimizer a = toy();
    GooseOptimizer b = toy();
    const ParallelResult s = run_serial(a, sched, plant, cfg);
    const ParallelResult p = run_parallel(b, sched, plant, cfg, SchedulePredictor(sched));
    REQUIRE(s.steps.size() == p.steps.size());
    for (std::size_t k = 0; k < s.steps.size(); ++k) {
      CHECK(s.steps[k].x_opt == p.steps[k].x_opt);
      CHECK(s.steps[k].phase == p.steps[k].phase);
    }
    CHECK(p.ignored == 0);
    CHECK(p.mispredictions == 0);
    CHECK(a.gp_f().targets() == b.gp_f().targets());
  }
}

TEST_CASE("para horizon with four workers") {
  ParallelConfig cfg = base(Scheme::Para);
  const auto sched = schedule(30);
  GooseOptimizer opt = toy();
  const ParallelResult r = run_parallel(opt, sched, plant, cfg, SchedulePredictor(sched));
  CHECK(r.ignored == 0);
  CHECK(r.mispredictions == 0);
  CHECK(r.jobs_run >= 30);
  std::size_t active = 0;
  for (const auto& s : r.steps) {
    CHECK(s.accepted);
    active += s.added_to_gp ? 1 : 0;
  }
  CHECK(r.points_added == active);
  CHECK(opt.gp_f().size() == active);
}

TEST_CASE("slow workers fall back to the seed and drop measurements") {
  ParallelConfig cfg = base(Scheme::Para);
  cfg.seconds_per_unit = 1.0;  // every job outlasts the run
  const auto sched = schedule(10);
  GooseOptimizer opt = toy();
  const ParallelResult r = run_parallel(opt, sched, plant, cfg, SchedulePredictor(sched));
  CHECK(r.seed_fallbacks == 10);
  // The first proposal on an empty model is free, so only step 0 finds the pool idle.
  CHECK(r.ignored == 9);
  CHECK(r.points_added == 1);
  for (const auto& s : r.steps) {
    CHECK(s.x_opt == v({0.1}));
    CHECK(s.accepted == (s.iteration == 0));
  }
}

TEST_CASE("hold predictor mispredicts task changes") {
  ParallelConfig cfg = base(Scheme::Para);
  const auto sched = schedule(30);
  GooseOptimizer opt = toy(100);
  const ParallelResult r = run_parallel(opt, sched, plant, cfg, ConstantHoldPredictor());
  CHECK(r.mispredictions > 0);
}

TEST_CASE("lookup adds nothing before its first full refresh") {
  ParallelConfig cfg = base(Scheme::Lookup);
  cfg.seconds_per_unit = 2e-4;
  cfg.workers = 1;
  const auto sched = schedule(30);
  GooseOptimizer opt = toy();
  // With data present the first refresh costs real work.
  for (double x : {0.1, 0.15}) {
    const Measurement m = plant(0, v({x}), v({0.0}));
    opt.add_initial_sample(v({x}), v({0.0}), m.y_f, m.y_q);
  }
  const ParallelResult r = run_parallel(opt, sched, plant, cfg, SchedulePredictor(sched));
  REQUIRE(r.initial_refresh_done);
  CHECK(*r.initial_refresh_done > 0.0);
  std::size_t early = 0;
  for (const auto& s : r.steps) {
    if (s.time + cfg.cycle_time < *r.initial_refresh_done) {
      CHECK_FALSE(s.added_to_gp);
      ++early;
    }
  }
  CHECK(early > 0);
  CHECK(r.steps.front().seed_fallback);
  CHECK(r.points_added > 0);
}

TEST_CASE("parallel config validation") {
  ParallelConfig cfg = base(Scheme::Lookup);
  cfg.delta_tau = v({0.5, 0.5});
  CHECK_THROWS_AS(cfg.validate(1), ConfigError);
  cfg = base(Scheme::Para);
  cfg.workers = 0;
  CHECK_THROWS_AS(cfg.validate(1), ConfigError);
}

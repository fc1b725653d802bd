#include "goose/goose.hpp"
#include "goose/work.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace goose;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

struct Toy {
  GooseConfig config;
  KernelSpec kernel{(Vector(2) << 0.2, 1.0).finished(), 1.0};
  double sn_q = 0.02;

  Toy() {
    config.opt_lower = v1(0.0);
    config.opt_upper = v1(1.0);
    config.c = 1.0;
    config.xi = 0.72;
    config.termination_count = 5;
    config.n_particles = 20;
    config.pso_iterations = 30;
  }

  GooseOptimizer make(double seed = 0.5) const {
    GpModel f(KernelSpec(kernel.lengthscales, 0.36), 0.01, PriorMean(1.8), 3.0);
    GpModel q(kernel, sn_q, PriorMean(1.0), 3.0);
    return GooseOptimizer(config, f, q, SafeSeed({v1(seed)}));
  }
};

// Smooth truth: cost minimum at 0.8, constraint grows to the right.
double true_f(double x) { return 1.0 + (x - 0.8) * (x - 0.8); }
double true_q(double x) { return -0.5 + 1.8 * x; }

}  // namespace

TEST_CASE("prior check guards construction") {
  Toy t;
  t.config.xi = 0.0;
  CHECK_THROWS_AS(t.make(), ConfigError);
  t.config.override_validation = true;
  const GooseOptimizer opt = t.make();
  CHECK_FALSE(opt.validation().ok());
}

TEST_CASE("bad configuration is rejected") {
  Toy t;
  t.config.opt_upper = v1(0.0);
  CHECK_THROWS_AS(t.make(), ConfigError);
  Toy u;
  CHECK_THROWS_AS(u.make(2.0), ContractViolation);
  Toy w;
  w.config.task_change_threshold = Vector::Ones(3);
  CHECK_THROWS_AS(w.make(), ConfigError);
}

TEST_CASE("first active step returns the seed") {
  const GooseOptimizer opt = Toy().make();
  const Proposal p = opt.active_step(v1(0.0), 1);
  CHECK(p.x_opt == v1(0.5));
  CHECK(p.is_seed_point);
  CHECK(p.used_seed);
  CHECK(p.phase == Phase::Active);
  CHECK(opt.epsilon() == doctest::Approx(6 * 0.02));
}

TEST_CASE("exploration moves beyond a safe low-cost point") {
  GooseOptimizer opt = Toy().make();
  opt.report_measurement(v1(0.5), v1(0.0), true_f(0.5), true_q(0.5));
  const Proposal p = opt.active_step(v1(0.0), 2);
  CHECK(p.x_opt[0] != 0.5);
  CHECK(opt.gp_q().ucb(concat(p.x_opt, v1(0.0))) <= 1.0);
  CHECK(p.acquisition < opt.gp_f().lcb(concat(v1(0.5), v1(0.0))));
}

TEST_CASE("active step matches a grid argmin of lcb over the safe interval") {
  GooseOptimizer opt = Toy().make();
  for (double x : {0.3, 0.4, 0.5, 0.55}) {
    opt.report_measurement(v1(x), v1(0.0), true_f(x), true_q(x));
  }
  const Vector task = v1(0.0);
  const Proposal p = opt.active_step(task, 5);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const Vector x = concat(v1(i / 2000.0), task);
    if (opt.gp_q().ucb(x) <= 1.0) {
      best = std::min(best, opt.gp_f().lcb(x));
    }
  }
  CHECK(p.acquisition <= best + 1e-3);
  CHECK(p.acquisition >= best - 1e-3);

  const Proposal pp = opt.passive_step(task, 5);
  best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const Vector x = concat(v1(i / 2000.0), task);
    if (opt.gp_q().ucb(x) <= 1.0) {
      best = std::min(best, opt.gp_f().ucb(x));
    }
  }
  CHECK(pp.acquisition == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("data limit, violation restart and termination") {
  Toy t;
  t.config.data_limit = 3;
  GooseOptimizer opt = t.make();
  const Vector task = v1(0.0);
  for (double x : {0.1, 0.2, 0.3}) {
    const auto out = opt.report_measurement(v1(x), task, true_f(x), true_q(x));
    CHECK_FALSE(out.evicted);
    CHECK(out.added_to_gp);
  }
  const auto out = opt.report_measurement(v1(0.35), task, 1.0, 0.0);
  CHECK(out.evicted);
  CHECK(opt.gp_f().size() == 3);
  CHECK(opt.gp_q().size() == 3);
  CHECK(opt.gp_q().inputs().front()[0] == 0.2);
  CHECK(opt.termination_counter() == 4);

  const auto bad = opt.report_measurement(v1(0.9), task, 1.0, 1.5);
  CHECK(bad.violation);
  CHECK(opt.restarts() == 1);
  CHECK(opt.termination_counter() == 0);
  CHECK(opt.phase() == Phase::Active);

  for (int i = 0; i < 5; ++i) {
    opt.report_measurement(v1(0.3), task, 1.0, 0.0);
  }
  CHECK(opt.phase() == Phase::Passive);
  CHECK(opt.gp_f().size() == 3);

  SUBCASE("passive reports never touch the GPs") {
    const auto before = opt.gp_f().targets();
    const auto v = opt.version();
    const auto r = opt.report_measurement(v1(0.3), task, 9.0, 0.0);
    CHECK_FALSE(r.added_to_gp);
    CHECK(opt.gp_f().targets() == before);
    CHECK(opt.phase() == Phase::Passive);
    CHECK(opt.version() > v);
    CHECK(opt.propose(task, 1).phase == Phase::Passive);
  }
  SUBCASE("passive violation restarts") {
    const auto r = opt.report_measurement(v1(0.3), task, 1.0, 2.0);
    CHECK(r.phase_changed);
    CHECK(opt.phase() == Phase::Active);
  }
  SUBCASE("task change restarts") {
    CHECK_FALSE(opt.observe_task(task));
    CHECK_FALSE(opt.observe_task(v1(0.4)));
    CHECK(opt.phase() == Phase::Passive);
    CHECK(opt.observe_task(v1(1.0)));
    CHECK(opt.phase() == Phase::Active);
  }
  CHECK_THROWS_AS(opt.report_measurement(v1(0.3), task, std::nan(""), 0.0), ContractViolation);
}

TEST_CASE("modified loop stays safe and final optimum is deterministic") {
  Toy t;
  t.config.termination_count = 15;
  GooseOptimizer opt = t.make(0.1);
  const Vector task = v1(0.0);
  std::size_t violations = 0;
  for (std::size_t k = 0; k < 25; ++k) {
    const Proposal p = opt.propose(task, iteration_seed(7, k));
    const Vector x = concat(p.x_opt, task);
    CHECK((p.is_seed_point || opt.gp_q().ucb(x) <= 1.0));
    const auto out = opt.report_measurement(p.x_opt, task, true_f(p.x_opt[0]), true_q(p.x_opt[0]));
    violations += out.violation ? 1 : 0;
  }
  CHECK(violations == 0);
  const Proposal a = opt.final_optimum(task, 3);
  const Proposal b = opt.final_optimum(task, 3);
  CHECK(a.x_opt == b.x_opt);
  // True constrained optimum is q = 1 at x = 5/6; the pessimistic one sits just inside.
  CHECK(a.x_opt[0] > 0.6);
  CHECK(a.x_opt[0] < 5.0 / 6.0);
  const Proposal near = opt.final_optimum(v1(0.01), 3);
  CHECK(std::abs(near.x_opt[0] - a.x_opt[0]) < 0.02);
  const Proposal far = opt.final_optimum(v1(10.0), 3);
  CHECK(far.is_seed_point);
}

TEST_CASE("baseline explores into the optimistic set") {
  Toy t;
  t.config.variant = Variant::Baseline;
  // Observed points are narrower than 6 sigma_n; a tighter epsilon keeps them as expanders.
  t.config.epsilon = 0.05;
  GooseOptimizer opt = t.make();
  for (double x : {0.3, 0.4, 0.5}) {
    opt.report_measurement(v1(x), v1(0.0), true_f(x), true_q(x));
  }
  const Vector task = v1(0.0);
  std::vector<InputPoint> safe;
  for (const auto& r : opt.history().records()) {
    if (pessimistic_member(opt.gp_q(), concat(r.x_opt, task), 1.0)) {
      safe.push_back({r.x_opt, task});
    }
  }
  const OptimisticSet opt_set(opt.gp_q(), expander_set(opt.gp_q(), safe, opt.epsilon()),
                              opt.epsilon(), 1.0, DistanceMetric::LengthscaleWeighted);
  std::size_t pess = 0;
  std::size_t extra = 0;
  for (int i = 0; i <= 400; ++i) {
    const InputPoint p{v1(i / 400.0), task};
    const bool in_pess = opt.gp_q().ucb(p.joined()) <= 1.0;
    pess += in_pess ? 1 : 0;
    extra += (!in_pess && opt_set.contains(p)) ? 1 : 0;
  }
  CHECK(pess > 0);
  CHECK(extra > 0);
  const Proposal b = opt.propose(task, 4);
  const Proposal m = opt.active_step(task, 4);
  CHECK(b.acquisition <= m.acquisition + 1e-9);
}

TEST_CASE("baseline cost grows with data, modified cost with a window does not") {
  Toy t;
  t.config.termination_count = 1000;
  t.config.variant = Variant::Baseline;
  GooseOptimizer base = t.make();
  t.config.variant = Variant::Modified;
  t.config.data_limit = 10;
  GooseOptimizer mod = t.make();
  const Vector task = v1(0.0);
  std::uint64_t base_small = 0;
  std::uint64_t mod_small = 0;
  for (int k = 0; k < 60; ++k) {
    const double x = 0.05 + 0.4 * ((k * 37) % 60) / 60.0;
    base.report_measurement(v1(x), task, true_f(x), true_q(x));
    mod.report_measurement(v1(x), task, true_f(x), true_q(x));
    if (k == 14) {
      base_small = base.propose(task, 1).work_units;
      mod_small = mod.propose(task, 1).work_units;
    }
  }
  CHECK(base.propose(task, 1).work_units > base_small);
  CHECK(mod.gp_f().size() == 10);
  CHECK(double(mod.propose(task, 1).work_units) < 3.0 * double(mod_small));
}

#include "goose/baselines.hpp"

#include <algorithm>
#include <ostream>

namespace goose {

std::vector<Vector> grid_permutations(const Grid& grids) {
  std::vector<Vector> out;
  if (grids.empty()) {
    return out;
  }
  for (const auto& g : grids) {
    if (g.empty()) {
      throw ContractViolation("grid dimensions must be non-empty");
    }
  }
  const auto dims = grids.size();
  std::vector<std::size_t> idx(dims, 0);
  while (true) {
    Vector v(static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
      v[static_cast<Eigen::Index>(d)] = grids[d][idx[d]];
    }
    out.push_back(std::move(v));
    std::size_t d = dims;
    while (d > 0) {
      --d;
      if (++idx[d] < grids[d].size()) {
        break;
      }
      idx[d] = 0;
      if (d == 0) {
        return out;
      }
    }
  }
}

GainGrid record_grid(const Grid& gain_grid, const Grid& task_grid, const GridEvaluator& evaluate) {
  const auto gains = grid_permutations(gain_grid);
  const auto tasks = grid_permutations(task_grid);
  if (gains.empty() || tasks.empty()) {
    throw ContractViolation("record_grid: grids must be non-empty");
  }
  GainGrid out{gain_grid, task_grid, {}};
  out.records.reserve(gains.size() * tasks.size());
  for (const auto& t : tasks) {
    for (const auto& g : gains) {
      GridRecord rec{g, t};
      try {
        const RunMetrics m = evaluate(g, t);
        rec.cost = m.cost;
        rec.constraint = m.constraint;
        rec.failed = m.unstable;
      } catch (const std::exception&) {
        rec.failed = true;
      }
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

const TaskOptimum& OptimumTable::at(const std::vector<std::size_t>& index) const {
  if (index.size() != task_grid.size()) {
    throw ContractViolation("optimum table index has the wrong rank");
  }
  std::size_t flat = 0;
  for (std::size_t d = 0; d < index.size(); ++d) {
    if (index[d] >= task_grid[d].size()) {
      throw ContractViolation("optimum table index out of range");
    }
    flat = flat * task_grid[d].size() + index[d];
  }
  return entries.at(flat);
}

OptimumTable select_per_task_optima(const GainGrid& grid, const ConstraintLimit& c) {
  OptimumTable table{grid.task_grid, {}};
  for (const auto& task : grid_permutations(grid.task_grid)) {
    TaskOptimum best{task, Vector(), 0.0, 0.0, false};
    for (const auto& rec : grid.records) {
      if (rec.task != task || rec.failed || rec.constraint > c.at(task)) {
        continue;
      }
      if (!best.feasible || rec.cost < best.cost ||
          (rec.cost == best.cost && lex_less(rec.x_opt, best.x_opt))) {
        best = TaskOptimum{task, rec.x_opt, rec.cost, rec.constraint, true};
      }
    }
    table.entries.push_back(std::move(best));
  }
  return table;
}

Vector lpv_interpolate(const OptimumTable& table, const VectorRef& task, const VectorRef& seed,
                       const VectorRef& lower, const VectorRef& upper) {
  const auto dims = table.task_grid.size();
  if (static_cast<std::size_t>(task.size()) != dims || dims == 0) {
    throw ContractViolation("lpv_interpolate: task dimension does not match the table");
  }
  std::vector<std::size_t> base(dims, 0);
  std::vector<double> weight(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto& g = table.task_grid[d];
    if (!std::is_sorted(g.begin(), g.end())) {
      throw ContractViolation("lpv_interpolate: task grids must be ascending");
    }
    if (g.size() == 1) {
      continue;
    }
    const double t = task[static_cast<Eigen::Index>(d)];
    const auto upper_it = std::upper_bound(g.begin(), g.end(), t);
    std::size_t i = upper_it == g.begin() ? 0 : static_cast<std::size_t>(upper_it - g.begin()) - 1;
    i = std::min(i, g.size() - 2);
    base[d] = i;
    weight[d] = (t - g[i]) / (g[i + 1] - g[i]);
  }

  Vector out = Vector::Zero(seed.size());
  const std::size_t corners = std::size_t{1} << dims;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::vector<std::size_t> index(dims);
    bool skip = false;
    for (std::size_t d = 0; d < dims; ++d) {
      const bool high = (mask >> d) & 1U;
      if (table.task_grid[d].size() == 1) {
        if (high) {
          skip = true;
          break;
        }
        index[d] = 0;
        continue;
      }
      index[d] = base[d] + (high ? 1 : 0);
      w *= high ? weight[d] : 1.0 - weight[d];
    }
    if (skip) {
      continue;
    }
    const TaskOptimum& corner = table.at(index);
    out += w * (corner.feasible ? Vector(corner.x_opt) : Vector(seed));
  }
  return out.cwiseMax(lower).cwiseMin(upper);
}

void write_grid_csv(const GainGrid& grid, std::ostream& os) {
  os.precision(12);
  os << "x_opt,task,cost,constraint,failed\n";
  for (const auto& r : grid.records) {
    auto join = [](const Vector& v) {
      std::string s;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        s += (i ? ";" : "") + std::to_string(v[i]);
      }
      return s;
    };
    os << join(r.x_opt) << ',' << join(r.task) << ',' << r.cost << ',' << r.constraint << ','
       << (r.failed ? 1 : 0) << '\n';
  }
}

}  // namespace goose

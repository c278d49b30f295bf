#include "bcpnn/sweep.hpp"

#include <Eigen/Core>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "bcpnn/commands.hpp"
#include "bcpnn/rng.hpp"

namespace bcpnn {

void SweepSpec::validate() const {
  base.validate();
  require_config(!tau_z_grid.empty(), "sweep.tau_z_grid is empty");
  require_config(!f_max_grid.empty(), "sweep.f_max_grid is empty");
  for (double tau_z : tau_z_grid) {
    require_config(tau_z > 0.0, "sweep: tau_z grid values must be > 0");
    require_config(tau_z >= base.sim.dt_ms,
                   "sweep: cell rejected, tau_z_ms = " + std::to_string(tau_z) +
                       " is below dt_ms");
  }
  for (double f_max : f_max_grid) {
    require_config(f_max > 0.0, "sweep: f_max grid values must be > 0");
    require_config(f_max * base.sim.dt_ms / 1000.0 <= 1.0,
                   "sweep: cell rejected, f_max_hz = " + std::to_string(f_max) +
                       " gives spike probability > 1 at dt_ms = " +
                       std::to_string(base.sim.dt_ms));
  }
}

std::uint64_t sweep_cell_seed(std::uint64_t master_seed, double tau_z_ms,
                              double f_max_hz) {
  return rng::hash3(master_seed, std::bit_cast<std::uint64_t>(tau_z_ms),
                    std::bit_cast<std::uint64_t>(f_max_hz));
}

ExperimentConfig sweep_cell_config(const SweepSpec& spec, double tau_z_ms,
                                   double f_max_hz) {
  ExperimentConfig cell = spec.base;
  cell.sim.tau_z_ms = tau_z_ms;
  cell.sim.f_max_hz = f_max_hz;
  // Keep tau_p valid if the grid pushes tau_z past it.
  cell.sim.tau_p_ms = std::max(cell.sim.tau_p_ms, tau_z_ms);
  cell.sim.seed = sweep_cell_seed(spec.base.sim.seed, tau_z_ms, f_max_hz);
  return cell;
}

std::vector<SweepCellResult> run_sweep(const SweepSpec& spec, std::ostream* progress) {
  spec.validate();
  struct Cell {
    double tau_z, f_max;
  };
  std::vector<Cell> cells;
  for (double tau_z : spec.tau_z_grid)
    for (double f_max : spec.f_max_grid) cells.push_back({tau_z, f_max});

  std::vector<SweepCellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;

  int workers = spec.base.sweep_workers;
  if (workers <= 0)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(cells.size()));

  // One worker keeps Eigen's own threading; a pool gets one thread each.
  const int eigen_threads_before = Eigen::nbThreads();
  if (workers > 1) Eigen::setNbThreads(1);

  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const auto [tau_z, f_max] = cells[idx];
      SweepCellResult& r = results[idx];
      r.tau_z_ms = tau_z;
      r.f_max_hz = f_max;
      try {
        const ExperimentConfig cell_cfg = sweep_cell_config(spec, tau_z, f_max);
        const CellOutcome outcome = run_cell(cell_cfg);
        r.accuracy_mean = outcome.accuracy.mean;
        r.accuracy_std = outcome.accuracy.stddev;
        r.ok = true;
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (r.ok)
          *progress << "sweep cell tau_z=" << tau_z << " f_max=" << f_max
                    << " accuracy=" << r.accuracy_mean << " +- " << r.accuracy_std
                    << "\n";
        else
          *progress << "sweep cell tau_z=" << tau_z << " f_max=" << f_max
                    << " FAILED: " << r.error << "\n";
        progress->flush();
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (workers > 1) Eigen::setNbThreads(eigen_threads_before);
  return results;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCellResult>& results) {
  os << "tau_z_ms,f_max_hz,accuracy_mean,accuracy_std\n";
  for (const auto& r : results) {
    char buf[160];
    if (r.ok)
      std::snprintf(buf, sizeof buf, "%.8g,%.8g,%.8g,%.8g\n", r.tau_z_ms, r.f_max_hz,
                    r.accuracy_mean, r.accuracy_std);
    else
      std::snprintf(buf, sizeof buf, "%.8g,%.8g,nan,nan\n", r.tau_z_ms, r.f_max_hz);
    os << buf;
  }
}

}  // namespace bcpnn

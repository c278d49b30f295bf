#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bcpnn/config.hpp"

namespace bcpnn {

/// tau_z x f_max grid over the reduced-dataset base configuration.
struct SweepSpec {
  std::vector<double> tau_z_grid;
  std::vector<double> f_max_grid;
  ExperimentConfig base;

  /// Rejects cells whose parameters violate the simulation invariants
  /// (f_max * dt > 1, tau_z < dt).
  void validate() const;
};

/// Cell seeds depend only on (master seed, tau_z, f_max): extending the grid
/// never reshuffles existing cells.
std::uint64_t sweep_cell_seed(std::uint64_t master_seed, double tau_z_ms,
                              double f_max_hz);

struct SweepCellResult {
  double tau_z_ms = 0.0;
  double f_max_hz = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  bool ok = false;
  std::string error;
};

/// Derive one cell's full configuration from the base.
ExperimentConfig sweep_cell_config(const SweepSpec& spec, double tau_z_ms,
                                   double f_max_hz);

/// Train + evaluate every cell in a worker pool. Per-cell failures are
/// recorded and the sweep continues.
std::vector<SweepCellResult> run_sweep(const SweepSpec& spec, std::ostream* progress);

/// CSV with header tau_z_ms,f_max_hz,accuracy_mean,accuracy_std.
void write_sweep_csv(std::ostream& os, const std::vector<SweepCellResult>& results);

}  // namespace bcpnn

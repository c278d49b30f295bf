#pragma once

#include <cstdint>

#include "bcpnn/common.hpp"

namespace bcpnn {

/// Time constants, spike scaling and RNG seed shared by all model equations.
struct SimParams {
  double dt_ms = 1.0;
  double tau_z_ms = 20.0;    // short-term trace time constant
  double tau_p_ms = 5000.0;  // long-term trace time constant
  double f_max_hz = 50.0;    // maximum firing rate
  double eps = 1e-6;         // probability floor inside the logs
  std::uint64_t seed = 42;

  /// Per-step spike probability for activation 1.
  double spike_prob_scale() const { return f_max_hz * dt_ms / 1000.0; }
  /// Geometric decay factor of a Z trace, 1 - dt/tau_z.
  double z_decay() const { return 1.0 - dt_ms / tau_z_ms; }
  /// Euler rate of the P traces, dt/tau_p.
  double p_rate() const { return dt_ms / tau_p_ms; }
  /// Euler rate of the support integration, dt/tau_z.
  double support_rate() const { return dt_ms / tau_z_ms; }

  void validate() const {
    require_config(dt_ms > 0.0, "sim.dt_ms must be > 0");
    require_config(tau_z_ms >= dt_ms, "sim.tau_z_ms must be >= dt_ms");
    require_config(tau_p_ms >= tau_z_ms, "sim.tau_p_ms must be >= tau_z_ms");
    require_config(f_max_hz > 0.0, "sim.f_max_hz must be > 0");
    require_config(spike_prob_scale() <= 1.0,
                   "sim: f_max_hz * dt_ms / 1000 must be <= 1 "
                   "(per-step spike probability)");
    require_config(eps > 0.0 && eps <= 1e-2, "sim.eps must be in (0, 1e-2]");
  }
};

}  // namespace bcpnn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bcpnn/geometry.hpp"
#include "bcpnn/sim_params.hpp"

namespace bcpnn {

/// Binary spike vector, one entry per minicolumn unit of a layer.
using SpikeVector = std::vector<std::uint8_t>;

/// Z and P traces for one projection (pre layer -> post layer).
/// p_joint is dense row-major [n_pre x n_post]; it is maintained for all
/// unit pairs, active or not, because the rewiring score needs silent pairs.
struct TraceState {
  std::vector<double> z_pre, z_post;
  std::vector<double> p_pre, p_post;
  std::vector<double> p_joint;
  std::size_t n_pre = 0, n_post = 0;

  static TraceState zeros(std::size_t n_pre, std::size_t n_post);
  double joint(std::size_t i, std::size_t j) const { return p_joint[i * n_post + j]; }
};

/// Support and activation of the hidden units.
struct NeuronState {
  std::vector<double> support;     // I_j, log domain
  std::vector<double> activation;  // pi_j, probability per unit
};

/// One Euler step of the Z trace: z' = (1 - dt/tau_z) z + s.
/// The tau_z/dt source scaling cancels the Euler factor, so a spike
/// increments its trace by exactly 1.
void update_z(std::span<double> z, std::span<const std::uint8_t> spikes,
              const SimParams& params);

/// Rate-mode Z assignment: the trace is the activation itself.
void set_z_from_activation(std::span<double> z, std::span<const double> activation);

/// One Euler step of all P traces: p' = p + (dt/tau_p)(z - p), and for the
/// joint trace the outer product z_pre z_post in place of z. Updates every
/// pair, including currently silent connections.
void update_p(TraceState& traces, const SimParams& params);

/// b_j = log(max(p_post, eps)).
double compute_bias(double p_post, double eps);

/// w_ij = log( max(p_joint, eps^2) / (max(p_pre, eps) * max(p_post, eps)) ).
double compute_weight(double p_pre, double p_post, double p_joint, double eps);

/// One Euler step of the support: I' = I + (dt/tau_z)(b - I) + sum_i s_i w_ij c_ij.
/// Each presynaptic spike deposits w_ij directly (tau_z/dt scaling cancels).
/// weights and conn_mask are row-major [n_pre x n_post], unit level.
template <typename WeightT>
void integrate_support(std::span<double> support, std::span<const double> bias,
                       std::span<const std::uint8_t> spikes_in,
                       const WeightT* weights, const std::uint8_t* conn_mask,
                       std::size_t n_pre, std::size_t n_post,
                       const SimParams& params) {
  require(support.size() == n_post && bias.size() == n_post,
          "integrate_support: support/bias size mismatch");
  require(spikes_in.size() == n_pre, "integrate_support: spike vector size mismatch");
  const double a = params.support_rate();
  for (std::size_t j = 0; j < n_post; ++j) support[j] += a * (bias[j] - support[j]);
  for (std::size_t i = 0; i < n_pre; ++i) {
    if (!spikes_in[i]) continue;
    const WeightT* row = weights + i * n_post;
    const std::uint8_t* crow = conn_mask + i * n_post;
    for (std::size_t j = 0; j < n_post; ++j)
      if (crow[j]) support[j] += static_cast<double>(row[j]);
  }
}

/// Rate-mode support step: I' = I + (dt/tau_z)(b + sum_i x_i w_ij c_ij - I),
/// with x the presynaptic activation communicated directly.
template <typename WeightT>
void integrate_support_rate(std::span<double> support, std::span<const double> bias,
                            std::span<const double> x_pre, const WeightT* weights,
                            const std::uint8_t* conn_mask, std::size_t n_pre,
                            std::size_t n_post, const SimParams& params) {
  require(support.size() == n_post && bias.size() == n_post,
          "integrate_support_rate: support/bias size mismatch");
  require(x_pre.size() == n_pre, "integrate_support_rate: activation size mismatch");
  const double a = params.support_rate();
  std::vector<double> drive(n_post, 0.0);
  for (std::size_t i = 0; i < n_pre; ++i) {
    if (x_pre[i] == 0.0) continue;
    const WeightT* row = weights + i * n_post;
    const std::uint8_t* crow = conn_mask + i * n_post;
    for (std::size_t j = 0; j < n_post; ++j)
      if (crow[j]) drive[j] += x_pre[i] * static_cast<double>(row[j]);
  }
  for (std::size_t j = 0; j < n_post; ++j)
    support[j] += a * (bias[j] + drive[j] - support[j]);
}

/// Soft winner-take-all: softmax over each hypercolumn of M units, with
/// per-hypercolumn max subtraction. Output sums to 1 per hypercolumn.
void hypercolumn_softmax(std::span<const double> support, const LayerGeometry& geometry,
                         std::span<double> activation);

/// Bernoulli spike sampling: unit j fires with probability
/// pi_j * f_max * dt / 1000, drawn from the unit's (seed, salt, step, unit)
/// counter substream. At most one spike per unit per step.
void sample_spikes(std::span<std::uint8_t> spikes, std::span<const double> activation,
                   const SimParams& params, std::uint64_t stream_salt,
                   std::uint64_t step_index);

}  // namespace bcpnn

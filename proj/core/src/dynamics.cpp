#include "bcpnn/dynamics.hpp"

#include <Eigen/Core>
#include <cmath>

#include "bcpnn/rng.hpp"

namespace bcpnn {

namespace {
using MapVec = Eigen::Map<Eigen::VectorXd>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;
}  // namespace

TraceState TraceState::zeros(std::size_t n_pre, std::size_t n_post) {
  TraceState t;
  t.n_pre = n_pre;
  t.n_post = n_post;
  t.z_pre.assign(n_pre, 0.0);
  t.z_post.assign(n_post, 0.0);
  t.p_pre.assign(n_pre, 0.0);
  t.p_post.assign(n_post, 0.0);
  t.p_joint.assign(n_pre * n_post, 0.0);
  return t;
}

void update_z(std::span<double> z, std::span<const std::uint8_t> spikes,
              const SimParams& params) {
  require(z.size() == spikes.size(), "update_z: z/spike length mismatch");
  const double decay = params.z_decay();
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = decay * z[i] + static_cast<double>(spikes[i]);
}

void set_z_from_activation(std::span<double> z, std::span<const double> activation) {
  require(z.size() == activation.size(), "set_z: length mismatch");
  std::copy(activation.begin(), activation.end(), z.begin());
}

void update_p(TraceState& t, const SimParams& params) {
  require(t.z_pre.size() == t.n_pre && t.p_pre.size() == t.n_pre,
          "update_p: pre trace shape mismatch");
  require(t.z_post.size() == t.n_post && t.p_post.size() == t.n_post,
          "update_p: post trace shape mismatch");
  require(t.p_joint.size() == t.n_pre * t.n_post, "update_p: joint trace shape mismatch");
  const double beta = params.p_rate();
  for (std::size_t i = 0; i < t.n_pre; ++i)
    t.p_pre[i] += beta * (t.z_pre[i] - t.p_pre[i]);
  for (std::size_t j = 0; j < t.n_post; ++j)
    t.p_post[j] += beta * (t.z_post[j] - t.p_post[j]);
  for (std::size_t i = 0; i < t.n_pre; ++i) {
    double* row = t.p_joint.data() + i * t.n_post;
    const double zi = t.z_pre[i];
    for (std::size_t j = 0; j < t.n_post; ++j)
      row[j] += beta * (zi * t.z_post[j] - row[j]);
  }
}

double compute_bias(double p_post, double eps) {
  return std::log(std::max(p_post, eps));
}

double compute_weight(double p_pre, double p_post, double p_joint, double eps) {
  return std::log(std::max(p_joint, eps * eps) /
                  (std::max(p_pre, eps) * std::max(p_post, eps)));
}

void hypercolumn_softmax(std::span<const double> support, const LayerGeometry& geometry,
                         std::span<double> activation) {
  const int m = geometry.n_minicolumns;
  require(support.size() == static_cast<std::size_t>(geometry.n_units()),
          "hypercolumn_softmax: support size does not match geometry");
  require(activation.size() == support.size(),
          "hypercolumn_softmax: activation size mismatch");
  for (int h = 0; h < geometry.n_hypercolumns; ++h) {
    CMapVec in(support.data() + h * m, m);
    MapVec out(activation.data() + h * m, m);
    require(!in.hasNaN(), "hypercolumn_softmax: NaN support");
    const double mx = in.maxCoeff();
    out = (in.array() - mx).exp();
    out /= out.sum();
  }
}

void sample_spikes(std::span<std::uint8_t> spikes, std::span<const double> activation,
                   const SimParams& params, std::uint64_t stream_salt,
                   std::uint64_t step_index) {
  require(spikes.size() == activation.size(), "sample_spikes: length mismatch");
  const double scale = params.spike_prob_scale();
  for (std::size_t u = 0; u < activation.size(); ++u) {
    const double pi = activation[u];
    require(pi >= 0.0 && pi <= 1.0, "sample_spikes: activation outside [0,1]");
    const double p = pi * scale;
    require(p <= 1.0, "sample_spikes: spike probability > 1");
    if (p <= 0.0) {
      spikes[u] = 0;
      continue;
    }
    spikes[u] =
        rng::unit_uniform(params.seed, stream_salt, step_index, u) < p ? 1 : 0;
  }
}

}  // namespace bcpnn

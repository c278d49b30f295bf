#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "bcpnn/dynamics.hpp"
#include "bcpnn/rng.hpp"
#include "support/test_util.hpp"

using namespace bcpnn;
using doctest::Approx;

namespace {

SimParams table_params() {
  SimParams p;
  p.dt_ms = 1.0;
  p.tau_z_ms = 20.0;
  p.tau_p_ms = 5000.0;
  p.f_max_hz = 50.0;
  p.eps = 1e-6;
  p.seed = 42;
  return p;
}

}  // namespace

TEST_CASE("update_z: spike increments by exactly one") {
  SimParams p = table_params();
  std::vector<double> z{0.0};
  std::vector<std::uint8_t> s{1};
  update_z(z, s, p);
  CHECK(z[0] == 1.0);
}

TEST_CASE("update_z: decay without spike") {
  SimParams p = table_params();
  std::vector<double> z{1.0};
  std::vector<std::uint8_t> s{0};
  update_z(z, s, p);
  CHECK(z[0] == Approx(0.95).epsilon(1e-14));
}

TEST_CASE("update_z: length mismatch is a contract violation") {
  SimParams p = table_params();
  std::vector<double> z{0.0, 0.0};
  std::vector<std::uint8_t> s{1};
  CHECK_THROWS_AS(update_z(z, s, p), ContractError);
}

TEST_CASE("update_z: stationary mean of a Bernoulli spike stream (Monte Carlo)") {
  // pi = 1, f_max = 50 Hz, tau_z = 20 ms: time-averaged z converges to 1.0.
  SimParams p = table_params();
  const double prob = p.spike_prob_scale();  // 0.05
  const double tau_over_dt = p.tau_z_ms / p.dt_ms;
  const std::int64_t burn_in = 2000, n_steps = 100000;
  std::vector<double> z{0.0};
  std::vector<std::uint8_t> s{0};
  double acc = 0.0;
  std::int64_t spikes = 0;
  for (std::int64_t t = 0; t < burn_in + n_steps; ++t) {
    s[0] = rng::unit_uniform(7, 1, static_cast<std::uint64_t>(t), 0) < prob ? 1 : 0;
    update_z(z, s, p);
    if (t >= burn_in) {
      acc += z[0];
      spikes += s[0];
    }
  }
  const double mean_z = acc / static_cast<double>(n_steps);
  const double target = 1.0;  // pi * f_max * tau_z / 1000
  CHECK(std::abs(mean_z - target) <=
        testutil::z_mean_tolerance(prob, tau_over_dt, n_steps));
  // sanity: the spike stream itself is binomial
  CHECK(std::abs(spikes / double(n_steps) - prob) <=
        3.0 * std::sqrt(prob * (1 - prob) / double(n_steps)));
}

TEST_CASE("update_p: first-order step response") {
  SimParams p = table_params();
  p.tau_p_ms = 100.0;
  const double beta = p.p_rate();
  TraceState t = TraceState::zeros(1, 1);
  t.z_pre[0] = 1.0;
  t.z_post[0] = 1.0;
  for (int n = 1; n <= 500; ++n) {
    update_p(t, p);
    const double euler_closed_form = 1.0 - std::pow(1.0 - beta, n);
    const double continuous = 1.0 - std::exp(-beta * n);
    CHECK(t.p_pre[0] == Approx(euler_closed_form).epsilon(1e-12));
    CHECK(std::abs(t.p_pre[0] - continuous) <= beta);  // within Euler error
  }
}

TEST_CASE("update_p: joint trace decays geometrically when z_pre is zero") {
  SimParams p = table_params();
  p.tau_p_ms = 50.0;
  TraceState t = TraceState::zeros(2, 2);
  t.p_joint = {0.4, 0.2, 0.1, 0.8};
  t.z_post = {1.0, 1.0};  // irrelevant while z_pre stays 0
  const auto initial = t.p_joint;
  const double factor = 1.0 - p.p_rate();
  for (int n = 1; n <= 40; ++n) {
    update_p(t, p);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(t.p_joint[i] == Approx(initial[i] * std::pow(factor, n)).epsilon(1e-12));
  }
}

TEST_CASE("update_p: independent streams drive p_joint to p_pre * p_post") {
  SimParams p = table_params();
  p.tau_z_ms = 20.0;
  p.tau_p_ms = 400.0;
  const double prob_pre = 0.05, prob_post = 0.03;
  TraceState t = TraceState::zeros(1, 1);
  std::vector<std::uint8_t> s_pre{0}, s_post{0};
  const std::int64_t burn_in = 20000, n_steps = 400000;
  std::vector<double> diff_series;
  diff_series.reserve(n_steps);
  for (std::int64_t step = 0; step < burn_in + n_steps; ++step) {
    const auto u = static_cast<std::uint64_t>(step);
    s_pre[0] = rng::unit_uniform(11, 1, u, 0) < prob_pre ? 1 : 0;
    s_post[0] = rng::unit_uniform(11, 2, u, 0) < prob_post ? 1 : 0;
    update_z(t.z_pre, s_pre, p);
    update_z(t.z_post, s_post, p);
    update_p(t, p);
    if (step >= burn_in) diff_series.push_back(t.p_joint[0] - t.p_pre[0] * t.p_post[0]);
  }
  const auto stats = testutil::batch_means(diff_series);
  // Independence baseline: the mean difference is zero within statistical
  // tolerance (this is what makes w -> 0).
  CHECK(std::abs(stats.mean) <= 5.0 * stats.se + 1e-6);
}

TEST_CASE("compute_bias examples") {
  CHECK(compute_bias(1.0, 1e-6) == 0.0);
  CHECK(compute_bias(0.0, 1e-6) == Approx(-13.8155).epsilon(1e-4));
  CHECK(compute_bias(0.5, 1e-6) == Approx(-0.6931).epsilon(1e-4));
}

TEST_CASE("compute_weight examples") {
  CHECK(compute_weight(0.5, 0.5, 0.25, 1e-6) == 0.0);  // independence
  CHECK(compute_weight(0.5, 0.5, 0.5, 1e-6) == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(compute_weight(0.0, 0.0, 0.0, 1e-6) == 0.0);  // floor rule
}

TEST_CASE("integrate_support: fixed point and deposit rule") {
  SimParams p = table_params();
  {
    // no input spikes, I = b stays put
    std::vector<double> support{-2.5, 1.25};
    std::vector<double> bias{-2.5, 1.25};
    std::vector<std::uint8_t> spikes{0};
    std::vector<double> w{0.7, -0.3};
    std::vector<std::uint8_t> c{1, 1};
    integrate_support<double>(support, bias, spikes, w.data(), c.data(), 1, 2, p);
    CHECK(support[0] == -2.5);
    CHECK(support[1] == 1.25);
  }
  {
    // single spike deposits w directly
    std::vector<double> support{0.0};
    std::vector<double> bias{0.0};
    std::vector<std::uint8_t> spikes{1};
    std::vector<double> w{2.0};
    std::vector<std::uint8_t> c{1};
    integrate_support<double>(support, bias, spikes, w.data(), c.data(), 1, 1, p);
    CHECK(support[0] == 2.0);
    // masked-out connection deposits nothing
    support[0] = 0.0;
    c[0] = 0;
    integrate_support<double>(support, bias, spikes, w.data(), c.data(), 1, 1, p);
    CHECK(support[0] == 0.0);
  }
  {
    std::vector<double> support{0.0};
    std::vector<double> bias{0.0, 0.0};
    std::vector<std::uint8_t> spikes{1};
    std::vector<double> w{1.0};
    std::vector<std::uint8_t> c{1};
    CHECK_THROWS_AS(
        integrate_support<double>(support, bias, spikes, w.data(), c.data(), 1, 1, p),
        ContractError);
  }
}

TEST_CASE("integrate_support: low-pass response to a constant-rate stream") {
  // steady-state time-averaged I ~= w * r * tau_z / 1000
  SimParams p = table_params();
  const double r_hz = 100.0, w_val = 1.5;
  const double prob = r_hz * p.dt_ms / 1000.0;
  const double tau_over_dt = p.tau_z_ms / p.dt_ms;
  std::vector<double> support{0.0}, bias{0.0};
  std::vector<double> w{w_val};
  std::vector<std::uint8_t> c{1}, s{0};
  const std::int64_t burn_in = 2000, n_steps = 100000;
  double acc = 0.0;
  for (std::int64_t t = 0; t < burn_in + n_steps; ++t) {
    s[0] = rng::unit_uniform(13, 1, static_cast<std::uint64_t>(t), 0) < prob ? 1 : 0;
    integrate_support<double>(support, bias, s, w.data(), c.data(), 1, 1, p);
    if (t >= burn_in) acc += support[0];
  }
  const double mean_support = acc / static_cast<double>(n_steps);
  const double target = w_val * r_hz * p.tau_z_ms / 1000.0;
  CHECK(std::abs(mean_support - target) <=
        std::abs(w_val) * testutil::z_mean_tolerance(prob, tau_over_dt, n_steps));
}

TEST_CASE("hypercolumn_softmax: symmetry, exact ratio, normalization") {
  LayerGeometry geom{1, 100};
  std::vector<double> support(100, 3.7);
  std::vector<double> pi(100);
  hypercolumn_softmax(support, geom, pi);
  for (double v : pi) CHECK(v == Approx(0.01).epsilon(1e-12));

  LayerGeometry two{1, 2};
  std::vector<double> s2{0.0, std::log(3.0)};
  std::vector<double> pi2(2);
  hypercolumn_softmax(s2, two, pi2);
  CHECK(pi2[0] == Approx(0.25).epsilon(1e-12));
  CHECK(pi2[1] == Approx(0.75).epsilon(1e-12));

  // normalization within 1e-6 per hypercolumn on random instances
  rng::Stream stream(5, 0);
  LayerGeometry geom3{7, 13};
  std::vector<double> s3(static_cast<std::size_t>(geom3.n_units()));
  for (auto& v : s3) v = 40.0 * (stream.next_double() - 0.5);
  std::vector<double> pi3(s3.size());
  hypercolumn_softmax(s3, geom3, pi3);
  for (int h = 0; h < geom3.n_hypercolumns; ++h) {
    double sum = 0.0;
    for (int m = 0; m < geom3.n_minicolumns; ++m) sum += pi3[geom3.unit(h, m)];
    CHECK(sum == Approx(1.0).epsilon(1e-6));
    for (int m = 0; m < geom3.n_minicolumns; ++m) {
      CHECK(pi3[geom3.unit(h, m)] >= 0.0);
      CHECK(pi3[geom3.unit(h, m)] <= 1.0);
    }
  }
}

TEST_CASE("hypercolumn_softmax: shift invariance to 1e-12") {
  rng::Stream stream(17, 0);
  LayerGeometry geom{3, 9};
  std::vector<double> support(27), shifted(27), pi(27), pi_shifted(27);
  for (auto& v : support) v = 10.0 * (stream.next_double() - 0.5);
  shifted = support;
  for (int m = 0; m < 9; ++m) shifted[geom.unit(1, m)] += 123.456;
  hypercolumn_softmax(support, geom, pi);
  hypercolumn_softmax(shifted, geom, pi_shifted);
  for (std::size_t i = 0; i < pi.size(); ++i)
    CHECK(std::abs(pi[i] - pi_shifted[i]) <= 1e-12);
}

TEST_CASE("hypercolumn_softmax: NaN support is a contract violation") {
  LayerGeometry geom{1, 3};
  std::vector<double> support{0.0, std::nan(""), 1.0};
  std::vector<double> pi(3);
  CHECK_THROWS_AS(hypercolumn_softmax(support, geom, pi), ContractError);
}

TEST_CASE("sample_spikes: deterministic edges") {
  SimParams p = table_params();
  p.f_max_hz = 1000.0;  // f_max * dt = 1: pure sampling of pi
  std::vector<double> pi{1.0, 0.0};
  std::vector<std::uint8_t> s(2);
  for (std::uint64_t step = 0; step < 200; ++step) {
    sample_spikes(s, pi, p, 0, step);
    CHECK(s[0] == 1);  // probability exactly 1
    CHECK(s[1] == 0);  // probability exactly 0
  }
}

TEST_CASE("sample_spikes: invalid activation is a contract violation") {
  SimParams p = table_params();
  std::vector<double> pi{1.5};
  std::vector<std::uint8_t> s(1);
  CHECK_THROWS_AS(sample_spikes(s, pi, p, 0, 0), ContractError);
}

TEST_CASE("sample_spikes: empirical rate within 3 sigma") {
  SimParams p = table_params();  // f_max = 50
  std::vector<double> pi{1.0};
  std::vector<std::uint8_t> s(1);
  const std::int64_t n_steps = 100000;
  std::int64_t count = 0;
  for (std::int64_t t = 0; t < n_steps; ++t) {
    sample_spikes(s, pi, p, 3, static_cast<std::uint64_t>(t));
    count += s[0];
  }
  const double rate_hz = static_cast<double>(count) / (n_steps * p.dt_ms / 1000.0);
  const double prob = p.spike_prob_scale();
  const double sigma_hz =
      std::sqrt(prob * (1 - prob) / double(n_steps)) * 1000.0 / p.dt_ms;
  CHECK(std::abs(rate_hz - 50.0) <= 3.0 * sigma_hz);
}

TEST_CASE("rate equivalence: sampled Z statistics match pi * f_max * tau_z / 1000") {
  SimParams p = table_params();
  p.tau_z_ms = 20.0;
  p.f_max_hz = 50.0;
  const int n_units = 16;
  rng::Stream pi_stream(29, 0);
  std::vector<double> pi(n_units);
  for (auto& v : pi) v = 0.05 + 0.95 * pi_stream.next_double();
  std::vector<double> z(n_units, 0.0);
  std::vector<std::uint8_t> s(n_units);
  const std::int64_t burn_in = 2000, n_steps = 100000;
  std::vector<double> acc(n_units, 0.0);
  for (std::int64_t t = 0; t < burn_in + n_steps; ++t) {
    sample_spikes(s, pi, p, 9, static_cast<std::uint64_t>(t));
    update_z(z, s, p);
    if (t >= burn_in)
      for (int u = 0; u < n_units; ++u) acc[u] += z[u];
  }
  const double tau_over_dt = p.tau_z_ms / p.dt_ms;
  for (int u = 0; u < n_units; ++u) {
    const double mean_z = acc[u] / static_cast<double>(n_steps);
    const double prob = pi[u] * p.spike_prob_scale();
    const double target = pi[u] * p.f_max_hz * p.tau_z_ms / 1000.0;
    CHECK(std::abs(mean_z - target) <=
          testutil::z_mean_tolerance(prob, tau_over_dt, n_steps));
  }
}

TEST_CASE("scale invariance of the readout (w, b, pi levels)") {
  rng::Stream stream(31, 0);
  const double eps = 1e-6, alpha = 2.5;
  const int n_pre = 6;
  LayerGeometry hid{1, 4};
  std::vector<double> p_pre(n_pre), p_post(4), p_joint(n_pre * 4);
  for (auto& v : p_pre) v = 0.05 + stream.next_double() * 0.9;
  for (auto& v : p_post) v = 0.05 + stream.next_double() * 0.9;
  for (auto& v : p_joint) v = 0.05 + stream.next_double() * 0.9;

  std::vector<std::uint8_t> spikes(n_pre);
  for (auto& v : spikes) v = stream.next_double() < 0.5 ? 1 : 0;

  auto build = [&](double scale, std::vector<double>& w_out, std::vector<double>& b_out,
                   std::vector<double>& pi_out) {
    w_out.resize(n_pre * 4);
    b_out.resize(4);
    for (int j = 0; j < 4; ++j) b_out[j] = compute_bias(scale * p_post[j], eps);
    for (int i = 0; i < n_pre; ++i)
      for (int j = 0; j < 4; ++j)
        w_out[i * 4 + j] = compute_weight(scale * p_pre[i], scale * p_post[j],
                                          scale * scale * p_joint[i * 4 + j], eps);
    std::vector<double> support(4);
    for (int j = 0; j < 4; ++j) {
      support[j] = b_out[j];
      for (int i = 0; i < n_pre; ++i)
        if (spikes[i]) support[j] += w_out[i * 4 + j];
    }
    pi_out.resize(4);
    hypercolumn_softmax(support, hid, pi_out);
  };

  std::vector<double> w1, b1, pi1, w2, b2, pi2;
  build(1.0, w1, b1, pi1);
  build(alpha, w2, b2, pi2);
  for (std::size_t i = 0; i < w1.size(); ++i) CHECK(std::abs(w1[i] - w2[i]) <= 1e-9);
  const double shift = std::log(alpha);
  for (int j = 0; j < 4; ++j) CHECK(b2[j] - b1[j] == Approx(shift).epsilon(1e-12));
  for (int j = 0; j < 4; ++j) CHECK(std::abs(pi1[j] - pi2[j]) <= 1e-9);
}

TEST_CASE("boundedness of Z and P traces") {
  SimParams p = table_params();
  p.tau_z_ms = 10.0;
  p.tau_p_ms = 100.0;
  const double z_cap = p.tau_z_ms / p.dt_ms;
  TraceState t = TraceState::zeros(3, 2);
  std::vector<std::uint8_t> s_pre(3), s_post(2);
  double z_running_max = 0.0;
  for (std::int64_t step = 0; step < 20000; ++step) {
    const auto u = static_cast<std::uint64_t>(step);
    for (int i = 0; i < 3; ++i)
      s_pre[i] = rng::unit_uniform(37, 1, u, static_cast<std::uint64_t>(i)) < 0.4;
    for (int j = 0; j < 2; ++j)
      s_post[j] = rng::unit_uniform(37, 2, u, static_cast<std::uint64_t>(j)) < 0.4;
    update_z(t.z_pre, s_pre, p);
    update_z(t.z_post, s_post, p);
    update_p(t, p);
    for (double z : t.z_pre) {
      CHECK(z <= z_cap + 1e-9);
      CHECK(z >= 0.0);
      z_running_max = std::max(z_running_max, z);
    }
    for (double z : t.z_post) z_running_max = std::max(z_running_max, z);
    for (double v : t.p_pre) CHECK(v <= z_running_max + 1e-12);
    for (double v : t.p_joint) {
      CHECK(v <= z_cap * z_cap + 1e-9);
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("determinism: identical seed and inputs give bit-identical trajectories") {
  SimParams p = table_params();
  auto run = [&]() {
    LayerGeometry hid{2, 5};
    TraceState t = TraceState::zeros(4, 10);
    std::vector<double> pi(4, 0.6);
    std::vector<std::uint8_t> s(4);
    std::vector<double> out;
    for (std::int64_t step = 0; step < 500; ++step) {
      sample_spikes(s, pi, p, 1, static_cast<std::uint64_t>(step));
      update_z(t.z_pre, s, p);
      update_p(t, p);
    }
    out.insert(out.end(), t.z_pre.begin(), t.z_pre.end());
    out.insert(out.end(), t.p_joint.begin(), t.p_joint.end());
    return out;
  };
  const auto a = run();
  const auto b = run();
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("SimParams validation") {
  SimParams p = table_params();
  CHECK_NOTHROW(p.validate());
  SimParams bad = p;
  bad.f_max_hz = 1500.0;  // probability above 1 at dt = 1 ms
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.tau_z_ms = 0.5;  // below dt
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.eps = 0.5;  // outside (0, 1e-2]
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.tau_p_ms = 1.0;  // below tau_z
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

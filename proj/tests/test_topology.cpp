#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bcpnn/connectivity.hpp"
#include "bcpnn/rng.hpp"
#include "support/test_util.hpp"

using namespace bcpnn;
using doctest::Approx;

TEST_CASE("init_connectivity: k = round(p_conn * H_in) active inputs per hidden hc") {
  LayerGeometry in{784, 2}, hid{100, 100};
  const auto mask = init_connectivity(in, hid, 0.10, 42);
  CHECK(mask.k == 78);
  for (int h = 0; h < mask.n_hid_hc; ++h) CHECK(mask.active_count(h) == 78);
}

TEST_CASE("init_connectivity: full connectivity at p_conn = 1") {
  LayerGeometry in{12, 2}, hid{3, 4};
  const auto mask = init_connectivity(in, hid, 1.0, 1);
  for (int h = 0; h < 3; ++h) CHECK(mask.active_count(h) == 12);
}

TEST_CASE("init_connectivity: distinct hypercolumns draw distinct subsets") {
  LayerGeometry in{784, 2}, hid{8, 4};
  const auto mask = init_connectivity(in, hid, 0.10, 7);
  bool any_difference = false;
  for (int h = 1; h < mask.n_hid_hc && !any_difference; ++h)
    for (int g = 0; g < mask.n_in_hc; ++g)
      if (mask.is_active(g, h) != mask.is_active(g, 0)) {
        any_difference = true;
        break;
      }
  CHECK(any_difference);
}

TEST_CASE("init_connectivity: k = 0 is a configuration error") {
  LayerGeometry in{10, 2}, hid{2, 2};
  CHECK_THROWS_AS(init_connectivity(in, hid, 0.01, 1), ConfigError);
}

TEST_CASE("usage_score: independence gives zero") {
  LayerGeometry in{1, 2}, hid{1, 3};
  std::vector<double> p_pre{0.5, 0.5};
  std::vector<double> p_post{0.2, 0.3, 0.5};
  std::vector<double> p_joint(6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) p_joint[i * 3 + j] = p_pre[i] * p_post[j];
  const double score =
      usage_score<double>(0, 0, p_pre, p_post, p_joint.data(), in, hid, 1e-6);
  CHECK(std::abs(score) <= 1e-12);
}

TEST_CASE("usage_score: perfectly correlated binary pair gives log 2") {
  LayerGeometry in{1, 2}, hid{1, 2};
  std::vector<double> p_pre{0.5, 0.5}, p_post{0.5, 0.5};
  std::vector<double> p_joint{0.5, 0.0, 0.0, 0.5};
  const double score =
      usage_score<double>(0, 0, p_pre, p_post, p_joint.data(), in, hid, 1e-6);
  CHECK(score == Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("usage_score: matches brute-force mutual information, non-negative") {
  rng::Stream stream(3, 0);
  for (int rep = 0; rep < 60; ++rep) {
    const int m = rep % 2 ? 2 : 4;
    LayerGeometry in{1, m}, hid{1, m};
    std::vector<double> joint(static_cast<std::size_t>(m) * m);
    double total = 0.0;
    for (auto& v : joint) {
      v = 0.01 + stream.next_double();
      total += v;
    }
    for (auto& v : joint) v /= total;
    // marginals consistent with the joint table
    std::vector<double> p_pre(m, 0.0), p_post(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        p_pre[i] += joint[i * m + j];
        p_post[j] += joint[i * m + j];
      }
    const double score =
        usage_score<double>(0, 0, p_pre, p_post, joint.data(), in, hid, 1e-9);
    const double mi = testutil::mutual_information(joint, m, m);
    CHECK(score == Approx(mi).epsilon(1e-7));
    CHECK(score >= -1e-12);
  }
}

TEST_CASE("apply_rewiring: equal scores swap nothing") {
  LayerGeometry in{6, 2}, hid{2, 2};
  auto mask = init_connectivity(in, hid, 0.5, 5);
  std::vector<double> scores(static_cast<std::size_t>(2) * 6, 1.0);
  const auto swaps = apply_rewiring(mask, scores, 3);
  CHECK(swaps.empty());
}

TEST_CASE("apply_rewiring: a strictly better silent input replaces the worst active") {
  ConnectivityMask mask;
  mask.n_in_hc = 3;
  mask.n_hid_hc = 1;
  mask.k = 1;
  mask.active = {1, 0, 0};
  std::vector<double> scores{0.0, 1.0, 0.5};
  const auto swaps = apply_rewiring(mask, scores, 1);
  REQUIRE(swaps.size() == 1);
  CHECK(swaps[0].hid_hc == 0);
  CHECK(swaps[0].dropped_in_hc == 0);
  CHECK(swaps[0].added_in_hc == 1);
  CHECK(mask.active_count(0) == 1);
  CHECK(mask.is_active(1, 0));
}

TEST_CASE("apply_rewiring: property test over random score tables") {
  rng::Stream stream(11, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const int h_in = 4 + static_cast<int>(stream.next_below(12));
    const int h_hid = 1 + static_cast<int>(stream.next_below(5));
    LayerGeometry in{h_in, 2}, hid{h_hid, 3};
    const double p_conn = 0.2 + 0.6 * stream.next_double();
    if (static_cast<int>(std::lround(p_conn * h_in)) < 1) continue;
    auto mask = init_connectivity(in, hid, p_conn, stream.next_u64());
    const int k = mask.k;
    std::vector<double> scores(static_cast<std::size_t>(h_hid) * h_in);
    for (auto& v : scores) v = stream.next_double();
    const int swaps_per_event = static_cast<int>(stream.next_below(4));

    std::vector<double> before(h_hid, 0.0);
    for (int h = 0; h < h_hid; ++h)
      for (int g = 0; g < h_in; ++g)
        if (mask.is_active(g, h)) before[h] += scores[h * h_in + g];

    const auto swaps = apply_rewiring(mask, scores, swaps_per_event);

    for (int h = 0; h < h_hid; ++h) {
      CHECK(mask.active_count(h) == k);  // connection-count conservation
      double after = 0.0;
      for (int g = 0; g < h_in; ++g)
        if (mask.is_active(g, h)) after += scores[h * h_in + g];
      CHECK(after >= before[h] - 1e-12);  // monotone total usage
    }
    std::vector<int> per_hc(h_hid, 0);
    for (const auto& s : swaps) {
      ++per_hc[s.hid_hc];
      CHECK(scores[s.hid_hc * h_in + s.added_in_hc] >
            scores[s.hid_hc * h_in + s.dropped_in_hc]);
    }
    for (int h = 0; h < h_hid; ++h) CHECK(per_hc[h] <= swaps_per_event);
  }
}

TEST_CASE("mask expansion matches hypercolumn entries on a small geometry") {
  LayerGeometry in{4, 2}, hid{3, 3};
  const auto mask = init_connectivity(in, hid, 0.5, 9);
  const auto units = mask.expand_units(in, hid);
  for (int i = 0; i < in.n_units(); ++i)
    for (int j = 0; j < hid.n_units(); ++j)
      CHECK(units[static_cast<std::size_t>(i) * hid.n_units() + j] ==
            (mask.is_active(in.hypercolumn_of(i), hid.hypercolumn_of(j)) ? 1 : 0));
}

TEST_CASE("mask save/load round trip") {
  LayerGeometry in{9, 2}, hid{4, 2};
  const auto mask = init_connectivity(in, hid, 0.33, 13);
  std::stringstream ss;
  mask.save(ss);
  const auto loaded = ConnectivityMask::load(ss);
  CHECK(loaded.n_in_hc == mask.n_in_hc);
  CHECK(loaded.n_hid_hc == mask.n_hid_hc);
  CHECK(loaded.k == mask.k);
  CHECK(loaded.active == mask.active);

  std::stringstream bad("2 3 1\n1 0 1\n0 1");
  CHECK_THROWS_AS(ConnectivityMask::load(bad), ParseError);
}

TEST_CASE("RewireSchedule validation") {
  RewireSchedule s;
  s.interval_steps = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.interval_steps = 10;
  s.swaps_per_event = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

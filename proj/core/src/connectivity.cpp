#include "bcpnn/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bcpnn/rng.hpp"

namespace bcpnn {

int ConnectivityMask::active_count(int hid_hc) const {
  const std::uint8_t* row = active.data() + static_cast<std::size_t>(hid_hc) * n_in_hc;
  return static_cast<int>(std::count(row, row + n_in_hc, std::uint8_t{1}));
}

std::vector<std::uint8_t> ConnectivityMask::expand_units(
    const LayerGeometry& in_geom, const LayerGeometry& hid_geom) const {
  const std::size_t n_pre = static_cast<std::size_t>(in_geom.n_units());
  const std::size_t n_post = static_cast<std::size_t>(hid_geom.n_units());
  std::vector<std::uint8_t> unit_mask(n_pre * n_post, 0);
  for (std::size_t i = 0; i < n_pre; ++i) {
    const int hi = in_geom.hypercolumn_of(static_cast<int>(i));
    for (std::size_t j = 0; j < n_post; ++j) {
      const int hj = hid_geom.hypercolumn_of(static_cast<int>(j));
      unit_mask[i * n_post + j] = is_active(hi, hj) ? 1 : 0;
    }
  }
  return unit_mask;
}

void ConnectivityMask::save(std::ostream& os) const {
  os << n_hid_hc << ' ' << n_in_hc << ' ' << k << '\n';
  for (int h = 0; h < n_hid_hc; ++h) {
    const std::uint8_t* row = active.data() + static_cast<std::size_t>(h) * n_in_hc;
    for (int g = 0; g < n_in_hc; ++g) {
      if (g) os << ' ';
      os << static_cast<int>(row[g]);
    }
    os << '\n';
  }
}

ConnectivityMask ConnectivityMask::load(std::istream& is) {
  ConnectivityMask m;
  if (!(is >> m.n_hid_hc >> m.n_in_hc >> m.k))
    throw ParseError("connectivity mask: bad header");
  if (m.n_hid_hc <= 0 || m.n_in_hc <= 0)
    throw ParseError("connectivity mask: non-positive dimensions");
  m.active.assign(static_cast<std::size_t>(m.n_hid_hc) * m.n_in_hc, 0);
  for (std::size_t idx = 0; idx < m.active.size(); ++idx) {
    int v;
    if (!(is >> v)) throw ParseError("connectivity mask: truncated matrix");
    if (v != 0 && v != 1) throw ParseError("connectivity mask: entries must be 0/1");
    m.active[idx] = static_cast<std::uint8_t>(v);
  }
  return m;
}

ConnectivityMask init_connectivity(const LayerGeometry& in_geom,
                                   const LayerGeometry& hid_geom, double p_conn,
                                   std::uint64_t seed) {
  require_config(p_conn > 0.0 && p_conn <= 1.0, "topology.p_conn must be in (0, 1]");
  const int h_in = in_geom.n_hypercolumns;
  const int k = static_cast<int>(std::lround(p_conn * h_in));
  require_config(k >= 1, "topology.p_conn too small: k = round(p_conn * H_in) is 0");

  ConnectivityMask mask;
  mask.n_in_hc = h_in;
  mask.n_hid_hc = hid_geom.n_hypercolumns;
  mask.k = k;
  mask.active.assign(static_cast<std::size_t>(mask.n_hid_hc) * h_in, 0);
  for (int h = 0; h < mask.n_hid_hc; ++h) {
    rng::Stream stream(seed, rng::hash2(0x636f6e6eull, static_cast<std::uint64_t>(h)));
    for (int g : stream.sample_without_replacement(h_in, k)) mask.set_active(g, h, true);
  }
  return mask;
}

double usage_score(int in_hc, int hid_hc, const TraceState& traces,
                   const LayerGeometry& in_geom, const LayerGeometry& hid_geom,
                   double eps) {
  return usage_score<double>(in_hc, hid_hc, traces.p_pre, traces.p_post,
                             traces.p_joint.data(), in_geom, hid_geom, eps);
}

template <typename JointT>
std::vector<double> usage_score_table(std::span<const double> p_pre,
                                      std::span<const double> p_post,
                                      const JointT* p_joint,
                                      const LayerGeometry& in_geom,
                                      const LayerGeometry& hid_geom, double eps) {
  std::vector<double> table(static_cast<std::size_t>(hid_geom.n_hypercolumns) *
                            in_geom.n_hypercolumns);
  for (int h = 0; h < hid_geom.n_hypercolumns; ++h)
    for (int g = 0; g < in_geom.n_hypercolumns; ++g)
      table[static_cast<std::size_t>(h) * in_geom.n_hypercolumns + g] =
          usage_score(g, h, p_pre, p_post, p_joint, in_geom, hid_geom, eps);
  return table;
}

std::vector<SwapEvent> apply_rewiring(ConnectivityMask& mask,
                                      std::span<const double> score_table,
                                      int swaps_per_event) {
  require(score_table.size() ==
              static_cast<std::size_t>(mask.n_hid_hc) * mask.n_in_hc,
          "apply_rewiring: score table shape mismatch");
  std::vector<SwapEvent> swaps;
  if (swaps_per_event == 0) return swaps;
  const int h_in = mask.n_in_hc;
  std::vector<int> active_hcs, silent_hcs;
  for (int h = 0; h < mask.n_hid_hc; ++h) {
    const double* score = score_table.data() + static_cast<std::size_t>(h) * h_in;
    active_hcs.clear();
    silent_hcs.clear();
    for (int g = 0; g < h_in; ++g)
      (mask.is_active(g, h) ? active_hcs : silent_hcs).push_back(g);
    // Lowest-scoring active candidates first, highest-scoring silent first.
    // Ties broken by hypercolumn index so the outcome is deterministic.
    std::sort(active_hcs.begin(), active_hcs.end(), [&](int a, int b) {
      return score[a] != score[b] ? score[a] < score[b] : a < b;
    });
    std::sort(silent_hcs.begin(), silent_hcs.end(), [&](int a, int b) {
      return score[a] != score[b] ? score[a] > score[b] : a < b;
    });
    const int n_swap = std::min(
        swaps_per_event, static_cast<int>(std::min(active_hcs.size(), silent_hcs.size())));
    for (int t = 0; t < n_swap; ++t) {
      const int drop = active_hcs[t];
      const int add = silent_hcs[t];
      if (!(score[add] > score[drop])) break;  // strict improvement only
      mask.set_active(drop, h, false);
      mask.set_active(add, h, true);
      swaps.push_back({h, drop, add});
    }
  }
  return swaps;
}

template <typename JointT>
std::vector<SwapEvent> rewire(ConnectivityMask& mask, std::span<const double> p_pre,
                              std::span<const double> p_post, const JointT* p_joint,
                              const LayerGeometry& in_geom,
                              const LayerGeometry& hid_geom,
                              const RewireSchedule& schedule, double eps) {
  const auto table =
      usage_score_table(p_pre, p_post, p_joint, in_geom, hid_geom, eps);
  return apply_rewiring(mask, table, schedule.swaps_per_event);
}

std::vector<SwapEvent> rewire(ConnectivityMask& mask, const TraceState& traces,
                              const LayerGeometry& in_geom,
                              const LayerGeometry& hid_geom,
                              const RewireSchedule& schedule, double eps) {
  return rewire<double>(mask, traces.p_pre, traces.p_post, traces.p_joint.data(),
                        in_geom, hid_geom, schedule, eps);
}

// Instantiations for the double (reference) and float (engine) joint tensors.
template std::vector<double> usage_score_table<double>(std::span<const double>,
                                                       std::span<const double>,
                                                       const double*,
                                                       const LayerGeometry&,
                                                       const LayerGeometry&, double);
template std::vector<double> usage_score_table<float>(std::span<const double>,
                                                      std::span<const double>,
                                                      const float*,
                                                      const LayerGeometry&,
                                                      const LayerGeometry&, double);
template std::vector<SwapEvent> rewire<double>(ConnectivityMask&, std::span<const double>,
                                               std::span<const double>, const double*,
                                               const LayerGeometry&,
                                               const LayerGeometry&,
                                               const RewireSchedule&, double);
template std::vector<SwapEvent> rewire<float>(ConnectivityMask&, std::span<const double>,
                                              std::span<const double>, const float*,
                                              const LayerGeometry&, const LayerGeometry&,
                                              const RewireSchedule&, double);

}  // namespace bcpnn

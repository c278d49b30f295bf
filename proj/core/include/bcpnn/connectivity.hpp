#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "bcpnn/dynamics.hpp"
#include "bcpnn/geometry.hpp"

namespace bcpnn {

/// Sparse binary connectivity at hypercolumn granularity. Unit pair (i, j)
/// is connected iff active(hc(i), hc(j)). Every hidden hypercolumn keeps
/// exactly k active input hypercolumns for the whole run.
struct ConnectivityMask {
  int n_in_hc = 0;
  int n_hid_hc = 0;
  int k = 0;
  std::vector<std::uint8_t> active;  // row-major [hid_hc][in_hc]

  bool is_active(int in_hc, int hid_hc) const {
    return active[static_cast<std::size_t>(hid_hc) * n_in_hc + in_hc] != 0;
  }
  void set_active(int in_hc, int hid_hc, bool v) {
    active[static_cast<std::size_t>(hid_hc) * n_in_hc + in_hc] = v ? 1 : 0;
  }
  int active_count(int hid_hc) const;

  /// Unit-level expansion into a row-major [n_pre_units x n_post_units] mask.
  std::vector<std::uint8_t> expand_units(const LayerGeometry& in_geom,
                                         const LayerGeometry& hid_geom) const;

  /// Text matrix, one row per hidden hypercolumn, 0/1 entries.
  void save(std::ostream& os) const;
  static ConnectivityMask load(std::istream& is);
};

struct RewireSchedule {
  std::int64_t interval_steps = 30000;  // 100 patterns at the default protocol
  int swaps_per_event = 1;

  void validate() const {
    require_config(interval_steps >= 1, "rewire.interval_steps must be >= 1");
    require_config(swaps_per_event >= 0, "rewire.swaps_per_event must be >= 0");
  }
};

struct SwapEvent {
  int hid_hc;
  int dropped_in_hc;
  int added_in_hc;
};

/// Each hidden hypercolumn independently picks k = round(p_conn * H_in)
/// distinct input hypercolumns, from substream (seed, hid_hc).
ConnectivityMask init_connectivity(const LayerGeometry& in_geom,
                                   const LayerGeometry& hid_geom, double p_conn,
                                   std::uint64_t seed);

/// Mutual-information style usage score of one (input hc, hidden hc) pair:
/// sum over unit pairs of p_joint * w after normalizing each trace by its
/// hypercolumn sum. Zero when all pairs are statistically independent.
template <typename JointT>
double usage_score(int in_hc, int hid_hc, std::span<const double> p_pre,
                   std::span<const double> p_post, const JointT* p_joint,
                   const LayerGeometry& in_geom, const LayerGeometry& hid_geom,
                   double eps) {
  const int mi = in_geom.n_minicolumns;
  const int mh = hid_geom.n_minicolumns;
  const std::size_t n_post = static_cast<std::size_t>(hid_geom.n_units());
  const int i0 = in_geom.unit(in_hc, 0);
  const int j0 = hid_geom.unit(hid_hc, 0);

  double pre_sum = 0.0, post_sum = 0.0, joint_sum = 0.0;
  for (int a = 0; a < mi; ++a) pre_sum += p_pre[i0 + a];
  for (int b = 0; b < mh; ++b) post_sum += p_post[j0 + b];
  for (int a = 0; a < mi; ++a) {
    const JointT* row = p_joint + static_cast<std::size_t>(i0 + a) * n_post + j0;
    for (int b = 0; b < mh; ++b) joint_sum += static_cast<double>(row[b]);
  }
  if (pre_sum <= 0.0 || post_sum <= 0.0 || joint_sum <= 0.0) return 0.0;

  double score = 0.0;
  for (int a = 0; a < mi; ++a) {
    const double pa = p_pre[i0 + a] / pre_sum;
    const JointT* row = p_joint + static_cast<std::size_t>(i0 + a) * n_post + j0;
    for (int b = 0; b < mh; ++b) {
      const double pb = p_post[j0 + b] / post_sum;
      const double pj = static_cast<double>(row[b]) / joint_sum;
      score += pj * compute_weight(pa, pb, pj, eps);
    }
  }
  return score;
}

double usage_score(int in_hc, int hid_hc, const TraceState& traces,
                   const LayerGeometry& in_geom, const LayerGeometry& hid_geom,
                   double eps);

/// Score every (input hc, hidden hc) pair; row-major [hid_hc][in_hc].
template <typename JointT>
std::vector<double> usage_score_table(std::span<const double> p_pre,
                                      std::span<const double> p_post,
                                      const JointT* p_joint,
                                      const LayerGeometry& in_geom,
                                      const LayerGeometry& hid_geom, double eps);

/// Per hidden hypercolumn, swap the lowest-scoring active inputs for the
/// highest-scoring silent ones, up to swaps_per_event, only on strict score
/// improvement. Preserves the per-hypercolumn active count. score_table is
/// row-major [hid_hc][in_hc].
std::vector<SwapEvent> apply_rewiring(ConnectivityMask& mask,
                                      std::span<const double> score_table,
                                      int swaps_per_event);

template <typename JointT>
std::vector<SwapEvent> rewire(ConnectivityMask& mask, std::span<const double> p_pre,
                              std::span<const double> p_post, const JointT* p_joint,
                              const LayerGeometry& in_geom,
                              const LayerGeometry& hid_geom,
                              const RewireSchedule& schedule, double eps);

/// Convenience overload over a full TraceState (reference path, tests).
std::vector<SwapEvent> rewire(ConnectivityMask& mask, const TraceState& traces,
                              const LayerGeometry& in_geom,
                              const LayerGeometry& hid_geom,
                              const RewireSchedule& schedule, double eps);

}  // namespace bcpnn

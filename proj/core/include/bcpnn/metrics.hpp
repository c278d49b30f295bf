#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bcpnn/engine.hpp"

namespace bcpnn {

/// Spike events of a selected unit set over a recording window, ordered
/// lexically by (step, unit).
struct SpikeRecord {
  std::vector<std::pair<std::int64_t, int>> events;  // (step within window, unit)
  std::int64_t n_steps = 0;
  std::vector<int> units;  // recorded unit ids (network indexing)
};

struct RateEstimateParams {
  double sigma_ms = 50.0;
  double truncation_sigmas = 4.0;

  void validate() const {
    require_config(sigma_ms > 0.0, "rates.sigma_ms must be > 0");
    require_config(truncation_sigmas > 0.0, "rates.truncation_sigmas must be > 0");
  }
};

/// Instantaneous firing rate in spikes/s per recorded unit: the spike train
/// convolved with a truncated Gaussian kernel renormalized to unit area.
/// Output is indexed like record.units; each series has record.n_steps samples.
std::vector<std::vector<double>> estimate_rates(const SpikeRecord& record,
                                                const RateEstimateParams& params,
                                                double dt_ms);

/// Frozen-plasticity replay that records spikes and support of selected units.
struct ReplayRecording {
  SpikeRecord spikes;
  std::vector<std::vector<double>> support_history;  // [recorded unit][step]
  std::vector<std::pair<std::int64_t, std::int64_t>> pattern_windows;  // [start,end)
  double dt_ms = 1.0;
};

ReplayRecording record_replay(Network& net, const ImageDataset& ds,
                              const ProtocolParams& protocol, Activity activity,
                              std::int64_t n_patterns, std::vector<int> units);

/// Plot-ready support traces: per-unit affine map of the support history to
/// [-80, -55] mV, a +40 mV impulse at spike steps, and a vertical offset of
/// 50 mV per unit rank. CSV columns: time_ms,unit,value_mv. Units whose
/// support is constant over the window map to -80 mV and are flagged in a
/// trailing comment line.
void export_support_traces(const ReplayRecording& recording, std::ostream& os);

/// Rate series as CSV: time_ms,unit,rate_hz.
void export_rates(const ReplayRecording& recording, const RateEstimateParams& params,
                  std::ostream& os);

/// Per hidden hypercolumn: the connected-pixel mask and one filter image per
/// minicolumn, w(pixel-ON -> unit) - w(pixel-OFF -> unit), zero outside the
/// mask. Writes rf_h<h>.txt per hypercolumn plus rf_index.txt.
void export_receptive_fields(Network& net, int image_width, int image_height,
                             const std::string& out_dir);

}  // namespace bcpnn

#include "bcpnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace bcpnn {

std::vector<std::vector<double>> estimate_rates(const SpikeRecord& record,
                                                const RateEstimateParams& params,
                                                double dt_ms) {
  params.validate();
  require(record.n_steps > 0, "estimate_rates: empty window");

  const int half = static_cast<int>(params.truncation_sigmas * params.sigma_ms / dt_ms + 0.5);
  std::vector<double> kernel(2 * half + 1);
  double mass = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double t = k * dt_ms;
    kernel[k + half] = std::exp(-0.5 * t * t / (params.sigma_ms * params.sigma_ms));
    mass += kernel[k + half];
  }
  // Unit area in seconds: a lone spike integrates to one.
  const double norm = 1.0 / (mass * dt_ms / 1000.0);
  for (auto& v : kernel) v *= norm;

  std::vector<std::vector<double>> rates(record.units.size());
  for (auto& r : rates) r.assign(static_cast<std::size_t>(record.n_steps), 0.0);
  std::vector<std::pair<int, int>> slots;  // unit id -> row
  slots.reserve(record.units.size());
  for (std::size_t s = 0; s < record.units.size(); ++s)
    slots.emplace_back(record.units[s], static_cast<int>(s));

  for (const auto& [step, unit] : record.events) {
    int row = -1;
    for (const auto& [u, s] : slots)
      if (u == unit) {
        row = s;
        break;
      }
    if (row < 0) continue;
    auto& series = rates[static_cast<std::size_t>(row)];
    const std::int64_t lo = std::max<std::int64_t>(0, step - half);
    const std::int64_t hi = std::min<std::int64_t>(record.n_steps - 1, step + half);
    for (std::int64_t t = lo; t <= hi; ++t)
      series[static_cast<std::size_t>(t)] += kernel[static_cast<std::size_t>(t - step + half)];
  }
  return rates;
}

ReplayRecording record_replay(Network& net, const ImageDataset& ds,
                              const ProtocolParams& protocol, Activity activity,
                              std::int64_t n_patterns, std::vector<int> units) {
  require(n_patterns >= 1, "record_replay: need at least one pattern");
  require(static_cast<std::size_t>(n_patterns) <= ds.size(),
          "record_replay: not enough patterns in dataset");
  const double dt = net.params().dt_ms;
  const std::int64_t np = protocol.pattern_steps(dt);
  const std::int64_t ng = protocol.gap_steps(dt);
  const RunMode mode{activity, Plasticity::kFrozen};

  ReplayRecording rec;
  rec.dt_ms = dt;
  rec.spikes.units = std::move(units);
  rec.spikes.n_steps = n_patterns * (np + ng);
  rec.support_history.assign(rec.spikes.units.size(), {});
  for (auto& h : rec.support_history) h.reserve(static_cast<std::size_t>(rec.spikes.n_steps));

  std::int64_t t_local = 0;
  for (std::int64_t p = 0; p < n_patterns; ++p) {
    const auto img = ds.image(static_cast<std::size_t>(p));
    const auto activation = encode_input(
        {img, static_cast<std::size_t>(ds.n_pixels())}, net.input_geometry());
    rec.pattern_windows.emplace_back(t_local, t_local + np);
    net.set_input(activation);
    for (std::int64_t t = 0; t < np + ng; ++t) {
      if (t == np) net.clear_input();
      net.tick(mode);
      for (std::size_t s = 0; s < rec.spikes.units.size(); ++s) {
        const int u = rec.spikes.units[s];
        rec.support_history[s].push_back(net.support()(u));
        if (activity == Activity::kSpiking && net.hidden_spikes()[static_cast<std::size_t>(u)])
          rec.spikes.events.emplace_back(t_local, u);
      }
      ++t_local;
    }
  }
  return rec;
}

void export_support_traces(const ReplayRecording& recording, std::ostream& os) {
  os << "time_ms,unit,value_mv\n";
  std::vector<int> flat_units;
  const auto& units = recording.spikes.units;
  for (std::size_t s = 0; s < units.size(); ++s) {
    const auto& hist = recording.support_history[s];
    require(!hist.empty(), "export_support_traces: no support history recorded");
    const auto [mn_it, mx_it] = std::minmax_element(hist.begin(), hist.end());
    const double mn = *mn_it, mx = *mx_it;
    const bool degenerate = mn == mx;
    if (degenerate) flat_units.push_back(units[s]);
    const double offset = 50.0 * static_cast<double>(s);

    // spike lookup for this unit
    std::vector<std::uint8_t> spiked(hist.size(), 0);
    for (const auto& [step, unit] : recording.spikes.events)
      if (unit == units[s]) spiked[static_cast<std::size_t>(step)] = 1;

    for (std::size_t t = 0; t < hist.size(); ++t) {
      double mv = degenerate ? -80.0 : -80.0 + 25.0 * (hist[t] - mn) / (mx - mn);
      if (spiked[t]) mv += 40.0;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f,%d,%.6g\n", recording.dt_ms * (t + 1),
                    units[s], mv + offset);
      os << buf;
    }
  }
  for (int u : flat_units) os << "# flat support, unit " << u << " mapped to -80 mV\n";
}

void export_rates(const ReplayRecording& recording, const RateEstimateParams& params,
                  std::ostream& os) {
  const auto rates = estimate_rates(recording.spikes, params, recording.dt_ms);
  os << "time_ms,unit,rate_hz\n";
  for (std::size_t s = 0; s < recording.spikes.units.size(); ++s) {
    for (std::size_t t = 0; t < rates[s].size(); ++t) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f,%d,%.6g\n", recording.dt_ms * (t + 1),
                    recording.spikes.units[s], rates[s][t]);
      os << buf;
    }
  }
}

void export_receptive_fields(Network& net, int image_width, int image_height,
                             const std::string& out_dir) {
  const auto& in_geom = net.input_geometry();
  const auto& hid_geom = net.hidden_geometry();
  require(image_width * image_height == in_geom.n_hypercolumns,
          "export_receptive_fields: image dims do not match input hypercolumns");
  require(in_geom.n_minicolumns == 2,
          "export_receptive_fields: complement-coded input expected");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const auto& w = net.weights();
  const auto& mask = net.mask();
  const int mh = hid_geom.n_minicolumns;

  std::ofstream index(fs::path(out_dir) / "rf_index.txt");
  if (!index) throw ConfigError("cannot write rf index: " + out_dir);
  index << "# hypercolumn file n_minicolumns width height\n";

  for (int h = 0; h < hid_geom.n_hypercolumns; ++h) {
    const std::string fname = "rf_h" + std::to_string(h) + ".txt";
    std::ofstream os(fs::path(out_dir) / fname);
    if (!os) throw ConfigError("cannot write rf file: " + fname);
    index << h << ' ' << fname << ' ' << mh << ' ' << image_width << ' '
          << image_height << '\n';

    os << "# mask " << image_height << 'x' << image_width << '\n';
    for (int y = 0; y < image_height; ++y) {
      for (int x = 0; x < image_width; ++x) {
        const int pixel = y * image_width + x;
        if (x) os << ' ';
        os << (mask.is_active(pixel, h) ? 1 : 0);
      }
      os << '\n';
    }
    for (int m = 0; m < mh; ++m) {
      const int j = hid_geom.unit(h, m);
      os << "# filter minicolumn " << m << '\n';
      for (int y = 0; y < image_height; ++y) {
        for (int x = 0; x < image_width; ++x) {
          const int pixel = y * image_width + x;
          double v = 0.0;
          if (mask.is_active(pixel, h))
            v = static_cast<double>(w(in_geom.unit(pixel, 0), j)) -
                static_cast<double>(w(in_geom.unit(pixel, 1), j));
          char buf[32];
          std::snprintf(buf, sizeof buf, "%s%.6g", x ? " " : "", v);
          os << buf;
        }
        os << '\n';
      }
    }
  }
}

}  // namespace bcpnn

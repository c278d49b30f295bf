#pragma once

#include <string>
#include <vector>

#include "bcpnn/connectivity.hpp"
#include "bcpnn/engine.hpp"
#include "bcpnn/geometry.hpp"
#include "bcpnn/readout.hpp"
#include "bcpnn/sim_params.hpp"

namespace bcpnn {

struct DataPaths {
  std::string train_images, train_labels;
  std::string test_images, test_labels;

  bool operator==(const DataPaths&) const = default;
};

/// Everything one run needs, parsed from a flat dotted-key text file.
struct ExperimentConfig {
  SimParams sim;
  LayerGeometry input_geom{784, 2};
  LayerGeometry hidden_geom{100, 100};
  double p_conn = 0.10;
  std::int64_t rewire_interval_patterns = 100;
  int swaps_per_event = 1;
  ProtocolParams protocol;
  Activity activity = Activity::kSpiking;
  EngineOptions engine;
  ClassifierParams classifier;
  int classifier_runs = 3;
  DataPaths data;
  std::int64_t subsample_train = 0;  // 0 keeps the full split
  std::int64_t subsample_test = 0;
  std::vector<double> sweep_tau_z_grid{1.0, 10.0, 50.0, 100.0, 300.0};
  std::vector<double> sweep_f_max_grid{50.0, 500.0};
  int sweep_workers = 0;  // 0 picks hardware concurrency
  std::string output_dir = "out";

  RewireSchedule rewire_schedule() const {
    RewireSchedule s;
    s.interval_steps = rewire_interval_patterns *
                       (protocol.pattern_steps(sim.dt_ms) + protocol.gap_steps(sim.dt_ms));
    s.swaps_per_event = swaps_per_event;
    return s;
  }

  void validate() const;

  bool operator==(const ExperimentConfig& other) const;
};

/// Parse "key = value" lines; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Full round-trippable dump of every key.
std::string serialize_config(const ExperimentConfig& config);

const char* activity_name(Activity a);
Activity activity_from_name(const std::string& name);

}  // namespace bcpnn

#pragma once

#include <string>
#include <vector>

#include "bcpnn/config.hpp"
#include "bcpnn/engine.hpp"

namespace bcpnn {

/// Train/test splits resolved from the config. With data.test_images set the
/// splits load separately (each optionally reduced by its subsample key);
/// otherwise both splits are drawn disjointly from the training pool via
/// stratified subsampling.
struct LoadedData {
  ImageDataset train, test;
};
LoadedData load_experiment_data(const ExperimentConfig& config, bool need_test);

Network build_network(const ExperimentConfig& config);

struct AccuracySummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over runs
  std::vector<double> per_run;
  EvalReport last_report;
};

/// Train classifier_runs classifiers with derived seeds on frozen features.
AccuracySummary evaluate_features(const FeatureMatrix& train_features,
                                  const std::vector<std::uint8_t>& train_labels,
                                  const FeatureMatrix& test_features,
                                  const std::vector<std::uint8_t>& test_labels,
                                  const ExperimentConfig& config);

/// Full unsupervised-train + readout-eval pipeline for one configuration.
struct CellOutcome {
  AccuracySummary accuracy;
  TrainLog log;
};
CellOutcome run_cell(const ExperimentConfig& config);

void cmd_train(const ExperimentConfig& config);
void cmd_eval(const ExperimentConfig& config, const std::string& checkpoint_path);
void cmd_sweep(const ExperimentConfig& config);
void cmd_export(const ExperimentConfig& config, const std::string& checkpoint_path,
                const std::string& what);

std::string sha256_file_hex(const std::string& path);

}  // namespace bcpnn

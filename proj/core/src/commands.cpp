#include "bcpnn/commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bcpnn/metrics.hpp"
#include "bcpnn/rng.hpp"
#include "bcpnn/sweep.hpp"

namespace bcpnn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file_hex(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open for hashing: " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw ConfigError("sha256 init failed");
  }
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

LoadedData load_experiment_data(const ExperimentConfig& config, bool need_test) {
  require_config(!config.data.train_images.empty(),
                 "missing config key: data.train_images");
  require_config(!config.data.train_labels.empty(),
                 "missing config key: data.train_labels");
  ImageDataset pool = load_idx(config.data.train_images, config.data.train_labels);

  LoadedData out;
  if (!config.data.test_images.empty()) {
    require_config(!config.data.test_labels.empty(),
                   "missing config key: data.test_labels");
    out.train = config.subsample_train > 0
                    ? subsample(pool, static_cast<std::size_t>(config.subsample_train),
                                0, config.sim.seed)
                          .first
                    : std::move(pool);
    ImageDataset test_pool = load_idx(config.data.test_images, config.data.test_labels);
    out.test = config.subsample_test > 0
                   ? subsample(test_pool,
                               static_cast<std::size_t>(config.subsample_test), 0,
                               config.sim.seed + 1)
                         .first
                   : std::move(test_pool);
  } else {
    // Reduced-benchmark mode: both splits drawn disjointly from one pool.
    require_config(config.subsample_train > 0,
                   "data.test_images not set: data.subsample_train must be > 0");
    if (need_test)
      require_config(config.subsample_test > 0,
                     "data.test_images not set: data.subsample_test must be > 0");
    auto [train, test] =
        subsample(pool, static_cast<std::size_t>(config.subsample_train),
                  static_cast<std::size_t>(config.subsample_test), config.sim.seed);
    out.train = std::move(train);
    out.test = std::move(test);
  }
  require_config(out.train.n_pixels() == config.input_geom.n_hypercolumns,
                 "dataset pixels (" + std::to_string(out.train.n_pixels()) +
                     ") != geometry.input_hypercolumns (" +
                     std::to_string(config.input_geom.n_hypercolumns) + ")");
  return out;
}

Network build_network(const ExperimentConfig& config) {
  return Network(config.input_geom, config.hidden_geom, config.sim, config.p_conn,
                 config.rewire_schedule(), config.engine);
}

AccuracySummary evaluate_features(const FeatureMatrix& train_features,
                                  const std::vector<std::uint8_t>& train_labels,
                                  const FeatureMatrix& test_features,
                                  const std::vector<std::uint8_t>& test_labels,
                                  const ExperimentConfig& config) {
  AccuracySummary summary;
  for (int run = 0; run < config.classifier_runs; ++run) {
    ClassifierParams params = config.classifier;
    params.seed = rng::hash3(config.sim.seed, 0x636c6673656564ull,
                             static_cast<std::uint64_t>(run));
    const auto curve = train_classifier(train_features, train_labels, params);
    summary.last_report = evaluate(curve.model, test_features, test_labels);
    summary.per_run.push_back(summary.last_report.accuracy);
  }
  double sum = 0.0;
  for (double a : summary.per_run) sum += a;
  summary.mean = sum / static_cast<double>(summary.per_run.size());
  if (summary.per_run.size() > 1) {
    double ss = 0.0;
    for (double a : summary.per_run) ss += (a - summary.mean) * (a - summary.mean);
    summary.stddev = std::sqrt(ss / static_cast<double>(summary.per_run.size() - 1));
  }
  return summary;
}

CellOutcome run_cell(const ExperimentConfig& config) {
  config.validate();
  const LoadedData data = load_experiment_data(config, /*need_test=*/true);
  Network net = build_network(config);

  ProtocolParams protocol = config.protocol;
  protocol.n_patterns =
      std::min<std::int64_t>(protocol.n_patterns,
                             static_cast<std::int64_t>(data.train.size()));
  CellOutcome outcome;
  outcome.log = net.train_unsupervised(data.train, protocol,
                                       {config.activity, Plasticity::kLearning});
  const FeatureMatrix train_f =
      net.extract_features(data.train, {config.activity, Plasticity::kFrozen}, protocol);
  const FeatureMatrix test_f =
      net.extract_features(data.test, {config.activity, Plasticity::kFrozen}, protocol);
  outcome.accuracy =
      evaluate_features(train_f, data.train.labels, test_f, data.test.labels, config);
  return outcome;
}

namespace {

json config_json_echo(const ExperimentConfig& config) {
  json j;
  std::istringstream is(serialize_config(config));
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write: " + path.string());
  os << text;
}

}  // namespace

void cmd_train(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedData data = load_experiment_data(config, /*need_test=*/false);
  Network net = build_network(config);

  ProtocolParams protocol = config.protocol;
  require_config(static_cast<std::size_t>(protocol.n_patterns) <= data.train.size(),
                 "protocol.n_patterns (" + std::to_string(protocol.n_patterns) +
                     ") exceeds training set size (" +
                     std::to_string(data.train.size()) + ")");

  const TrainLog log =
      net.train_unsupervised(data.train, protocol, {config.activity, Plasticity::kLearning});

  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);
  net.save_checkpoint((out / "checkpoint.bin").string());
  log.save_csv((out / "training_log.csv").string());

  {
    std::ofstream os(out / "mask.txt");
    if (!os) throw ConfigError("cannot write mask.txt");
    net.mask().save(os);
  }

  json manifest;
  manifest["config"] = config_json_echo(config);
  manifest["checkpoint_sha256"] = sha256_file_hex((out / "checkpoint.bin").string());
  manifest["dataset"] = {{"name", data.train.name},
                         {"n_train", data.train.size()},
                         {"pixels", data.train.n_pixels()}};
  manifest["epochs"] = protocol.n_epochs;
  manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "trained " << protocol.n_epochs << " epochs x " << protocol.n_patterns
            << " patterns; checkpoint: " << (out / "checkpoint.bin").string() << "\n";
}

void cmd_eval(const ExperimentConfig& config, const std::string& checkpoint_path) {
  config.validate();
  require_config(!checkpoint_path.empty(), "eval: --checkpoint is required");
  Network net = Network::load_checkpoint(checkpoint_path);
  require_config(net.input_geometry() == config.input_geom &&
                     net.hidden_geometry() == config.hidden_geom,
                 "eval: checkpoint geometry does not match the config geometry");

  const LoadedData data = load_experiment_data(config, /*need_test=*/true);
  const RunMode frozen{config.activity, Plasticity::kFrozen};
  const FeatureMatrix train_f = net.extract_features(data.train, frozen, config.protocol);
  const FeatureMatrix test_f = net.extract_features(data.test, frozen, config.protocol);
  const AccuracySummary summary =
      evaluate_features(train_f, data.train.labels, test_f, data.test.labels, config);

  fs::create_directories(config.output_dir);
  json report;
  report["accuracy_mean"] = summary.mean;
  report["accuracy_std"] = summary.stddev;
  report["accuracy_per_run"] = summary.per_run;
  report["n_runs"] = config.classifier_runs;
  report["mode"] = activity_name(config.activity);
  report["per_class_accuracy"] = summary.last_report.per_class_accuracy;
  std::vector<std::vector<int>> confusion;
  for (int r = 0; r < summary.last_report.confusion.rows(); ++r) {
    std::vector<int> row;
    for (int c = 0; c < summary.last_report.confusion.cols(); ++c)
      row.push_back(summary.last_report.confusion(r, c));
    confusion.push_back(std::move(row));
  }
  report["confusion"] = confusion;
  write_text(fs::path(config.output_dir) / "eval_report.json", report.dump(2) + "\n");

  char line[128];
  std::snprintf(line, sizeof line, "accuracy: %.2f +- %.2f %% (n = %d runs)\n",
                100.0 * summary.mean, 100.0 * summary.stddev, config.classifier_runs);
  std::cout << line;
}

void cmd_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepSpec spec;
  spec.base = config;
  spec.tau_z_grid = config.sweep_tau_z_grid;
  spec.f_max_grid = config.sweep_f_max_grid;
  spec.validate();

  const auto results = run_sweep(spec, &std::cout);

  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);
  {
    std::ofstream os(out / "sweep.csv");
    if (!os) throw ConfigError("cannot write sweep.csv");
    write_sweep_csv(os, results);
  }
  std::ofstream errs(out / "sweep_errors.log");
  for (const auto& r : results)
    if (!r.ok)
      errs << "tau_z=" << r.tau_z_ms << " f_max=" << r.f_max_hz << ": " << r.error
           << "\n";
  std::cout << "sweep complete: " << (out / "sweep.csv").string() << "\n";
}

void cmd_export(const ExperimentConfig& config, const std::string& checkpoint_path,
                const std::string& what) {
  config.validate();
  require_config(!checkpoint_path.empty(), "export: --checkpoint is required");
  require_config(what == "rf" || what == "rates" || what == "supports",
                 "export: unknown kind '" + what + "' (expected rf, rates or supports)");
  Network net = Network::load_checkpoint(checkpoint_path);
  require_config(net.input_geometry() == config.input_geom &&
                     net.hidden_geometry() == config.hidden_geom,
                 "export: checkpoint geometry does not match the config geometry");
  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);

  if (what == "rf") {
    const LoadedData data = load_experiment_data(config, /*need_test=*/false);
    export_receptive_fields(net, data.train.width, data.train.height,
                            (out / "rf").string());
    std::cout << "receptive fields written to " << (out / "rf").string() << "\n";
    return;
  }

  const LoadedData data = load_experiment_data(config, /*need_test=*/false);
  // 6 s replay window, as many whole pattern+gap cycles as needed.
  const double cycle_ms = config.protocol.t_pat_ms + config.protocol.t_gap_ms;
  const std::int64_t n_patterns = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(6000.0 / cycle_ms)));
  const std::int64_t n_avail = static_cast<std::int64_t>(data.train.size());

  rng::Stream selection(config.sim.seed, 0x6578706f7274ull);  // "export"
  const int hc =
      static_cast<int>(selection.next_below(
          static_cast<std::uint64_t>(config.hidden_geom.n_hypercolumns)));
  std::vector<int> units;
  if (what == "supports") {
    const int m = config.hidden_geom.n_minicolumns;
    const int n_sel = std::min(30, m);
    for (int idx : selection.sample_without_replacement(m, n_sel))
      units.push_back(config.hidden_geom.unit(hc, idx));
  } else {
    for (int m = 0; m < config.hidden_geom.n_minicolumns; ++m)
      units.push_back(config.hidden_geom.unit(hc, m));
  }

  const auto recording =
      record_replay(net, data.train, config.protocol, config.activity,
                    std::min(n_patterns, n_avail), units);
  if (what == "supports") {
    std::ofstream os(out / "supports.csv");
    if (!os) throw ConfigError("cannot write supports.csv");
    export_support_traces(recording, os);
    std::cout << "support traces written to " << (out / "supports.csv").string() << "\n";
  } else {
    std::ofstream os(out / "rates.csv");
    if (!os) throw ConfigError("cannot write rates.csv");
    RateEstimateParams rp;
    export_rates(recording, rp, os);
    std::cout << "rates written to " << (out / "rates.csv").string() << "\n";
  }
}

}  // namespace bcpnn

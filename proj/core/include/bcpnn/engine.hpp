#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcpnn/connectivity.hpp"
#include "bcpnn/dataio.hpp"
#include "bcpnn/dynamics.hpp"
#include "bcpnn/geometry.hpp"
#include "bcpnn/readout.hpp"
#include "bcpnn/sim_params.hpp"

namespace bcpnn {

enum class Activity { kSpiking, kRate };
enum class Plasticity { kLearning, kFrozen };

struct RunMode {
  Activity activity = Activity::kSpiking;
  Plasticity plasticity = Plasticity::kLearning;
};

struct ProtocolParams {
  double t_pat_ms = 200.0;
  double t_gap_ms = 100.0;
  int n_epochs = 10;
  std::int64_t n_patterns = 60000;  // presented per epoch

  std::int64_t pattern_steps(double dt_ms) const {
    return std::int64_t(t_pat_ms / dt_ms + 0.5);
  }
  std::int64_t gap_steps(double dt_ms) const {
    return std::int64_t(t_gap_ms / dt_ms + 0.5);
  }
  void validate(double dt_ms) const {
    require_config(t_pat_ms >= dt_ms, "protocol.t_pat_ms must be >= dt_ms");
    require_config(t_gap_ms >= 0.0, "protocol.t_gap_ms must be >= 0");
    require_config(n_epochs >= 0, "protocol.n_epochs must be >= 0");
    require_config(n_patterns >= 1, "protocol.n_patterns must be >= 1");
  }
};

struct EngineOptions {
  // Eq. 3 cadence in steps; 1 recomputes b/w from P every step.
  int weight_refresh_steps = 1;
};

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The joint P trace with deferred materialization. Per-step updates
/// P <- (1-beta) P + beta z_pre (x) z_post are buffered and applied in one
/// matrix product per chunk; runs of identical z_pre (rate mode) collapse to
/// one rank-1 update. The recurrence is algebraically identical to the
/// per-step form.
class JointAccumulator {
 public:
  void init(Eigen::Index n_pre, Eigen::Index n_post, float init_value, double beta);

  /// Queue one step. z_pre_changed must be false only if z_pre is bit-identical
  /// to the previous pushed step's z_pre.
  void push(const Eigen::VectorXd& z_pre, const Eigen::VectorXd& z_post,
            bool z_pre_changed);

  void flush();
  const MatrixF& materialized() {
    flush();
    return joint_;
  }
  const MatrixF& raw() const { return joint_; }  // checkpoint I/O; must be flushed
  MatrixF& raw_mutable() { return joint_; }
  bool pending() const { return pending_steps_ > 0; }
  double beta() const { return beta_; }

 private:
  void flush_chunk();
  void flush_run();

  MatrixF joint_;
  double beta_ = 0.0, delta_ = 1.0;
  int capacity_ = 0;

  // chunk buffers (distinct z_pre per step)
  MatrixF zpre_rows_, zpost_rows_;
  std::vector<int> zpre_nnz_, zpost_nnz_;
  int chunk_rows_ = 0;

  // run buffer (shared z_pre)
  bool in_run_ = false;
  Eigen::VectorXf run_zpre_;
  Eigen::VectorXd run_zpost_acc_;
  int run_len_ = 0;

  int pending_steps_ = 0;
};

struct PatternSummary {
  std::vector<std::int64_t> spike_counts;  // hidden, pattern window only
  std::vector<double> mean_activation;     // hidden, pattern window only
  std::int64_t pattern_steps = 0;
};

struct EpochLogEntry {
  int epoch = 0;
  double mean_rate_hz = 0.0;
  std::int64_t n_swaps = 0;
  double wall_time_s = 0.0;
};

struct RewireLogEntry {
  std::int64_t step = 0;
  std::int64_t n_swaps = 0;
  double active_score_before = 0.0;
  double active_score_after = 0.0;
};

struct TrainLog {
  std::vector<EpochLogEntry> epochs;
  std::vector<RewireLogEntry> rewire_events;

  void save_csv(const std::string& path) const;
  /// The deterministic columns only (wall time excluded).
  std::string deterministic_csv() const;
};

/// Complement coding: pixel p of input hypercolumn h becomes the activation
/// pair (p, 1-p) over its two minicolumns.
std::vector<double> encode_input(std::span<const float> pixels,
                                 const LayerGeometry& in_geom);

/// One feedforward spiking/rate network with plastic projection weights.
class Network {
 public:
  Network(const LayerGeometry& in_geom, const LayerGeometry& hid_geom,
          const SimParams& params, double p_conn, const RewireSchedule& schedule,
          const EngineOptions& options = {});

  /// Present the encoded input activation on the input layer until replaced.
  void set_input(std::span<const double> activation);
  /// Gap: zero input activation.
  void clear_input();
  /// Advance one dt tick in the given mode.
  void tick(RunMode mode);
  /// set_input/clear_input + tick, matching the one-call step contract.
  void step(const std::vector<double>* input_activation, RunMode mode);

  PatternSummary present_pattern(std::span<const float> image, RunMode mode,
                                 const ProtocolParams& protocol);

  TrainLog train_unsupervised(const ImageDataset& ds, const ProtocolParams& protocol,
                              RunMode mode);

  /// Spike-count (spiking) or mean-activation (rate) features per image,
  /// in [0,1]; plasticity frozen regardless of mode.plasticity.
  FeatureMatrix extract_features(const ImageDataset& ds, RunMode mode,
                                 const ProtocolParams& protocol);

  void save_checkpoint(const std::string& path);
  static Network load_checkpoint(const std::string& path);

  /// Force a rewiring event now (scores from the current P traces).
  std::vector<SwapEvent> rewire_now();

  // state access
  const LayerGeometry& input_geometry() const { return in_geom_; }
  const LayerGeometry& hidden_geometry() const { return hid_geom_; }
  const SimParams& params() const { return params_; }
  const RewireSchedule& rewire_schedule() const { return schedule_; }
  const EngineOptions& options() const { return options_; }
  const ConnectivityMask& mask() const { return mask_; }
  const MatrixF& weights() const { return w_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  const Eigen::VectorXd& support() const { return support_; }
  const Eigen::VectorXd& activation() const { return activation_; }
  const Eigen::VectorXd& z_pre() const { return z_pre_; }
  const Eigen::VectorXd& z_post() const { return z_post_; }
  const Eigen::VectorXd& p_pre() const { return p_pre_; }
  const Eigen::VectorXd& p_post() const { return p_post_; }
  const MatrixF& p_joint() { return joint_.materialized(); }
  const SpikeVector& input_spikes() const { return s_in_; }
  const SpikeVector& hidden_spikes() const { return s_hid_; }
  std::int64_t step_count() const { return step_count_; }
  std::int64_t hidden_spike_total() const { return hidden_spike_total_; }
  const std::vector<RewireLogEntry>& rewire_log() const { return rewire_log_; }

  std::vector<double> usage_scores();  // [hid_hc][in_hc] row-major

 private:
  Network() = default;
  void init_state();
  void rebuild_adjacency();
  void refresh_weights_and_bias();
  void recompute_rate_drive();

  LayerGeometry in_geom_, hid_geom_;
  SimParams params_;
  double p_conn_ = 0.0;
  RewireSchedule schedule_;
  EngineOptions options_;

  ConnectivityMask mask_;
  std::vector<std::vector<int>> in_hc_targets_;  // connected hidden hcs per input hc

  Eigen::VectorXd x_;  // current input activation
  bool x_changed_ = true;
  bool z_pre_is_x_ = false;   // rate mode: z_pre currently mirrors x_
  bool z_pre_dirty_ = true;   // z_pre changed since last accumulator push
  Eigen::VectorXd z_pre_, z_post_, p_pre_, p_post_;
  Eigen::VectorXd support_, activation_, bias_;
  MatrixF w_;
  JointAccumulator joint_;
  SpikeVector s_in_, s_hid_;

  Eigen::VectorXd rate_drive_;
  bool rate_drive_valid_ = false;

  std::int64_t step_count_ = 0;
  std::int64_t hidden_spike_total_ = 0;
  double activation_mean_total_ = 0.0;
  std::vector<RewireLogEntry> rewire_log_;

  static constexpr std::uint64_t kSaltInput = 0x696e7075ull;
  static constexpr std::uint64_t kSaltHidden = 0x68696464ull;
};

}  // namespace bcpnn

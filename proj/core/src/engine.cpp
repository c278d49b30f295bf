#include "bcpnn/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bcpnn/rng.hpp"

namespace bcpnn {

// ---------------------------------------------------------------------------
// JointAccumulator

void JointAccumulator::init(Eigen::Index n_pre, Eigen::Index n_post, float init_value,
                            double beta) {
  beta_ = beta;
  delta_ = 1.0 - beta;
  // Chunk length capped so the delta^{-t} row scaling stays within 4x.
  const double by_precision = delta_ < 1.0 ? std::log(4.0) / -std::log(delta_) : 512.0;
  capacity_ = std::max(1, std::min(512, static_cast<int>(by_precision)));
  joint_ = MatrixF::Constant(n_pre, n_post, init_value);
  zpre_rows_ = MatrixF::Zero(capacity_, n_pre);
  zpost_rows_ = MatrixF::Zero(capacity_, n_post);
  zpre_nnz_.assign(capacity_, 0);
  zpost_nnz_.assign(capacity_, 0);
  chunk_rows_ = 0;
  in_run_ = false;
  run_len_ = 0;
  pending_steps_ = 0;
}

void JointAccumulator::push(const Eigen::VectorXd& z_pre, const Eigen::VectorXd& z_post,
                            bool z_pre_changed) {
  require(z_pre.size() == joint_.rows() && z_post.size() == joint_.cols(),
          "joint trace: shape mismatch");
  if (!z_pre_changed) {
    // Collapse the run of identical z_pre into one rank-1 update.
    if (!in_run_) {
      flush_chunk();
      in_run_ = true;
      run_zpre_ = z_pre.cast<float>();
      run_zpost_acc_ = Eigen::VectorXd::Zero(z_post.size());
      run_len_ = 0;
    }
    run_zpost_acc_ = delta_ * run_zpost_acc_ + z_post;
    ++run_len_;
    ++pending_steps_;
    return;
  }
  if (in_run_) flush_run();
  int t = chunk_rows_;
  int nnz_pre = 0, nnz_post = 0;
  {
    float* dst = zpre_rows_.row(t).data();
    const double* src = z_pre.data();
    for (Eigen::Index i = 0; i < z_pre.size(); ++i) {
      const float v = static_cast<float>(src[i]);
      dst[i] = v;
      nnz_pre += v != 0.0f;
    }
  }
  {
    // Row t is pre-scaled by delta^{-t} so one matrix product applies all
    // per-step decay weights at flush time.
    const double scale = std::pow(delta_, -static_cast<double>(t));
    float* dst = zpost_rows_.row(t).data();
    const double* src = z_post.data();
    for (Eigen::Index j = 0; j < z_post.size(); ++j) {
      const float v = static_cast<float>(src[j] * scale);
      dst[j] = v;
      nnz_post += v != 0.0f;
    }
  }
  zpre_nnz_[t] = nnz_pre;
  zpost_nnz_[t] = nnz_post;
  ++chunk_rows_;
  ++pending_steps_;
  if (chunk_rows_ >= capacity_) flush_chunk();
}

void JointAccumulator::flush_chunk() {
  if (chunk_rows_ == 0) return;
  const int k = chunk_rows_;
  const double decay_k = std::pow(delta_, k);
  const float coeff = static_cast<float>(beta_ * std::pow(delta_, k - 1));

  // Exact-zero sparsity (z traces that never charged, or tau_z == dt) makes
  // the scatter path much cheaper than the dense product.
  double pair_work = 0.0;
  for (int t = 0; t < k; ++t)
    pair_work += static_cast<double>(zpre_nnz_[t]) * zpost_nnz_[t];
  const double dense_work =
      static_cast<double>(k) * joint_.rows() * joint_.cols();

  joint_ *= static_cast<float>(decay_k);
  if (pair_work * 20.0 < dense_work) {
    std::vector<std::pair<int, float>> post_nz;
    for (int t = 0; t < k; ++t) {
      if (zpre_nnz_[t] == 0 || zpost_nnz_[t] == 0) continue;
      post_nz.clear();
      const float* zr = zpost_rows_.row(t).data();
      for (Eigen::Index j = 0; j < zpost_rows_.cols(); ++j)
        if (zr[j] != 0.0f) post_nz.emplace_back(static_cast<int>(j), zr[j]);
      const float* pr = zpre_rows_.row(t).data();
      for (Eigen::Index i = 0; i < zpre_rows_.cols(); ++i) {
        if (pr[i] == 0.0f) continue;
        const float w = coeff * pr[i];
        float* out = joint_.row(i).data();
        for (const auto& [j, v] : post_nz) out[j] += w * v;
      }
    }
  } else {
    joint_.noalias() +=
        coeff * (zpre_rows_.topRows(k).transpose() * zpost_rows_.topRows(k));
  }
  chunk_rows_ = 0;
}

void JointAccumulator::flush_run() {
  if (!in_run_) return;
  if (run_len_ > 0) {
    const int k = run_len_;
    joint_ *= static_cast<float>(std::pow(delta_, k));
    if ((run_zpre_.array() != 0.0f).any()) {
      const Eigen::VectorXf v = (beta_ * run_zpost_acc_).cast<float>();
      joint_.noalias() += run_zpre_ * v.transpose();
    }
  }
  in_run_ = false;
  run_len_ = 0;
}

void JointAccumulator::flush() {
  flush_run();
  flush_chunk();
  pending_steps_ = 0;
}

// ---------------------------------------------------------------------------
// TrainLog

void TrainLog::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write training log: " + path);
  os << "epoch,mean_rate_hz,n_swaps,wall_time_s\n";
  for (const auto& e : epochs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.8g,%lld,%.3f\n", e.epoch, e.mean_rate_hz,
                  static_cast<long long>(e.n_swaps), e.wall_time_s);
    os << buf;
  }
}

std::string TrainLog::deterministic_csv() const {
  std::ostringstream os;
  os << "epoch,mean_rate_hz,n_swaps\n";
  for (const auto& e : epochs) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%lld\n", e.epoch, e.mean_rate_hz,
                  static_cast<long long>(e.n_swaps));
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Network

std::vector<double> encode_input(std::span<const float> pixels,
                                 const LayerGeometry& in_geom) {
  require(in_geom.n_minicolumns == 2,
          "encode_input: complement coding needs 2 minicolumns per input hypercolumn");
  require(pixels.size() == static_cast<std::size_t>(in_geom.n_hypercolumns),
          "encode_input: pixel count != input hypercolumns");
  std::vector<double> activation(pixels.size() * 2);
  for (std::size_t h = 0; h < pixels.size(); ++h) {
    const double p = pixels[h];
    require(p >= 0.0 && p <= 1.0, "encode_input: pixel outside [0,1]");
    activation[2 * h] = p;
    activation[2 * h + 1] = 1.0 - p;
  }
  return activation;
}

Network::Network(const LayerGeometry& in_geom, const LayerGeometry& hid_geom,
                 const SimParams& params, double p_conn, const RewireSchedule& schedule,
                 const EngineOptions& options)
    : in_geom_(in_geom),
      hid_geom_(hid_geom),
      params_(params),
      p_conn_(p_conn),
      schedule_(schedule),
      options_(options) {
  in_geom_.validate();
  hid_geom_.validate();
  params_.validate();
  schedule_.validate();
  require_config(options_.weight_refresh_steps >= 1,
                 "engine.weight_refresh_steps must be >= 1");
  mask_ = init_connectivity(in_geom_, hid_geom_, p_conn_, params_.seed);
  init_state();
}

void Network::init_state() {
  const Eigen::Index n_in = in_geom_.n_units();
  const Eigen::Index n_hid = hid_geom_.n_units();
  x_ = Eigen::VectorXd::Zero(n_in);
  x_changed_ = false;
  z_pre_ = Eigen::VectorXd::Zero(n_in);
  z_post_ = Eigen::VectorXd::Zero(n_hid);
  // Uniform-prior initialization keeps w = 0 and b = log(1/M) at t = 0.
  const double p0_pre = 1.0 / in_geom_.n_minicolumns;
  const double p0_post = 1.0 / hid_geom_.n_minicolumns;
  p_pre_ = Eigen::VectorXd::Constant(n_in, p0_pre);
  p_post_ = Eigen::VectorXd::Constant(n_hid, p0_post);
  joint_.init(n_in, n_hid, static_cast<float>(p0_pre * p0_post), params_.p_rate());
  bias_ = Eigen::VectorXd::Zero(n_hid);
  w_ = MatrixF::Zero(n_in, n_hid);
  s_in_.assign(static_cast<std::size_t>(n_in), 0);
  s_hid_.assign(static_cast<std::size_t>(n_hid), 0);
  refresh_weights_and_bias();
  support_ = bias_;
  activation_ = Eigen::VectorXd::Zero(n_hid);
  hypercolumn_softmax({support_.data(), static_cast<std::size_t>(n_hid)}, hid_geom_,
                      {activation_.data(), static_cast<std::size_t>(n_hid)});
  rebuild_adjacency();
}

void Network::rebuild_adjacency() {
  in_hc_targets_.assign(static_cast<std::size_t>(in_geom_.n_hypercolumns), {});
  for (int g = 0; g < in_geom_.n_hypercolumns; ++g)
    for (int h = 0; h < hid_geom_.n_hypercolumns; ++h)
      if (mask_.is_active(g, h)) in_hc_targets_[g].push_back(h);
  rate_drive_valid_ = false;
}

void Network::refresh_weights_and_bias() {
  const MatrixF& pj = joint_.materialized();
  const double eps = params_.eps;
  for (Eigen::Index j = 0; j < p_post_.size(); ++j)
    bias_(j) = compute_bias(p_post_(j), eps);
  const Eigen::ArrayXf lpre = p_pre_.array().max(eps).log().cast<float>();
  const Eigen::ArrayXf lpost = p_post_.array().max(eps).log().cast<float>();
  const float eps2 = static_cast<float>(eps * eps);
  w_ = pj.array().max(eps2).log().matrix();
  w_.array().colwise() -= lpre;
  w_.array().rowwise() -= lpost.transpose();
  rate_drive_valid_ = false;
}

void Network::recompute_rate_drive() {
  const int mh = hid_geom_.n_minicolumns;
  const int mi = in_geom_.n_minicolumns;
  rate_drive_ = Eigen::VectorXd::Zero(hid_geom_.n_units());
  for (int g = 0; g < in_geom_.n_hypercolumns; ++g) {
    for (int a = 0; a < mi; ++a) {
      const int i = in_geom_.unit(g, a);
      const double xi = x_(i);
      if (xi == 0.0) continue;
      for (int h : in_hc_targets_[g])
        rate_drive_.segment(h * mh, mh) +=
            xi * w_.row(i).segment(h * mh, mh).cast<double>();
    }
  }
  rate_drive_valid_ = true;
}

void Network::set_input(std::span<const double> activation) {
  require(activation.size() == static_cast<std::size_t>(x_.size()),
          "set_input: activation size != input units");
  if (std::equal(activation.begin(), activation.end(), x_.data())) return;
  std::copy(activation.begin(), activation.end(), x_.data());
  x_changed_ = true;
  rate_drive_valid_ = false;
}

void Network::clear_input() {
  if ((x_.array() == 0.0).all()) return;
  x_.setZero();
  x_changed_ = true;
  rate_drive_valid_ = false;
}

void Network::step(const std::vector<double>* input_activation, RunMode mode) {
  if (input_activation)
    set_input(*input_activation);
  else
    clear_input();
  tick(mode);
}

void Network::tick(RunMode mode) {
  const bool spiking = mode.activity == Activity::kSpiking;
  const bool learning = mode.plasticity == Plasticity::kLearning;
  const Eigen::Index n_in = x_.size();
  const Eigen::Index n_hid = support_.size();
  const double a = params_.support_rate();
  const int mh = hid_geom_.n_minicolumns;

  if (spiking) {
    sample_spikes({s_in_.data(), s_in_.size()},
                  {x_.data(), static_cast<std::size_t>(n_in)}, params_, kSaltInput,
                  static_cast<std::uint64_t>(step_count_));
    support_ += a * (bias_ - support_);
    for (Eigen::Index i = 0; i < n_in; ++i) {
      if (!s_in_[static_cast<std::size_t>(i)]) continue;
      const int g = in_geom_.hypercolumn_of(static_cast<int>(i));
      for (int h : in_hc_targets_[static_cast<std::size_t>(g)])
        support_.segment(h * mh, mh) += w_.row(i).segment(h * mh, mh).cast<double>();
    }
  } else {
    if (!rate_drive_valid_) recompute_rate_drive();
    support_ += a * (bias_ + rate_drive_ - support_);
  }

  hypercolumn_softmax({support_.data(), static_cast<std::size_t>(n_hid)}, hid_geom_,
                      {activation_.data(), static_cast<std::size_t>(n_hid)});

  if (spiking) {
    sample_spikes({s_hid_.data(), s_hid_.size()},
                  {activation_.data(), static_cast<std::size_t>(n_hid)}, params_,
                  kSaltHidden, static_cast<std::uint64_t>(step_count_));
    for (auto s : s_hid_) hidden_spike_total_ += s;
    update_z({z_pre_.data(), static_cast<std::size_t>(n_in)},
             {s_in_.data(), s_in_.size()}, params_);
    update_z({z_post_.data(), static_cast<std::size_t>(n_hid)},
             {s_hid_.data(), s_hid_.size()}, params_);
    z_pre_is_x_ = false;
    z_pre_dirty_ = true;
  } else {
    if (!z_pre_is_x_ || x_changed_) {
      z_pre_ = x_;
      z_pre_is_x_ = true;
      x_changed_ = false;
      z_pre_dirty_ = true;
    }
    z_post_ = activation_;
  }
  activation_mean_total_ += activation_.mean();

  if (learning) {
    const double beta = params_.p_rate();
    p_pre_ += beta * (z_pre_ - p_pre_);
    p_post_ += beta * (z_post_ - p_post_);
    joint_.push(z_pre_, z_post_, z_pre_dirty_);
    z_pre_dirty_ = false;
  }

  ++step_count_;

  if (learning) {
    if (step_count_ % options_.weight_refresh_steps == 0) refresh_weights_and_bias();
    if (schedule_.swaps_per_event > 0 && step_count_ % schedule_.interval_steps == 0) {
      auto swaps = rewire_now();
      (void)swaps;
    }
  }
}

std::vector<double> Network::usage_scores() {
  const MatrixF& pj = joint_.materialized();
  return usage_score_table<float>({p_pre_.data(), static_cast<std::size_t>(p_pre_.size())},
                                  {p_post_.data(), static_cast<std::size_t>(p_post_.size())},
                                  pj.data(), in_geom_, hid_geom_, params_.eps);
}

std::vector<SwapEvent> Network::rewire_now() {
  const auto table = usage_scores();
  double before = 0.0;
  for (int h = 0; h < mask_.n_hid_hc; ++h)
    for (int g = 0; g < mask_.n_in_hc; ++g)
      if (mask_.is_active(g, h))
        before += table[static_cast<std::size_t>(h) * mask_.n_in_hc + g];
  auto swaps = apply_rewiring(mask_, table, schedule_.swaps_per_event);
  double after = 0.0;
  for (int h = 0; h < mask_.n_hid_hc; ++h)
    for (int g = 0; g < mask_.n_in_hc; ++g)
      if (mask_.is_active(g, h))
        after += table[static_cast<std::size_t>(h) * mask_.n_in_hc + g];
  rewire_log_.push_back(
      {step_count_, static_cast<std::int64_t>(swaps.size()), before, after});
  if (!swaps.empty()) rebuild_adjacency();
  return swaps;
}

PatternSummary Network::present_pattern(std::span<const float> image, RunMode mode,
                                        const ProtocolParams& protocol) {
  protocol.validate(params_.dt_ms);
  const auto activation = encode_input(image, in_geom_);
  const std::int64_t np = protocol.pattern_steps(params_.dt_ms);
  const std::int64_t ng = protocol.gap_steps(params_.dt_ms);
  const std::size_t n_hid = s_hid_.size();

  PatternSummary summary;
  summary.pattern_steps = np;
  summary.spike_counts.assign(n_hid, 0);
  summary.mean_activation.assign(n_hid, 0.0);

  set_input(activation);
  for (std::int64_t t = 0; t < np; ++t) {
    tick(mode);
    if (mode.activity == Activity::kSpiking)
      for (std::size_t j = 0; j < n_hid; ++j) summary.spike_counts[j] += s_hid_[j];
    for (std::size_t j = 0; j < n_hid; ++j)
      summary.mean_activation[j] += activation_(static_cast<Eigen::Index>(j));
  }
  clear_input();
  for (std::int64_t t = 0; t < ng; ++t) tick(mode);

  // Chunks never span pattern boundaries: checkpoints written between
  // patterns then restart with the same summation order.
  joint_.flush();

  if (np > 0)
    for (auto& v : summary.mean_activation) v /= static_cast<double>(np);
  return summary;
}

TrainLog Network::train_unsupervised(const ImageDataset& ds,
                                     const ProtocolParams& protocol, RunMode mode) {
  protocol.validate(params_.dt_ms);
  require(ds.n_pixels() == in_geom_.n_hypercolumns,
          "train: dataset pixel count != input hypercolumns");
  require(static_cast<std::size_t>(protocol.n_patterns) <= ds.size(),
          "train: protocol.n_patterns exceeds dataset size");

  TrainLog log;
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double step_s = params_.dt_ms / 1000.0;
  const std::int64_t steps_per_pattern =
      protocol.pattern_steps(params_.dt_ms) + protocol.gap_steps(params_.dt_ms);

  std::size_t swap_cursor = rewire_log_.size();
  for (int epoch = 0; epoch < protocol.n_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::int64_t spikes0 = hidden_spike_total_;
    const double act0 = activation_mean_total_;

    rng::Stream shuffle_stream(params_.seed,
                               rng::hash2(0x65706f6368ull,  // epoch shuffle
                                          static_cast<std::uint64_t>(epoch)));
    shuffle_stream.shuffle(order);
    for (std::int64_t i = 0; i < protocol.n_patterns; ++i) {
      const float* img = ds.image(order[static_cast<std::size_t>(i)]);
      present_pattern({img, static_cast<std::size_t>(ds.n_pixels())}, mode, protocol);
    }

    EpochLogEntry entry;
    entry.epoch = epoch;
    const std::int64_t steps = protocol.n_patterns * steps_per_pattern;
    if (mode.activity == Activity::kSpiking) {
      const double sim_s = static_cast<double>(steps) * step_s;
      entry.mean_rate_hz = static_cast<double>(hidden_spike_total_ - spikes0) /
                           (static_cast<double>(hid_geom_.n_units()) * sim_s);
    } else {
      // Rate mode has no spikes; report the equivalent f_max * mean activation.
      entry.mean_rate_hz = params_.f_max_hz * (activation_mean_total_ - act0) /
                           static_cast<double>(steps);
    }
    std::int64_t n_swaps = 0;
    for (; swap_cursor < rewire_log_.size(); ++swap_cursor)
      n_swaps += rewire_log_[swap_cursor].n_swaps;
    entry.n_swaps = n_swaps;
    entry.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.epochs.push_back(entry);
  }
  log.rewire_events = rewire_log_;
  return log;
}

FeatureMatrix Network::extract_features(const ImageDataset& ds, RunMode mode,
                                        const ProtocolParams& protocol) {
  require(ds.n_pixels() == in_geom_.n_hypercolumns,
          "extract_features: dataset pixel count != input hypercolumns");
  RunMode frozen{mode.activity, Plasticity::kFrozen};
  const Eigen::Index n_hid = support_.size();
  FeatureMatrix features(static_cast<Eigen::Index>(ds.size()), n_hid);
  const double denom = params_.f_max_hz * protocol.t_pat_ms / 1000.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto summary = present_pattern(
        {ds.image(i), static_cast<std::size_t>(ds.n_pixels())}, frozen, protocol);
    float* row = features.row(static_cast<Eigen::Index>(i)).data();
    if (mode.activity == Activity::kSpiking) {
      for (Eigen::Index j = 0; j < n_hid; ++j)
        row[j] = static_cast<float>(
            std::min(1.0, static_cast<double>(summary.spike_counts[j]) / denom));
    } else {
      for (Eigen::Index j = 0; j < n_hid; ++j)
        row[j] = static_cast<float>(
            std::clamp(summary.mean_activation[j], 0.0, 1.0));
    }
  }
  return features;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x4e504342u;  // "BCPN" little-endian
constexpr std::uint32_t kCheckpointVersion = 1;

struct Writer {
  std::ofstream os;
  explicit Writer(const std::string& path) : os(path, std::ios::binary) {
    if (!os) throw ConfigError("cannot write checkpoint: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void pod(const T& v) {
    bytes(&v, sizeof v);
  }
  void vecd(const Eigen::VectorXd& v) {
    const std::int64_t n = v.size();
    pod(n);
    bytes(v.data(), sizeof(double) * static_cast<std::size_t>(n));
  }
  void matf(const MatrixF& m) {
    const std::int64_t r = m.rows(), c = m.cols();
    pod(r);
    pod(c);
    bytes(m.data(), sizeof(float) * static_cast<std::size_t>(r * c));
  }
  void bytes_vec(const std::vector<std::uint8_t>& v) {
    const std::int64_t n = static_cast<std::int64_t>(v.size());
    pod(n);
    bytes(v.data(), v.size());
  }
};

struct Reader {
  std::ifstream is;
  std::string path;
  explicit Reader(const std::string& p) : is(p, std::ios::binary), path(p) {
    if (!is) throw ParseError("cannot open checkpoint: " + p);
  }
  void bytes(void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw ParseError("checkpoint truncated: " + path);
  }
  template <typename T>
  void pod(T& v) {
    bytes(&v, sizeof v);
  }
  void vecd(Eigen::VectorXd& v) {
    std::int64_t n = 0;
    pod(n);
    v.resize(n);
    bytes(v.data(), sizeof(double) * static_cast<std::size_t>(n));
  }
  void matf(MatrixF& m) {
    std::int64_t r = 0, c = 0;
    pod(r);
    pod(c);
    m.resize(r, c);
    bytes(m.data(), sizeof(float) * static_cast<std::size_t>(r * c));
  }
  void bytes_vec(std::vector<std::uint8_t>& v) {
    std::int64_t n = 0;
    pod(n);
    v.resize(static_cast<std::size_t>(n));
    bytes(v.data(), v.size());
  }
};

}  // namespace

void Network::save_checkpoint(const std::string& path) {
  joint_.flush();
  Writer w(path);
  w.pod(kCheckpointMagic);
  w.pod(kCheckpointVersion);
  w.pod(in_geom_.n_hypercolumns);
  w.pod(in_geom_.n_minicolumns);
  w.pod(hid_geom_.n_hypercolumns);
  w.pod(hid_geom_.n_minicolumns);
  w.pod(params_.dt_ms);
  w.pod(params_.tau_z_ms);
  w.pod(params_.tau_p_ms);
  w.pod(params_.f_max_hz);
  w.pod(params_.eps);
  w.pod(params_.seed);
  w.pod(p_conn_);
  w.pod(schedule_.interval_steps);
  w.pod(schedule_.swaps_per_event);
  w.pod(options_.weight_refresh_steps);
  w.pod(mask_.n_in_hc);
  w.pod(mask_.n_hid_hc);
  w.pod(mask_.k);
  w.bytes_vec(mask_.active);
  w.pod(step_count_);
  w.pod(hidden_spike_total_);
  w.pod(activation_mean_total_);
  const std::uint8_t flags = static_cast<std::uint8_t>((x_changed_ ? 1 : 0) |
                                                       (z_pre_is_x_ ? 2 : 0) |
                                                       (z_pre_dirty_ ? 4 : 0));
  w.pod(flags);
  w.vecd(x_);
  w.vecd(z_pre_);
  w.vecd(z_post_);
  w.vecd(p_pre_);
  w.vecd(p_post_);
  w.vecd(support_);
  w.vecd(activation_);
  w.vecd(bias_);
  w.matf(w_);
  w.matf(joint_.raw());
  w.bytes_vec(s_in_);
  w.bytes_vec(s_hid_);
  const std::int64_t n_events = static_cast<std::int64_t>(rewire_log_.size());
  w.pod(n_events);
  for (const auto& e : rewire_log_) {
    w.pod(e.step);
    w.pod(e.n_swaps);
    w.pod(e.active_score_before);
    w.pod(e.active_score_after);
  }
  if (!w.os) throw ConfigError("checkpoint write failed: " + path);
}

Network Network::load_checkpoint(const std::string& path) {
  Reader r(path);
  std::uint32_t magic = 0, version = 0;
  r.pod(magic);
  r.pod(version);
  if (magic != kCheckpointMagic) throw ParseError("checkpoint bad magic: " + path);
  if (version != kCheckpointVersion)
    throw ParseError("checkpoint unsupported version: " + path);

  Network net;
  r.pod(net.in_geom_.n_hypercolumns);
  r.pod(net.in_geom_.n_minicolumns);
  r.pod(net.hid_geom_.n_hypercolumns);
  r.pod(net.hid_geom_.n_minicolumns);
  r.pod(net.params_.dt_ms);
  r.pod(net.params_.tau_z_ms);
  r.pod(net.params_.tau_p_ms);
  r.pod(net.params_.f_max_hz);
  r.pod(net.params_.eps);
  r.pod(net.params_.seed);
  r.pod(net.p_conn_);
  r.pod(net.schedule_.interval_steps);
  r.pod(net.schedule_.swaps_per_event);
  r.pod(net.options_.weight_refresh_steps);
  r.pod(net.mask_.n_in_hc);
  r.pod(net.mask_.n_hid_hc);
  r.pod(net.mask_.k);
  r.bytes_vec(net.mask_.active);
  r.pod(net.step_count_);
  r.pod(net.hidden_spike_total_);
  r.pod(net.activation_mean_total_);
  std::uint8_t flags = 0;
  r.pod(flags);
  net.x_changed_ = (flags & 1) != 0;
  net.z_pre_is_x_ = (flags & 2) != 0;
  net.z_pre_dirty_ = (flags & 4) != 0;
  r.vecd(net.x_);
  r.vecd(net.z_pre_);
  r.vecd(net.z_post_);
  r.vecd(net.p_pre_);
  r.vecd(net.p_post_);
  r.vecd(net.support_);
  r.vecd(net.activation_);
  r.vecd(net.bias_);
  r.matf(net.w_);
  net.joint_.init(net.in_geom_.n_units(), net.hid_geom_.n_units(), 0.0f,
                  net.params_.p_rate());
  r.matf(net.joint_.raw_mutable());
  r.bytes_vec(net.s_in_);
  r.bytes_vec(net.s_hid_);
  std::int64_t n_events = 0;
  r.pod(n_events);
  net.rewire_log_.resize(static_cast<std::size_t>(n_events));
  for (auto& e : net.rewire_log_) {
    r.pod(e.step);
    r.pod(e.n_swaps);
    r.pod(e.active_score_before);
    r.pod(e.active_score_after);
  }
  net.in_geom_.validate();
  net.hid_geom_.validate();
  net.params_.validate();
  net.rebuild_adjacency();
  return net;
}

}  // namespace bcpnn

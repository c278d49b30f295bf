#include "bcpnn/readout.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "bcpnn/rng.hpp"

namespace bcpnn {

LinearModel LinearModel::zeros(int n_features, int n_classes) {
  LinearModel m;
  m.weights = Eigen::MatrixXd::Zero(n_features, n_classes);
  m.bias = Eigen::VectorXd::Zero(n_classes);
  m.m_w = Eigen::MatrixXd::Zero(n_features, n_classes);
  m.v_w = Eigen::MatrixXd::Zero(n_features, n_classes);
  m.m_b = Eigen::VectorXd::Zero(n_classes);
  m.v_b = Eigen::VectorXd::Zero(n_classes);
  return m;
}

namespace {

Eigen::VectorXd softmax_row(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace

double cross_entropy_and_grad(const LinearModel& model, const FeatureMatrix& features,
                              const std::vector<std::uint8_t>& labels,
                              const std::vector<int>& rows, Eigen::MatrixXd& grad_w,
                              Eigen::VectorXd& grad_b) {
  const int n_classes = static_cast<int>(model.bias.size());
  grad_w.setZero(model.weights.rows(), n_classes);
  grad_b.setZero(n_classes);
  double loss = 0.0;
  for (int r : rows) {
    const Eigen::VectorXd x = features.row(r).cast<double>().transpose();
    const Eigen::VectorXd p = softmax_row(model.weights.transpose() * x + model.bias);
    const int y = labels[static_cast<std::size_t>(r)];
    loss -= std::log(std::max(p(y), 1e-300));
    Eigen::VectorXd d = p;
    d(y) -= 1.0;
    grad_w.noalias() += x * d.transpose();
    grad_b += d;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  grad_w *= inv;
  grad_b *= inv;
  return loss * inv;
}

TrainCurve train_classifier(const FeatureMatrix& features,
                            const std::vector<std::uint8_t>& labels,
                            const ClassifierParams& params) {
  params.validate();
  require(static_cast<std::size_t>(features.rows()) == labels.size(),
          "train_classifier: feature/label count mismatch");
  require(features.allFinite(), "train_classifier: non-finite features");
  for (auto y : labels)
    require(y < params.n_classes, "train_classifier: label out of range");

  const int n = static_cast<int>(features.rows());
  TrainCurve out;
  out.model = LinearModel::zeros(static_cast<int>(features.cols()), params.n_classes);
  LinearModel& m = out.model;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::MatrixXd gw;
  Eigen::VectorXd gb;

  for (int epoch = 0; epoch < params.n_epochs; ++epoch) {
    rng::Stream stream(params.seed, rng::hash2(0x636c6673686682ull,
                                               static_cast<std::uint64_t>(epoch)));
    stream.shuffle(order);
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (int start = 0; start < n; start += params.batch_size) {
      const int stop = std::min(n, start + params.batch_size);
      std::vector<int> batch(order.begin() + start, order.begin() + stop);
      const double loss = cross_entropy_and_grad(m, features, labels, batch, gw, gb);
      if (std::isnan(loss))
        throw ContractError("train_classifier: NaN loss; aborting");
      epoch_loss += loss;
      ++n_batches;

      ++m.adam_t;
      const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(m.adam_t));
      const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(m.adam_t));
      m.m_w = params.beta1 * m.m_w + (1.0 - params.beta1) * gw;
      m.v_w = params.beta2 * m.v_w + (1.0 - params.beta2) * gw.array().square().matrix();
      m.m_b = params.beta1 * m.m_b + (1.0 - params.beta1) * gb;
      m.v_b = params.beta2 * m.v_b + (1.0 - params.beta2) * gb.array().square().matrix();
      m.weights.array() -=
          params.lr * (m.m_w.array() / c1) /
          ((m.v_w.array() / c2).sqrt() + params.adam_eps);
      m.bias.array() -=
          params.lr * (m.m_b.array() / c1) /
          ((m.v_b.array() / c2).sqrt() + params.adam_eps);
    }
    out.epoch_loss.push_back(n_batches ? epoch_loss / n_batches : 0.0);
  }
  return out;
}

std::vector<int> predict(const LinearModel& model, const FeatureMatrix& features) {
  require(features.cols() == model.weights.rows(), "predict: feature width mismatch");
  std::vector<int> pred(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const Eigen::VectorXd logits =
        model.weights.transpose() * features.row(r).cast<double>().transpose() +
        model.bias;
    int best = 0;
    for (int c = 1; c < logits.size(); ++c)
      if (logits(c) > logits(best)) best = c;  // strict: ties keep lower index
    pred[static_cast<std::size_t>(r)] = best;
  }
  return pred;
}

EvalReport evaluate(const LinearModel& model, const FeatureMatrix& features,
                    const std::vector<std::uint8_t>& labels) {
  require(static_cast<std::size_t>(features.rows()) == labels.size(),
          "evaluate: feature/label count mismatch");
  const int n_classes = static_cast<int>(model.bias.size());
  EvalReport rep;
  rep.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  const auto pred = predict(model, features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    rep.confusion(labels[i], pred[i]) += 1;
    if (pred[i] == labels[i]) ++correct;
  }
  rep.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / labels.size();
  rep.per_class_accuracy.assign(n_classes, 0.0);
  for (int c = 0; c < n_classes; ++c) {
    const int row_total = rep.confusion.row(c).sum();
    rep.per_class_accuracy[c] =
        row_total ? static_cast<double>(rep.confusion(c, c)) / row_total : 0.0;
  }
  return rep;
}

void LinearModel::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write model file: " + path);
  const std::uint32_t magic = 0x4243704d, version = 1;
  auto put = [&](const void* p, std::size_t nbytes) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(nbytes));
  };
  put(&magic, 4);
  put(&version, 4);
  const std::int64_t nf = weights.rows(), nc = weights.cols(), t = adam_t;
  put(&nf, 8);
  put(&nc, 8);
  put(&t, 8);
  auto put_mat = [&](const Eigen::MatrixXd& m) { put(m.data(), sizeof(double) * m.size()); };
  auto put_vec = [&](const Eigen::VectorXd& v) { put(v.data(), sizeof(double) * v.size()); };
  put_mat(weights);
  put_vec(bias);
  put_mat(m_w);
  put_mat(v_w);
  put_vec(m_b);
  put_vec(v_b);
}

LinearModel LinearModel::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open model file: " + path);
  auto get = [&](void* p, std::size_t nbytes) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(nbytes));
    if (!is) throw ParseError("model file truncated: " + path);
  };
  std::uint32_t magic = 0, version = 0;
  get(&magic, 4);
  get(&version, 4);
  if (magic != 0x4243704d) throw ParseError("model file bad magic: " + path);
  if (version != 1) throw ParseError("model file unsupported version: " + path);
  std::int64_t nf = 0, nc = 0, t = 0;
  get(&nf, 8);
  get(&nc, 8);
  get(&t, 8);
  LinearModel m = LinearModel::zeros(static_cast<int>(nf), static_cast<int>(nc));
  m.adam_t = t;
  auto get_mat = [&](Eigen::MatrixXd& mm) { get(mm.data(), sizeof(double) * mm.size()); };
  auto get_vec = [&](Eigen::VectorXd& v) { get(v.data(), sizeof(double) * v.size()); };
  get_mat(m.weights);
  get_vec(m.bias);
  get_mat(m.m_w);
  get_mat(m.v_w);
  get_vec(m.m_b);
  get_vec(m.v_b);
  return m;
}

}  // namespace bcpnn

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bcpnn/common.hpp"

namespace bcpnn {

struct ClassifierParams {
  int n_classes = 10;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 128;
  int n_epochs = 100;
  std::uint64_t seed = 0;

  void validate() const {
    require_config(n_classes >= 2, "classifier.n_classes must be >= 2");
    require_config(lr > 0.0, "classifier.lr must be > 0");
    require_config(beta1 > 0.0 && beta1 < 1.0, "classifier.beta1 must be in (0,1)");
    require_config(beta2 > 0.0 && beta2 < 1.0, "classifier.beta2 must be in (0,1)");
    require_config(adam_eps > 0.0, "classifier.adam_eps must be > 0");
    require_config(batch_size >= 1, "classifier.batch_size must be >= 1");
    require_config(n_epochs >= 0, "classifier.n_epochs must be >= 0");
  }
};

/// Multinomial logistic regression model with its Adam moment accumulators.
struct LinearModel {
  Eigen::MatrixXd weights;  // n_features x n_classes
  Eigen::VectorXd bias;     // n_classes
  Eigen::MatrixXd m_w, v_w;
  Eigen::VectorXd m_b, v_b;
  std::int64_t adam_t = 0;

  static LinearModel zeros(int n_features, int n_classes);
  void save(const std::string& path) const;
  static LinearModel load(const std::string& path);
};

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrainCurve {
  LinearModel model;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Minibatch softmax cross-entropy with Adam; seeded shuffling per epoch.
/// Throws on NaN loss.
TrainCurve train_classifier(const FeatureMatrix& features,
                            const std::vector<std::uint8_t>& labels,
                            const ClassifierParams& params);

/// Mean cross-entropy and the analytic gradient at the given point; used by
/// training and by the finite-difference checks.
double cross_entropy_and_grad(const LinearModel& model, const FeatureMatrix& features,
                              const std::vector<std::uint8_t>& labels,
                              const std::vector<int>& rows, Eigen::MatrixXd& grad_w,
                              Eigen::VectorXd& grad_b);

struct EvalReport {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;             // rows true, cols predicted
  std::vector<double> per_class_accuracy;
};

/// Argmax prediction; ties break toward the lower class index.
EvalReport evaluate(const LinearModel& model, const FeatureMatrix& features,
                    const std::vector<std::uint8_t>& labels);

std::vector<int> predict(const LinearModel& model, const FeatureMatrix& features);

}  // namespace bcpnn

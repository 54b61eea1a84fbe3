#pragma once

// Tip-position -> bending-angle regression: dataset generation from the PCC
// forward kinematics, a small MLP trained with Adam, and prediction.

#include "softwrist/dynamics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace softwrist {

struct IkSample {
  double x = 0.0;  // m, tip of the last disc
  double y = 0.0;
  Eigen::VectorXd theta;  // target angle(s), rad
};

struct IkDataset {
  std::vector<IkSample> train;
  std::vector<IkSample> validation;
};

struct DatasetConfig {
  int samples = 1000;
  int train_samples = 750;
  double theta_max = kThetaMax;
  // 1: one shared wrist angle (every segment l_i/L of it); n: per-segment angles.
  int outputs = 1;
  std::uint64_t seed = 7;
};

// Angle draws are made sequentially from one seeded stream; the parallel
// variant only distributes the forward kinematics and returns the same data.
IkDataset generate_dataset(const WristModel& model, const DatasetConfig& config);
IkDataset generate_dataset_parallel(const WristModel& model, const DatasetConfig& config);

// Tip position of a joint-angle target in the given output mode.
Eigen::Vector2d sample_tip(const WristModel& model, const Eigen::VectorXd& theta);

enum class Activation { kSigmoid, kTanh, kRelu, kLeakyRelu };
std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Normalizer fit(const Eigen::MatrixXd& columns);  // per-row z-score
  static Normalizer identity(int size);
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& v) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& v) const;
};

struct TrainingConfig {
  std::vector<int> hidden = {200, 100, 100};
  Activation activation = Activation::kSigmoid;
  int batch_size = 100;
  int epochs = 100;
  double learning_rate = 0.01;
  double final_learning_rate = 0.003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  std::uint64_t seed = 11;

  void validate(int train_size) const;
  double learning_rate_at(int epoch) const;
};

class MlpNetwork {
 public:
  MlpNetwork() = default;
  // Glorot-uniform weights, zero biases.
  static MlpNetwork create(std::vector<int> layers, Activation activation, std::uint64_t seed);

  const std::vector<int>& layers() const { return layers_; }
  Activation activation() const { return activation_; }
  int inputs() const { return layers_.front(); }
  int outputs() const { return layers_.back(); }

  // Forward pass on normalized inputs (one column per sample).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  // Mean squared error over all entries and its gradient w.r.t. the flattened parameters.
  double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const;
  double loss_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::VectorXd& grad) const;

  Eigen::Index parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& p);
  // 1 for entries subject to weight decay (weights), 0 for biases.
  Eigen::VectorXd decay_mask() const;

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  Normalizer input_norm;
  Normalizer output_norm;
  Eigen::Vector2d input_min = Eigen::Vector2d::Zero();
  Eigen::Vector2d input_max = Eigen::Vector2d::Zero();
  TrainingConfig training;

  void validate() const;

 private:
  std::vector<int> layers_;
  Activation activation_ = Activation::kSigmoid;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;       // mean minibatch loss during the epoch (normalized units)
  double validation_loss = 0.0;  // after the epoch (normalized units)
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  double final_gradient_norm = 0.0;
  double validation_rmse = 0.0;  // rad
  double accuracy = 0.0;         // 100 (1 - rmse / target range)
  double baseline_rmse = 0.0;    // linear regression on the same split, rad
};

struct TrainingResult {
  MlpNetwork network;
  TrainingReport report;
};

TrainingResult train(const IkDataset& data, const TrainingConfig& config);

struct IkPrediction {
  Eigen::VectorXd theta;
  bool out_of_workspace = false;
  std::string warning;
};

IkPrediction predict(const MlpNetwork& net, double x_des, double y_des);
// Columns of `xy` are (x, y) queries; returns one column of angles per query.
Eigen::MatrixXd predict_batch(const MlpNetwork& net, const Eigen::MatrixXd& xy);
Eigen::MatrixXd predict_batch_parallel(const MlpNetwork& net, const Eigen::MatrixXd& xy);

// Affine least-squares fit theta ~ a + b x + c y.
struct LinearBaseline {
  Eigen::MatrixXd coefficients;  // outputs x 3
  Eigen::VectorXd predict(double x, double y) const;
};
LinearBaseline fit_linear_baseline(const std::vector<IkSample>& samples);
double rmse(const LinearBaseline& model, const std::vector<IkSample>& samples);
double rmse(const MlpNetwork& net, const std::vector<IkSample>& samples);

void save_network(const MlpNetwork& net, const std::string& path);
MlpNetwork load_network(const std::string& path);
std::string network_to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const std::string& text);

void write_training_report_csv(const TrainingReport& report, const std::string& path);

}  // namespace softwrist

#include "softwrist/neural_ik.hpp"

#include "softwrist/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace softwrist {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "softwrist-mlp";
constexpr int kFormatVersion = 1;
constexpr Eigen::Index kPredictChunk = 64;

Eigen::VectorXd segment_angles(const WristModel& model, const Eigen::VectorXd& theta) {
  if (theta.size() == 1 && model.segments() != 1) {
    const double L = total_length(model.geometry);
    Eigen::VectorXd th(model.segments());
    for (int i = 0; i < model.segments(); ++i) {
      th[i] = theta[0] * model.geometry[static_cast<std::size_t>(i)].length / L;
    }
    return th;
  }
  if (theta.size() != model.segments()) throw InvalidParameter("target angle count does not match the wrist");
  return theta;
}

std::vector<Eigen::VectorXd> draw_angles(const DatasetConfig& config, int segments) {
  if (config.samples < 1) throw InvalidParameter("dataset needs at least one sample");
  if (config.train_samples < 1 || config.train_samples > config.samples) {
    throw InvalidParameter("train split must be within 1..samples");
  }
  if (config.outputs != 1 && config.outputs != segments) {
    throw InvalidParameter("dataset outputs must be 1 or the segment count");
  }
  if (!(config.theta_max > 0.0)) throw InvalidParameter("theta_max must be positive");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> u(-config.theta_max, config.theta_max);
  std::vector<Eigen::VectorXd> draws(static_cast<std::size_t>(config.samples));
  for (auto& d : draws) {
    d.resize(config.outputs);
    for (int j = 0; j < config.outputs; ++j) d[j] = u(rng);
  }
  return draws;
}

IkDataset split(std::vector<IkSample> samples, int train) {
  IkDataset ds;
  ds.train.assign(samples.begin(), samples.begin() + train);
  ds.validation.assign(samples.begin() + train, samples.end());
  return ds;
}

double act(double z, Activation a) {
  switch (a) {
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kLeakyRelu: return z > 0.0 ? z : 0.01 * z;
  }
  return z;
}

// Derivative expressed through the activation value y = act(z) where possible.
double act_grad(double z, double y, Activation a) {
  switch (a) {
    case Activation::kSigmoid: return y * (1.0 - y);
    case Activation::kTanh: return 1.0 - y * y;
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu: return z > 0.0 ? 1.0 : 0.01;
  }
  return 1.0;
}

void pack(const std::vector<IkSample>& s, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
  const auto n = static_cast<Eigen::Index>(s.size());
  const Eigen::Index out = s.empty() ? 0 : s.front().theta.size();
  x.resize(2, n);
  y.resize(out, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(0, i) = s[static_cast<std::size_t>(i)].x;
    x(1, i) = s[static_cast<std::size_t>(i)].y;
    y.col(i) = s[static_cast<std::size_t>(i)].theta;
  }
}

Eigen::MatrixXd predict_chunk(const MlpNetwork& net, const Eigen::MatrixXd& xy) {
  return net.output_norm.denormalize(net.forward(net.input_norm.normalize(xy)));
}

Eigen::MatrixXd predict_range(const MlpNetwork& net, const Eigen::MatrixXd& xy, bool parallel) {
  if (xy.rows() != 2) throw InvalidParameter("predict_batch expects 2 x N queries");
  const Eigen::Index n = xy.cols();
  const Eigen::Index chunks = (n + kPredictChunk - 1) / kPredictChunk;
  Eigen::MatrixXd out(net.outputs(), n);
  // Fixed chunking keeps the floating-point path identical between variants.
#pragma omp parallel for schedule(static) if (parallel)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index start = c * kPredictChunk;
    const Eigen::Index len = std::min(kPredictChunk, n - start);
    out.middleCols(start, len) = predict_chunk(net, xy.middleCols(start, len));
  }
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("network file: " + what);
}

}  // namespace

Eigen::Vector2d sample_tip(const WristModel& model, const Eigen::VectorXd& theta) {
  return tip_position(segment_angles(model, theta), model.geometry);
}

IkDataset generate_dataset(const WristModel& model, const DatasetConfig& config) {
  model.validate();
  const auto draws = draw_angles(config, model.segments());
  std::vector<IkSample> samples(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const Eigen::Vector2d tip = sample_tip(model, draws[i]);
    samples[i] = {tip.x(), tip.y(), draws[i]};
  }
  return split(std::move(samples), config.train_samples);
}

IkDataset generate_dataset_parallel(const WristModel& model, const DatasetConfig& config) {
  model.validate();
  const auto draws = draw_angles(config, model.segments());
  std::vector<IkSample> samples(draws.size());
  const auto count = static_cast<long>(draws.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Eigen::Vector2d tip = sample_tip(model, draws[ui]);
    samples[ui] = {tip.x(), tip.y(), draws[ui]};
  }
  return split(std::move(samples), config.train_samples);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: return "leaky_relu";
  }
  return "sigmoid";
}

Activation activation_from_string(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  throw ConfigError("unknown activation '" + name + "' (sigmoid, tanh, relu, leaky_relu)");
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& columns) {
  Normalizer n;
  const double count = static_cast<double>(columns.cols());
  n.mean = columns.rowwise().sum() / count;
  n.scale.resize(columns.rows());
  for (Eigen::Index r = 0; r < columns.rows(); ++r) {
    const double var = (columns.row(r).array() - n.mean[r]).square().sum() / count;
    n.scale[r] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return n;
}

Normalizer Normalizer::identity(int size) {
  return {Eigen::VectorXd::Zero(size), Eigen::VectorXd::Ones(size)};
}

Eigen::MatrixXd Normalizer::normalize(const Eigen::MatrixXd& v) const {
  return (v.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd Normalizer::denormalize(const Eigen::MatrixXd& v) const {
  return (v.array().colwise() * scale.array()).matrix().colwise() + mean;
}

void TrainingConfig::validate(int train_size) const {
  if (epochs < 0) throw InvalidParameter("epochs must be >= 0");
  if (batch_size < 1 || batch_size > train_size) {
    throw InvalidParameter("batch size must be within 1..training-set size");
  }
  if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0)) throw InvalidParameter("learning rates must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidParameter("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidParameter("Adam epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidParameter("weight decay must be >= 0");
  for (int h : hidden) {
    if (h < 1) throw InvalidParameter("hidden layer sizes must be >= 1");
  }
}

double TrainingConfig::learning_rate_at(int epoch) const {
  if (epochs <= 1) return learning_rate;
  const double frac = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return learning_rate * std::pow(final_learning_rate / learning_rate, frac);
}

MlpNetwork MlpNetwork::create(std::vector<int> layers, Activation activation, std::uint64_t seed) {
  if (layers.size() < 2) throw InvalidParameter("network needs at least input and output layers");
  for (int s : layers) {
    if (s < 1) throw InvalidParameter("layer sizes must be >= 1");
  }
  MlpNetwork net;
  net.layers_ = std::move(layers);
  net.activation_ = activation;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 1; l < net.layers_.size(); ++l) {
    const int fan_in = net.layers_[l - 1];
    const int fan_out = net.layers_[l];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Eigen::MatrixXd W(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) W(r, c) = u(rng);
    net.weights_.push_back(std::move(W));
    net.biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  net.input_norm = Normalizer::identity(net.inputs());
  net.output_norm = Normalizer::identity(net.outputs());
  return net;
}

Eigen::MatrixXd MlpNetwork::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != inputs()) throw InvalidParameter("network input has the wrong dimension");
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) z = z.unaryExpr([this](double v) { return act(v, activation_); });
    a = std::move(z);
  }
  return a;
}

double MlpNetwork::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
  const Eigen::MatrixXd out = forward(x);
  return (out - y).squaredNorm() / static_cast<double>(y.size());
}

double MlpNetwork::loss_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::VectorXd& grad) const {
  const std::size_t L = weights_.size();
  std::vector<Eigen::MatrixXd> z(L), a(L + 1);
  a[0] = x;
  for (std::size_t l = 0; l < L; ++l) {
    z[l] = weights_[l] * a[l];
    z[l].colwise() += biases_[l];
    a[l + 1] = l + 1 < L ? Eigen::MatrixXd(z[l].unaryExpr([this](double v) { return act(v, activation_); }))
                         : z[l];
  }
  const Eigen::MatrixXd diff = a[L] - y;
  const double count = static_cast<double>(y.size());
  const double value = diff.squaredNorm() / count;

  grad.resize(parameter_count());
  std::vector<Eigen::MatrixXd> gW(L);
  std::vector<Eigen::VectorXd> gb(L);
  Eigen::MatrixXd delta = (2.0 / count) * diff;
  for (std::size_t l = L; l-- > 0;) {
    gW[l] = delta * a[l].transpose();
    gb[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights_[l].transpose() * delta;
      for (Eigen::Index c = 0; c < back.cols(); ++c)
        for (Eigen::Index r = 0; r < back.rows(); ++r)
          back(r, c) *= act_grad(z[l - 1](r, c), a[l](r, c), activation_);
      delta = std::move(back);
    }
  }
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < L; ++l) {
    for (Eigen::Index r = 0; r < gW[l].rows(); ++r)
      for (Eigen::Index c = 0; c < gW[l].cols(); ++c) grad[off++] = gW[l](r, c);
    for (Eigen::Index r = 0; r < gb[l].size(); ++r) grad[off++] = gb[l][r];
  }
  return value;
}

Eigen::Index MlpNetwork::parameter_count() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::VectorXd MlpNetwork::parameters() const {
  Eigen::VectorXd p(parameter_count());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) p[off++] = weights_[l](r, c);
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) p[off++] = biases_[l][r];
  }
  return p;
}

void MlpNetwork::set_parameters(const Eigen::VectorXd& p) {
  if (p.size() != parameter_count()) throw InvalidParameter("parameter vector has the wrong length");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = p[off++];
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l][r] = p[off++];
  }
}

Eigen::VectorXd MlpNetwork::decay_mask() const {
  Eigen::VectorXd m(parameter_count());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    m.segment(off, weights_[l].size()).setOnes();
    off += weights_[l].size();
    m.segment(off, biases_[l].size()).setZero();
    off += biases_[l].size();
  }
  return m;
}

void MlpNetwork::validate() const {
  if (layers_.size() < 2 || weights_.size() != layers_.size() - 1 || biases_.size() != weights_.size()) {
    throw InvalidParameter("network layers are inconsistent");
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows() != layers_[l + 1] || weights_[l].cols() != layers_[l] ||
        biases_[l].size() != layers_[l + 1]) {
      throw InvalidParameter("network layer shapes do not chain");
    }
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) throw InvalidParameter("network has non-finite parameters");
  }
  if (input_norm.mean.size() != inputs() || input_norm.scale.size() != inputs() ||
      output_norm.mean.size() != outputs() || output_norm.scale.size() != outputs()) {
    throw InvalidParameter("normalization constants do not match the network");
  }
}

TrainingResult train(const IkDataset& data, const TrainingConfig& config) {
  if (data.train.empty()) throw InvalidParameter("training set is empty");
  config.validate(static_cast<int>(data.train.size()));
  Eigen::MatrixXd xt, yt, xv, yv;
  pack(data.train, xt, yt);
  pack(data.validation, xv, yv);

  std::vector<int> layers = {2};
  layers.insert(layers.end(), config.hidden.begin(), config.hidden.end());
  layers.push_back(static_cast<int>(yt.rows()));

  TrainingResult result;
  MlpNetwork& net = result.network;
  net = MlpNetwork::create(layers, config.activation, config.seed);
  net.input_norm = Normalizer::fit(xt);
  net.output_norm = Normalizer::fit(yt);
  net.input_min = xt.rowwise().minCoeff();
  net.input_max = xt.rowwise().maxCoeff();
  net.training = config;

  const Eigen::MatrixXd xtn = net.input_norm.normalize(xt);
  const Eigen::MatrixXd ytn = net.output_norm.normalize(yt);
  const Eigen::MatrixXd xvn = xv.cols() > 0 ? net.input_norm.normalize(xv) : Eigen::MatrixXd(2, 0);
  const Eigen::MatrixXd yvn = yv.cols() > 0 ? net.output_norm.normalize(yv) : Eigen::MatrixXd(yt.rows(), 0);

  const Eigen::Index P = net.parameter_count();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(P), v = Eigen::VectorXd::Zero(P), grad(P);
  const Eigen::VectorXd mask = net.decay_mask();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(xt.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  long t = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = config.learning_rate_at(epoch);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto bs = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xb(xtn.rows(), bs), yb(ytn.rows(), bs);
      for (Eigen::Index i = 0; i < bs; ++i) {
        xb.col(i) = xtn.col(order[start + static_cast<std::size_t>(i)]);
        yb.col(i) = ytn.col(order[start + static_cast<std::size_t>(i)]);
      }
      const double l = net.loss_gradient(xb, yb, grad);
      if (!std::isfinite(l) || !grad.allFinite()) {
        std::ostringstream os;
        os << "training diverged (non-finite loss) in epoch " << epoch + 1;
        throw TrainingFailure(os.str(), epoch + 1);
      }
      loss_sum += l;
      ++batches;
      ++t;
      m = config.beta1 * m + (1.0 - config.beta1) * grad;
      v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
      Eigen::VectorXd p = net.parameters();
      const Eigen::ArrayXd step = (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.epsilon);
      // Decoupled weight decay on weights only.
      p.array() -= lr * (step + config.weight_decay * mask.array() * p.array());
      net.set_parameters(p);
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.learning_rate = lr;
    rec.train_loss = loss_sum / batches;
    rec.validation_loss = xvn.cols() > 0 ? net.loss(xvn, yvn) : std::nan("");
    if (!std::isfinite(rec.train_loss)) throw TrainingFailure("training loss became non-finite", epoch + 1);
    result.report.epochs.push_back(rec);
  }

  net.loss_gradient(xtn, ytn, grad);
  result.report.final_gradient_norm = grad.norm();
  const auto& eval = data.validation.empty() ? data.train : data.validation;
  result.report.validation_rmse = rmse(net, eval);
  // Target range of the sampling box: 2 theta_max, estimated from the data.
  const double range = yt.maxCoeff() - yt.minCoeff();
  result.report.accuracy = 100.0 * (1.0 - result.report.validation_rmse / range);
  result.report.baseline_rmse = rmse(fit_linear_baseline(data.train), eval);
  return result;
}

IkPrediction predict(const MlpNetwork& net, double x_des, double y_des) {
  IkPrediction p;
  Eigen::MatrixXd q(2, 1);
  q << x_des, y_des;
  p.theta = predict_chunk(net, q).col(0);
  const Eigen::Vector2d span = net.input_max - net.input_min;
  const Eigen::Vector2d tol = 1e-9 * span.cwiseMax(Eigen::Vector2d::Constant(1e-12));
  if (x_des < net.input_min.x() - tol.x() || x_des > net.input_max.x() + tol.x() ||
      y_des < net.input_min.y() - tol.y() || y_des > net.input_max.y() + tol.y()) {
    p.out_of_workspace = true;
    std::ostringstream os;
    os << "query (" << x_des << ", " << y_des << ") lies outside the training workspace";
    p.warning = os.str();
  }
  return p;
}

Eigen::MatrixXd predict_batch(const MlpNetwork& net, const Eigen::MatrixXd& xy) {
  return predict_range(net, xy, false);
}

Eigen::MatrixXd predict_batch_parallel(const MlpNetwork& net, const Eigen::MatrixXd& xy) {
  return predict_range(net, xy, true);
}

Eigen::VectorXd LinearBaseline::predict(double x, double y) const {
  return coefficients * Eigen::Vector3d(1.0, x, y);
}

LinearBaseline fit_linear_baseline(const std::vector<IkSample>& samples) {
  if (samples.empty()) throw InvalidParameter("baseline needs samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index out = samples.front().theta.size();
  Eigen::MatrixXd A(n, 3), Y(n, out);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    A.row(i) << 1.0, s.x, s.y;
    Y.row(i) = s.theta.transpose();
  }
  LinearBaseline b;
  b.coefficients = A.colPivHouseholderQr().solve(Y).transpose();
  return b;
}

double rmse(const LinearBaseline& model, const std::vector<IkSample>& samples) {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (const auto& s : samples) {
    sum += (model.predict(s.x, s.y) - s.theta).squaredNorm();
    count += s.theta.size();
  }
  return std::sqrt(sum / static_cast<double>(count));
}

double rmse(const MlpNetwork& net, const std::vector<IkSample>& samples) {
  Eigen::MatrixXd x, y;
  pack(samples, x, y);
  return std::sqrt((predict_batch(net, x) - y).squaredNorm() / static_cast<double>(y.size()));
}

std::string network_to_json(const MlpNetwork& net) {
  net.validate();
  json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["layers"] = net.layers();
  j["activation"] = to_string(net.activation());
  json weights = json::array(), biases = json::array();
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    const auto& W = net.weights()[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(W.size()));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat.push_back(W(r, c));
    weights.push_back(flat);
    biases.push_back(std::vector<double>(net.biases()[l].data(), net.biases()[l].data() + net.biases()[l].size()));
  }
  j["weights_row_major"] = weights;
  j["biases"] = biases;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j["input_mean"] = vec(net.input_norm.mean);
  j["input_scale"] = vec(net.input_norm.scale);
  j["output_mean"] = vec(net.output_norm.mean);
  j["output_scale"] = vec(net.output_norm.scale);
  j["input_min"] = {net.input_min.x(), net.input_min.y()};
  j["input_max"] = {net.input_max.x(), net.input_max.y()};
  const TrainingConfig& t = net.training;
  j["training"] = {{"hidden", t.hidden},
                   {"batch_size", t.batch_size},
                   {"epochs", t.epochs},
                   {"learning_rate", t.learning_rate},
                   {"final_learning_rate", t.final_learning_rate},
                   {"beta1", t.beta1},
                   {"beta2", t.beta2},
                   {"epsilon", t.epsilon},
                   {"weight_decay", t.weight_decay},
                   {"seed", t.seed}};
  return j.dump(1);
}

MlpNetwork network_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network file is not valid JSON: ") + e.what());
  }
  try {
    require(j.value("format", "") == kFormatName, "unexpected format tag");
    require(j.value("version", 0) == kFormatVersion, "unsupported version");
    const auto layers = j.at("layers").get<std::vector<int>>();
    MlpNetwork net = MlpNetwork::create(layers, activation_from_string(j.at("activation").get<std::string>()), 0);
    const auto& W = j.at("weights_row_major");
    const auto& B = j.at("biases");
    require(W.size() == layers.size() - 1 && B.size() == layers.size() - 1, "layer count mismatch");
    Eigen::VectorXd p(net.parameter_count());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      const auto w = W[l].get<std::vector<double>>();
      const auto b = B[l].get<std::vector<double>>();
      require(w.size() == static_cast<std::size_t>(layers[l] * layers[l + 1]), "weight array size mismatch");
      require(b.size() == static_cast<std::size_t>(layers[l + 1]), "bias array size mismatch");
      for (double x : w) p[off++] = x;
      for (double x : b) p[off++] = x;
    }
    net.set_parameters(p);
    auto vec = [&](const char* key) {
      const auto v = j.at(key).get<std::vector<double>>();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    net.input_norm = {vec("input_mean"), vec("input_scale")};
    net.output_norm = {vec("output_mean"), vec("output_scale")};
    const Eigen::VectorXd lo = vec("input_min"), hi = vec("input_max");
    require(lo.size() == 2 && hi.size() == 2, "workspace bounds must have 2 entries");
    net.input_min = lo;
    net.input_max = hi;
    if (j.contains("training")) {
      const auto& t = j.at("training");
      TrainingConfig& c = net.training;
      c.hidden = t.value("hidden", c.hidden);
      c.batch_size = t.value("batch_size", c.batch_size);
      c.epochs = t.value("epochs", c.epochs);
      c.learning_rate = t.value("learning_rate", c.learning_rate);
      c.final_learning_rate = t.value("final_learning_rate", c.final_learning_rate);
      c.beta1 = t.value("beta1", c.beta1);
      c.beta2 = t.value("beta2", c.beta2);
      c.epsilon = t.value("epsilon", c.epsilon);
      c.weight_decay = t.value("weight_decay", c.weight_decay);
      c.seed = t.value("seed", c.seed);
      c.activation = net.activation();
    }
    net.validate();
    return net;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network file is malformed: ") + e.what());
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("network file is inconsistent: ") + e.what());
  }
}

void save_network(const MlpNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write network file " + path);
  out << network_to_json(net) << '\n';
  if (!out) throw Error("failed writing network file " + path);
}

MlpNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("network file not found: " + path, path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

void write_training_report_csv(const TrainingReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write training report " + path);
  out.precision(17);
  out << "epoch,learning_rate,train_loss,validation_loss\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.learning_rate << ',' << e.train_loss << ',' << e.validation_loss << '\n';
  }
}

}  // namespace softwrist

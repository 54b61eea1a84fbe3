#include "softwrist/errors.hpp"
#include "softwrist/neural_ik.hpp"

#include "../support.hpp"

#include "doctest.h"

#include <cstdio>
#include <filesystem>

using namespace softwrist;
using testsupport::Gen;

namespace {

double relative_gradient_error(Activation act, std::uint64_t seed) {
  MlpNetwork net = MlpNetwork::create({2, 3, 2, 1}, act, seed);
  Gen g(seed);
  Eigen::VectorXd p = g.uniform(static_cast<int>(net.parameter_count()), -1.0, 1.0);
  net.set_parameters(p);
  Eigen::MatrixXd x(2, 5), y(1, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g.uniform(-1.5, 1.5);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = g.uniform(-1.0, 1.0);
  Eigen::VectorXd grad;
  net.loss_gradient(x, y, grad);
  Eigen::VectorXd fd(p.size());
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    Eigen::VectorXd pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    net.set_parameters(pp);
    const double lp = net.loss(x, y);
    net.set_parameters(pm);
    const double lm = net.loss(x, y);
    fd[k] = (lp - lm) / (2 * h);
  }
  return (grad - fd).norm() / std::max(grad.norm(), fd.norm());
}

TrainingConfig small_config() {
  TrainingConfig c;
  c.hidden = {30, 30};
  c.epochs = 80;
  c.batch_size = 16;
  return c;
}

IkDataset small_dataset() {
  DatasetConfig d;
  d.samples = 600;
  d.train_samples = 450;
  return generate_dataset(WristModel{}, d);
}

const TrainingResult& small_trained() {
  static const TrainingResult r = train(small_dataset(), small_config());
  return r;
}

}  // namespace

TEST_CASE("backprop matches central differences on a [2,3,2,1] network") {
  for (auto act : {Activation::kSigmoid, Activation::kTanh, Activation::kLeakyRelu}) {
    for (std::uint64_t s : {1ULL, 2ULL, 3ULL}) CHECK(relative_gradient_error(act, s) < 1e-6);
  }
}

TEST_CASE("dataset generation: size, split, straight sample, determinism") {
  const WristModel w;
  DatasetConfig d;
  const IkDataset a = generate_dataset(w, d), b = generate_dataset(w, d);
  CHECK(a.train.size() == 750);
  CHECK(a.validation.size() == 250);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].x == b.train[i].x);
    CHECK(a.train[i].theta[0] == b.train[i].theta[0]);
    CHECK(std::abs(a.train[i].theta[0]) <= testsupport::kThetaMax);
  }
  const IkDataset c = generate_dataset_parallel(w, d);
  for (std::size_t i = 0; i < a.validation.size(); ++i) {
    CHECK(a.validation[i].x == c.validation[i].x);
    CHECK(a.validation[i].y == c.validation[i].y);
  }
  const Eigen::Vector2d straight = sample_tip(w, Eigen::VectorXd::Zero(1));
  CHECK(straight.x() == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(straight.y() == 0.0);
  d.outputs = 4;
  const IkDataset e = generate_dataset(w, d);
  CHECK(e.train[0].theta.size() == 4);
}

TEST_CASE("normalization round trip") {
  Gen g(4);
  Eigen::MatrixXd m(2, 40);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g.uniform(-3.0, 7.0);
  const Normalizer n = Normalizer::fit(m);
  CHECK((n.denormalize(n.normalize(m)) - m).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd z = n.normalize(m);
  CHECK(z.row(0).mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("zero-epoch training leaves the initialization untouched") {
  TrainingConfig c = small_config();
  c.epochs = 0;
  const TrainingResult r = train(small_dataset(), c);
  CHECK(r.report.epochs.empty());
  const MlpNetwork init = MlpNetwork::create({2, 30, 30, 1}, c.activation, c.seed);
  CHECK(r.network.parameters() == init.parameters());
}

TEST_CASE("training drives the loss down and beats the linear baseline") {
  const TrainingResult& r = small_trained();
  const auto& ep = r.report.epochs;
  REQUIRE(ep.size() == 80);
  CHECK(ep.back().train_loss * 10.0 < ep.front().train_loss);
  CHECK(r.report.validation_rmse < r.report.baseline_rmse);
  CHECK(r.report.accuracy > 95.0);
  CHECK(r.report.accuracy <= 100.0);
}

TEST_CASE("training is bit-reproducible under a fixed seed") {
  TrainingConfig c = small_config();
  c.epochs = 10;
  const IkDataset d = small_dataset();
  CHECK(train(d, c).network.parameters() == train(d, c).network.parameters());
}

TEST_CASE("predictions: straight pose, mirror symmetry, workspace warning") {
  const MlpNetwork& net = small_trained().network;
  const IkPrediction straight = predict(net, 0.08, 0.0);
  CHECK(std::abs(straight.theta[0]) < 0.01);
  const WristModel w;
  Gen g(6);
  for (int k = 0; k < 30; ++k) {
    const Eigen::Vector2d tip = sample_tip(w, g.angles(1));
    const double a = predict(net, tip.x(), tip.y()).theta[0], b = predict(net, tip.x(), -tip.y()).theta[0];
    CHECK(std::abs(a + b) < 0.02);
  }
  const IkPrediction far = predict(net, 0.5, 0.5);
  CHECK(far.out_of_workspace);
  CHECK_FALSE(far.warning.empty());
  // The straight pose is the reach limit and may sit past the sampled box.
  const Eigen::Vector2d inside = sample_tip(w, Eigen::VectorXd::Constant(1, 0.3));
  CHECK_FALSE(predict(net, inside.x(), inside.y()).out_of_workspace);
}

TEST_CASE("batch prediction: serial and parallel agree with single queries") {
  const MlpNetwork& net = small_trained().network;
  Gen g(7);
  Eigen::MatrixXd q(2, 150);
  for (Eigen::Index i = 0; i < q.cols(); ++i) q.col(i) = sample_tip(WristModel{}, g.angles(1));
  const Eigen::MatrixXd a = predict_batch(net, q), b = predict_batch_parallel(net, q);
  CHECK(a == b);
  CHECK(a(0, 17) == predict(net, q(0, 17), q(1, 17)).theta[0]);
}

TEST_CASE("network JSON round trip and error handling") {
  const MlpNetwork& net = small_trained().network;
  const MlpNetwork back = network_from_json(network_to_json(net));
  CHECK(back.parameters() == net.parameters());
  CHECK(back.layers() == net.layers());
  CHECK(back.input_norm.scale == net.input_norm.scale);
  CHECK(predict(back, 0.07, 0.02).theta[0] == predict(net, 0.07, 0.02).theta[0]);

  const auto path = (std::filesystem::temp_directory_path() / "softwrist_net_test.json").string();
  save_network(net, path);
  CHECK(load_network(path).parameters() == net.parameters());
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_network(path), MissingArtifact);
  CHECK_THROWS_AS(network_from_json("{\"format\": 3}"), ConfigError);
  CHECK_THROWS_AS(network_from_json("not json"), ConfigError);
}

TEST_CASE("linear baseline recovers an affine map exactly") {
  std::vector<IkSample> s;
  Gen g(8);
  for (int i = 0; i < 50; ++i) {
    IkSample k;
    k.x = g.uniform(0, 1);
    k.y = g.uniform(-1, 1);
    k.theta = Eigen::VectorXd::Constant(1, 0.3 - 2.0 * k.x + 0.7 * k.y);
    s.push_back(k);
  }
  const LinearBaseline b = fit_linear_baseline(s);
  CHECK(rmse(b, s) < 1e-12);
}

TEST_CASE("activation names round trip") {
  for (auto a : {Activation::kSigmoid, Activation::kTanh, Activation::kRelu, Activation::kLeakyRelu}) {
    CHECK(activation_from_string(to_string(a)) == a);
  }
  CHECK_THROWS(activation_from_string("softplus"));
}

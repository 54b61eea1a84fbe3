#include "softwrist/errors.hpp"
#include "softwrist/integrators.hpp"

#include "doctest.h"

#include <cmath>

using namespace softwrist;

namespace {

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

template <class Step>
double integrate(Step&& step, double h, double T, Eigen::VectorXd x) {
  const int n = static_cast<int>(std::lround(T / h));
  for (int k = 0; k < n; ++k) x = step(k * h, x, h);
  return x[0];
}

}  // namespace

TEST_CASE("RK4 converges at fourth order") {
  const OdeRhs f = [](double t, const Eigen::VectorXd& x) { return Eigen::VectorXd(v1(std::cos(t)) - 0.5 * x); };
  // exact: x(t) = (2 cos t + 4 sin t) / 5 + c e^{-t/2}, x(0) = 1
  auto exact = [](double t) { return (2 * std::cos(t) + 4 * std::sin(t)) / 5 + 0.6 * std::exp(-t / 2); };
  auto rk = [&](double t, const Eigen::VectorXd& x, double h) { return rk4_step(f, t, x, h); };
  const double e1 = std::abs(integrate(rk, 0.1, 2.0, v1(1.0)) - exact(2.0));
  const double e2 = std::abs(integrate(rk, 0.05, 2.0, v1(1.0)) - exact(2.0));
  CHECK(std::log2(e1 / e2) > 3.8);
}

TEST_CASE("Radau IIA one step matches its stability function on linear problems") {
  for (double z : {-0.5, -5.0, -1e3, -1e8}) {
    const OdeRhs f = [z](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(z * x); };
    RadauIIA r;
    const double got = r.step(f, 0.0, v1(1.0), 1.0)[0];
    const double R = (1 + z / 3) / (1 - 2 * z / 3 + z * z / 6);
    CHECK(std::abs(got - R) < 1e-9 * std::max(std::abs(R), 1e-3));
  }
}

TEST_CASE("Radau IIA is third order on a smooth problem and stable on a stiff one") {
  const OdeRhs f = [](double t, const Eigen::VectorXd& x) { return Eigen::VectorXd(v1(std::cos(t)) - 0.5 * x); };
  auto exact = [](double t) { return (2 * std::cos(t) + 4 * std::sin(t)) / 5 + 0.6 * std::exp(-t / 2); };
  auto run = [&](double h) {
    RadauIIA r;
    return std::abs(integrate([&](double t, const Eigen::VectorXd& x, double hh) { return r.step(f, t, x, hh); }, h,
                              2.0, v1(1.0)) -
                    exact(2.0));
  };
  CHECK(std::log2(run(0.1) / run(0.05)) > 2.7);

  // x' = -1e6 (x - cos t): tracks cos t with h far beyond the explicit limit.
  const OdeRhs stiff = [](double t, const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-1e6 * (x - v1(std::cos(t))));
  };
  RadauIIA r;
  Eigen::VectorXd x = v1(0.0);
  for (int k = 0; k < 100; ++k) x = r.step(stiff, k * 0.01, x, 0.01);
  CHECK(std::abs(x[0] - std::cos(1.0)) < 1e-5);
  CHECK(r.stats().steps == 100);
  // The Jacobian is constant, so one evaluation serves every step.
  CHECK(r.stats().jacobian_updates == 1);
}

TEST_CASE("Radau IIA reports a diverging Newton iteration") {
  const OdeRhs blowup = [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().square().exp()); };
  RadauIIA r;
  CHECK_THROWS_AS(r.step(blowup, 0.0, v1(3.0), 1.0), IntegrationFailure);
}

TEST_CASE("finite-difference Jacobian of a linear map") {
  Eigen::Matrix2d A;
  A << 1, 2, -3, 4;
  const OdeRhs f = [&](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(A * x); };
  const Eigen::VectorXd x = Eigen::Vector2d(0.3, -0.2);
  CHECK((finite_difference_jacobian(f, 0.0, x, f(0.0, x), 1e-7) - A).cwiseAbs().maxCoeff() < 1e-7);
}

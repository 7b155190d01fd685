#include <doctest.h>

#include <cmath>
#include <limits>

#include "noisefid/curvefit.hpp"
#include "noisefid/errors.hpp"
#include "noisefid/rng.hpp"

using namespace noisefid;

TEST_SUITE("curvefit") {

TEST_CASE("linear-in-parameters model converges to the exact solution") {
  // y = a + b x + c x^2 at exact data: LM must find the generating parameters.
  const auto model = [](double x, const Eigen::VectorXd& p) {
    return p[0] + p[1] * x + p[2] * x * x;
  };
  std::vector<double> xs, ys;
  for (int i = 0; i <= 20; ++i) {
    const double x = -2.0 + 0.2 * i;
    xs.push_back(x);
    ys.push_back(1.5 - 0.7 * x + 0.3 * x * x);
  }
  Eigen::VectorXd p0(3);
  p0 << 0.0, 0.0, 0.0;
  const auto fit = lm_fit(model, xs, ys, p0);
  CHECK(fit.converged);
  CHECK(fit.params[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(fit.params[1] == doctest::Approx(-0.7).epsilon(1e-8));
  CHECK(fit.params[2] == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(fit.ssr < 1e-16);
}

TEST_CASE("noisy exponential decay recovers parameters within the stderrs") {
  // y = A e^{-k x} + noise, a genuinely nonlinear problem.
  const double A = 2.0, k = 1.3, sigma = 0.01;
  const auto model = [](double x, const Eigen::VectorXd& p) {
    return p[0] * std::exp(-p[1] * x);
  };
  RandomStream rng(777, 0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 60; ++i) {
    const double x = 0.05 * i;
    xs.push_back(x);
    ys.push_back(A * std::exp(-k * x) + sigma * rng.gaussian());
  }
  Eigen::VectorXd p0(2);
  p0 << 1.0, 0.5;  // deliberately off
  const auto fit = lm_fit(model, xs, ys, p0);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params[0] - A) < 5 * fit.stderrs[0]);
  CHECK(std::abs(fit.params[1] - k) < 5 * fit.stderrs[1]);
  CHECK(fit.stderrs[0] > 0);
  CHECK(fit.stderrs[1] > 0);
  // residual scale consistent with the injected noise
  const double dof = 60.0 - 2.0;
  CHECK(std::sqrt(fit.ssr / dof) == doctest::Approx(sigma).epsilon(0.5));
}

TEST_CASE("reported stderrs calibrate the scatter across replicates") {
  // Repeat the fit over independent noise draws; the parameter scatter should
  // match the reported linearized standard errors (ratio near 1).
  const double A = 1.0, k = 2.0, sigma = 0.02;
  const auto model = [](double x, const Eigen::VectorXd& p) {
    return p[0] * std::exp(-p[1] * x);
  };
  RandomStream rng(778, 0);
  std::vector<double> ks, ses;
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 40; ++i) {
      const double x = 0.04 * i;
      xs.push_back(x);
      ys.push_back(A * std::exp(-k * x) + sigma * rng.gaussian());
    }
    Eigen::VectorXd p0(2);
    p0 << 0.8, 1.0;
    const auto fit = lm_fit(model, xs, ys, p0);
    REQUIRE(fit.converged);
    ks.push_back(fit.params[1]);
    ses.push_back(fit.stderrs[1]);
  }
  double m = 0;
  for (double v : ks) m += v;
  m /= ks.size();
  double sd = 0;
  for (double v : ks) sd += (v - m) * (v - m);
  sd = std::sqrt(sd / (ks.size() - 1));
  double mean_se = 0;
  for (double v : ses) mean_se += v;
  mean_se /= ses.size();
  CHECK(sd / mean_se > 0.6);
  CHECK(sd / mean_se < 1.6);
}

TEST_CASE("invalid inputs and hopeless models fail loudly") {
  const auto model = [](double x, const Eigen::VectorXd& p) { return p[0] * x; };
  Eigen::VectorXd p0(1);
  p0 << 1.0;
  CHECK_THROWS_AS(lm_fit(model, {1.0, 2.0}, {1.0}, p0), std::invalid_argument);
  CHECK_THROWS_AS(lm_fit(model, {}, {}, p0), std::invalid_argument);
  // fewer points than parameters -> no dof for the error model
  Eigen::VectorXd p2(2);
  p2 << 1.0, 1.0;
  const auto m2 = [](double x, const Eigen::VectorXd& p) { return p[0] * x + p[1]; };
  CHECK_THROWS_AS(lm_fit(m2, {1.0}, {1.0}, p2), std::invalid_argument);

  const auto nan_model = [](double, const Eigen::VectorXd&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(lm_fit(nan_model, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, p0), FitFailed);
}

TEST_CASE("flat degenerate data does not crash") {
  // all-equal y with a constant model: zero residual immediately
  const auto model = [](double, const Eigen::VectorXd& p) { return p[0]; };
  Eigen::VectorXd p0(1);
  p0 << 0.0;
  const auto fit = lm_fit(model, {1.0, 2.0, 3.0}, {4.0, 4.0, 4.0}, p0);
  CHECK(fit.converged);
  CHECK(fit.params[0] == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(fit.ssr < 1e-18);
}

}  // TEST_SUITE

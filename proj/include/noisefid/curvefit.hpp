#pragma once
// Levenberg-Marquardt nonlinear least squares for small parameter counts.
// Parameter standard errors come from the linearized covariance
// s^2 (J^T J)^{-1} with s^2 = SSR / (n - p).

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace noisefid {

struct CurveFitResult {
  Eigen::VectorXd params;
  Eigen::VectorXd stderrs;
  double ssr = 0;
  int iterations = 0;
  bool converged = false;
};

// model(x, params) evaluated per data point; Jacobian by central differences.
CurveFitResult lm_fit(const std::function<double(double, const Eigen::VectorXd&)>& model,
                      const std::vector<double>& x, const std::vector<double>& y,
                      Eigen::VectorXd p0, int max_iterations = 200, double tol = 1e-12);

}  // namespace noisefid

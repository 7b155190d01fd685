#include "noisefid/curvefit.hpp"

#include <cmath>
#include <stdexcept>

#include "noisefid/errors.hpp"

namespace noisefid {

namespace {

Eigen::VectorXd residuals(const std::function<double(double, const Eigen::VectorXd&)>& model,
                          const std::vector<double>& x, const std::vector<double>& y,
                          const Eigen::VectorXd& p) {
  Eigen::VectorXd r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r(i) = y[i] - model(x[i], p);
  return r;
}

Eigen::MatrixXd jacobian(const std::function<double(double, const Eigen::VectorXd&)>& model,
                         const std::vector<double>& x, const Eigen::VectorXd& p) {
  // d(residual)/d(param) = -d(model)/d(param); central differences
  Eigen::MatrixXd J(x.size(), p.size());
  for (int j = 0; j < p.size(); ++j) {
    const double h = std::max(1e-9, 1e-7 * std::abs(p(j)));
    Eigen::VectorXd pp = p, pm = p;
    pp(j) += h;
    pm(j) -= h;
    for (std::size_t i = 0; i < x.size(); ++i)
      J(i, j) = -(model(x[i], pp) - model(x[i], pm)) / (2.0 * h);
  }
  return J;
}

}  // namespace

CurveFitResult lm_fit(const std::function<double(double, const Eigen::VectorXd&)>& model,
                      const std::vector<double>& x, const std::vector<double>& y,
                      Eigen::VectorXd p0, int max_iterations, double tol) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("lm_fit: x and y must be non-empty and equal-sized");
  if (static_cast<int>(x.size()) <= p0.size())
    throw std::invalid_argument("lm_fit: need more data points than parameters");

  CurveFitResult out;
  Eigen::VectorXd p = std::move(p0);
  Eigen::VectorXd r = residuals(model, x, y, p);
  double ssr = r.squaredNorm();
  if (!std::isfinite(ssr))
    throw FitFailed("lm_fit: non-finite residuals at the initial guess");
  double lambda = 1e-3;

  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd J = jacobian(model, x, p);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;

    bool stepped = false;
    for (int tries = 0; tries < 25 && !stepped; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10;
        continue;
      }
      const Eigen::VectorXd pt = p + step;
      const Eigen::VectorXd rt = residuals(model, x, y, pt);
      const double st = rt.squaredNorm();
      if (std::isfinite(st) && st <= ssr) {
        const double rel = (ssr - st) / std::max(ssr, 1e-300);
        p = pt;
        r = rt;
        ssr = st;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel < tol || step.norm() < tol * (1.0 + p.norm())) {
          out.converged = true;
        }
      } else {
        lambda *= 10;
      }
    }
    if (!stepped) {
      out.converged = ssr < 1e-28 || it > 0;  // stuck at (numerical) minimum
      break;
    }
    if (out.converged) break;
  }

  const Eigen::MatrixXd J = jacobian(model, x, p);
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  const auto dof = static_cast<double>(x.size()) - static_cast<double>(p.size());
  const double s2 = ssr / std::max(dof, 1.0);
  const Eigen::MatrixXd cov =
      s2 * JtJ.ldlt().solve(Eigen::MatrixXd::Identity(p.size(), p.size()));
  out.params = p;
  out.stderrs = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.ssr = ssr;
  if (!out.params.allFinite())
    throw FitFailed("lm_fit: parameters diverged to non-finite values");
  return out;
}

}  // namespace noisefid

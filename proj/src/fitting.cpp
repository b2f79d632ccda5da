#include "stix/fitting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stix {

namespace {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r0) {
  const int n = static_cast<int>(r0.size());
  const int p = static_cast<int>(x.size());
  Eigen::MatrixXd j(n, p);
  for (int k = 0; k < p; ++k) {
    const double h = 1e-7 * std::max(1.0, std::abs(x(k)));
    Eigen::VectorXd xp = x;
    xp(k) += h;
    j.col(k) = (f(xp) - r0) / h;
  }
  return j;
}

}  // namespace

FitResult levenberg_marquardt(const ResidualFn& residual, Eigen::VectorXd x0,
                              int max_iter, double step_tol) {
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd r = residual(x);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  FitResult res;
  bool converged = false;
  int iter = 0;
  for (; iter < max_iter && !converged; ++iter) {
    const Eigen::MatrixXd j = numeric_jacobian(residual, x, r);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      const Eigen::VectorXd x_new = x + delta;
      const Eigen::VectorXd r_new = residual(x_new);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        if (delta.norm() < step_tol * (1.0 + x.norm()) ||
            cost - cost_new < 1e-16 * (1.0 + cost)) {
          converged = true;
        }
        x = x_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      converged = true;  // no downhill direction left: local minimum
    }
  }

  const int n = static_cast<int>(r.size());
  const int p = static_cast<int>(x.size());
  res.rms = std::sqrt(cost / std::max(1, n));
  if (!converged)
    throw std::runtime_error(
        "levenberg_marquardt: no convergence after " +
        std::to_string(max_iter) + " iterations, rms " + std::to_string(res.rms));

  res.params = x;
  res.iterations = iter;
  res.converged = true;
  res.covariance = Eigen::MatrixXd::Zero(p, p);
  if (n > p) {
    const Eigen::MatrixXd j = numeric_jacobian(residual, x, r);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible())
      res.covariance = lu.inverse() * (cost / (n - p));
  }
  return res;
}

}  // namespace stix

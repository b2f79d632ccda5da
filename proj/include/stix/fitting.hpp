#pragma once

#include <Eigen/Dense>
#include <functional>

// Small damped Gauss-Newton (Levenberg-Marquardt) engine with a numeric
// Jacobian, shared by the blinking and coincidence-peak fits.

namespace stix {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // sigma^2 (J^T J)^-1; zero matrix if singular
  double rms = 0.0;            // final residual RMS
  int iterations = 0;
  bool converged = false;
};

/// Minimize ||residual(x)||^2 from x0. Throws std::runtime_error when the
/// iteration fails to converge within max_iter (message carries the last RMS).
FitResult levenberg_marquardt(const ResidualFn& residual, Eigen::VectorXd x0,
                              int max_iter = 200, double step_tol = 1e-12);

}  // namespace stix

#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace schurpd {

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct PcgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  int iterations_to_1e3 = -1;  // first iteration with ||r|| / ||b|| <= 1e-3
  double relative_residual = 0.0;
  // 0.5 x^T A x - b^T x after each iteration; equals the squared A-norm of
  // the error up to a constant.
  std::vector<double> energy;
};

/// Jacobi-preconditioned conjugate gradients from x = 0. Stops when
/// ||r|| / ||b|| <= tol or after max_iters. Throws IndefiniteMatrix when a
/// search direction has non-positive curvature.
PcgResult pcg(const LinearOperator& apply, const Eigen::VectorXd& b,
              const Eigen::VectorXd& jacobi_diag, double tol, int max_iters);

}  // namespace schurpd

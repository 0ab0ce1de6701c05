#include "schurpd/pcg.hpp"

#include "schurpd/common.hpp"

#include <string>

namespace schurpd {

PcgResult pcg(const LinearOperator& apply, const Eigen::VectorXd& b,
              const Eigen::VectorXd& jacobi_diag, double tol, int max_iters) {
  const Index n = static_cast<Index>(b.size());
  if (jacobi_diag.size() != n) throw InvalidArgument("preconditioner size mismatch");
  PcgResult out;
  out.x = Eigen::VectorXd::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    out.iterations_to_1e3 = 0;
    return out;
  }

  const Eigen::VectorXd inv_diag = jacobi_diag.cwiseInverse();
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  double rel = 1.0;

  for (int it = 0; it < max_iters; ++it) {
    if (rel <= tol) break;
    ap.setZero();
    apply(p, ap);
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0)) {
      throw IndefiniteMatrix("conjugate gradients breakdown at iteration " + std::to_string(it), it);
    }
    const double alpha = rz / curvature;
    out.x += alpha * p;
    r -= alpha * ap;
    ++out.iterations;
    rel = r.norm() / b_norm;
    out.energy.push_back(-0.5 * out.x.dot(b + r));
    if (out.iterations_to_1e3 < 0 && rel <= 1e-3) out.iterations_to_1e3 = out.iterations;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  out.relative_residual = rel;
  return out;
}

}  // namespace schurpd

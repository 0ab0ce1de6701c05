#include "schurpd/dense_spd.hpp"

#include <string>

namespace schurpd {

DenseSpd DenseSpd::factor(Eigen::MatrixXd h) {
  if (h.rows() != h.cols()) throw InvalidArgument("dense factor needs a square matrix");
  DenseSpd f;
  f.h_ = std::move(h);
  if (f.h_.rows() == 0) return f;
  f.llt_.compute(f.h_);
  const double tol = 1e-13 * f.h_.diagonal().maxCoeff();
  const auto& l = f.llt_.matrixLLT();
  // On failure Eigen leaves the offending (unsquare-rooted) pivot in place, so
  // the first column failing this test is the one that broke down.
  for (Index i = 0; i < f.h_.rows(); ++i) {
    if (!(l(i, i) > 0.0 && l(i, i) * l(i, i) > tol)) {
      throw IndefiniteMatrix("non-positive pivot in dense Cholesky at column " + std::to_string(i), i);
    }
  }
  if (f.llt_.info() != Eigen::Success) {
    throw IndefiniteMatrix("dense Cholesky failed", f.size() - 1);
  }
  return f;
}

DenseSpd DenseSpd::assemble(const Eigen::MatrixXd& sigma0, const SymmetricSparse& c22) {
  if (sigma0.rows() != c22.size() || sigma0.cols() != c22.size()) {
    throw InvalidArgument("Schur complement and collision block sizes differ");
  }
  Eigen::MatrixXd h = sigma0;
  const auto cp = c22.col_ptr();
  const auto ri = c22.row_idx();
  const auto v = c22.values();
  for (Index j = 0; j < c22.size(); ++j) {
    for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) {
      const Index i = ri[p];
      h(i, j) += v[p];
      if (i != j) h(j, i) += v[p];
    }
  }
  return factor(std::move(h));
}

Eigen::MatrixXd DenseSpd::chol() const {
  if (h_.rows() == 0) return {};
  return llt_.matrixL();
}

Eigen::MatrixXd DenseSpd::solve(const Eigen::MatrixXd& g) const {
  if (g.rows() != h_.rows()) throw InvalidArgument("dense solve size mismatch");
  if (h_.rows() == 0) return Eigen::MatrixXd(0, g.cols());
  return llt_.solve(g);
}

}  // namespace schurpd

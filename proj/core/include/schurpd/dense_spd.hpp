#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "schurpd/sparse_matrix.hpp"

namespace schurpd {

/// Dense symmetric positive definite matrix with its Cholesky factor.
class DenseSpd {
 public:
  /// A pivot at or below 1e-13 * max diagonal is rejected as indefinite.
  static DenseSpd factor(Eigen::MatrixXd h);

  /// h = sigma0 + c22, then an O(m^3 / 3) dense factorization.
  static DenseSpd assemble(const Eigen::MatrixXd& sigma0, const SymmetricSparse& c22);

  Index size() const { return static_cast<Index>(h_.rows()); }
  const Eigen::MatrixXd& h() const { return h_; }
  Eigen::MatrixXd chol() const;

  /// H^-1 g for one or several columns (one per coordinate).
  Eigen::MatrixXd solve(const Eigen::MatrixXd& g) const;

 private:
  Eigen::MatrixXd h_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace schurpd

#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "schurpd/common.hpp"
#include "schurpd/sparse_matrix.hpp"

namespace schurpd {

enum class FillOrdering { kAmd, kNatural };

/// Fill-reducing ordering that only reorders the leading block [0, n1).
/// Returns new -> old; entries [n1, n) map to themselves.
std::vector<Index> fill_ordering(const SymmetricSparse& a, Index n1,
                                 FillOrdering kind = FillOrdering::kAmd);

/// Elimination tree of the leading n1 x n1 block (-1 marks a root).
std::vector<Index> elimination_tree(const SymmetricSparse& a, Index n1);

/// Nonzero count (diagonal included) of the Cholesky factor of `a` in its
/// current ordering, computed symbolically.
std::size_t cholesky_factor_nonzeros(const SymmetricSparse& a);

/// Elimination of the leading n1 unknowns of a symmetric positive definite
/// matrix
///
///   [A11 A12]   [L1       0] [I  0    ] [L1^T  L1^-1 A12]
///   [A21 A22] = [A21 L1^-T I] [0  Sigma] [0     I        ]
///
/// with Sigma = A22 - A21 A11^-1 A12 kept as a dense matrix. L1 and the
/// coupling block A21 L1^-T share one column-major store; the x1 unknowns are
/// internally reordered by `fill_perm` while x2 keeps its order.
class PartialFactor {
 public:
  struct Forward {
    Eigen::MatrixXd y1;  // L1^-1 b1, in fill-permuted order
    Eigen::MatrixXd y2;  // b2 - A21 A11^-1 b1
  };

  static PartialFactor compute(const SymmetricSparse& a, Index n1,
                               FillOrdering ordering = FillOrdering::kAmd);

  Index n() const { return n1_ + n2_; }
  Index n1() const { return n1_; }
  Index n2() const { return n2_; }

  const Eigen::MatrixXd& sigma0() const { return sigma0_; }
  std::span<const Index> fill_perm() const { return fill_perm_; }

  std::size_t l1_nonzeros() const;
  std::size_t coupling_nonzeros() const;

  Forward forward_sub(const Eigen::MatrixXd& b1, const Eigen::MatrixXd& b2) const;

  /// Solves L1^T x1 = y1 - (L1^-1 A12) x2 and returns x1 in the caller's x1 order.
  Eigen::MatrixXd backward_sub(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& x2) const;

  /// Dense copies for inspection on small problems (x1 in fill-permuted order).
  Eigen::MatrixXd l1_dense() const;
  Eigen::MatrixXd coupling_dense() const;

 private:
  Index n1_ = 0;
  Index n2_ = 0;
  std::vector<Index> fill_perm_;      // permuted x1 position -> caller x1 index
  std::vector<std::size_t> col_ptr_;  // n1 + 1 columns of [L1; A21 L1^-T]
  std::vector<Index> rows_;           // x2 rows are stored as n1 + local index
  std::vector<double> vals_;
  Eigen::MatrixXd sigma0_;
};

}  // namespace schurpd

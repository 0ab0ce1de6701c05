#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <vector>

#include "schurpd/common.hpp"

namespace schurpd {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Symmetric sparse matrix holding its upper triangle in compressed sparse
/// column form: column j stores rows i <= j in ascending order.
class SymmetricSparse {
 public:
  SymmetricSparse() = default;
  explicit SymmetricSparse(Index n);

  /// Duplicate entries are summed; (i, j) and (j, i) address the same entry.
  static SymmetricSparse from_triplets(Index n, std::span<const Triplet> triplets);
  static SymmetricSparse diagonal(const Eigen::VectorXd& d);

  Index size() const { return n_; }
  std::size_t nonzeros() const { return row_idx_.size(); }

  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const Index> row_idx() const { return row_idx_; }
  std::span<const double> values() const { return values_; }

  double coeff(Index i, Index j) const;
  Eigen::VectorXd diagonal_values() const;
  Eigen::MatrixXd to_dense() const;

  /// y = A x for any number of right-hand-side columns.
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  void multiply_add(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  /// Pattern union sum.
  SymmetricSparse operator+(const SymmetricSparse& other) const;

  /// Principal submatrix over a contiguous index range [begin, end).
  SymmetricSparse block(Index begin, Index end) const;

  friend bool operator==(const SymmetricSparse&, const SymmetricSparse&) = default;

 private:
  Index n_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<Index> row_idx_;
  std::vector<double> values_;

  friend SymmetricSparse permute_symmetric(const SymmetricSparse&, std::span<const Index>);
};

/// P A P^T where `old_to_new[i]` is the new index of row/column i. Values are
/// moved, never recomputed, so permuting back reproduces A bit for bit.
SymmetricSparse permute_symmetric(const SymmetricSparse& a, std::span<const Index> old_to_new);

std::vector<Index> invert_permutation(std::span<const Index> perm);
bool is_permutation(std::span<const Index> perm);

/// Coordinate-format dump of the full symmetric matrix (upper triangle,
/// "symmetric" qualifier), 1-based.
void write_matrix_market(std::ostream& out, const SymmetricSparse& a);

}  // namespace schurpd

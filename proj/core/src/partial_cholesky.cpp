#include "schurpd/partial_cholesky.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace schurpd {

namespace {

// Row pattern of L(k, 0:min(k, n1)) as a reach in the elimination tree,
// written to stack[top..n1) in topological order. Returns top.
Index ereach(const SymmetricSparse& c, Index k, Index n1, std::span<const Index> parent,
             std::vector<Index>& mark, std::vector<Index>& stack, std::vector<Index>& path) {
  const auto cp = c.col_ptr();
  const auto ri = c.row_idx();
  const Index limit = std::min(k, n1);
  Index top = n1;
  if (k < n1) mark[static_cast<std::size_t>(k)] = k;
  for (std::size_t p = cp[k]; p < cp[k + 1]; ++p) {
    Index i = ri[p];
    if (i >= limit) continue;
    Index len = 0;
    while (i != -1 && mark[static_cast<std::size_t>(i)] != k) {
      path[static_cast<std::size_t>(len++)] = i;
      mark[static_cast<std::size_t>(i)] = k;
      i = parent[static_cast<std::size_t>(i)];
    }
    while (len > 0) stack[static_cast<std::size_t>(--top)] = path[static_cast<std::size_t>(--len)];
  }
  return top;
}

// Entries per column of [L1; A21 L1^-T], diagonal included.
std::vector<std::size_t> column_counts(const SymmetricSparse& c, Index n1,
                                       std::span<const Index> parent) {
  const Index n = c.size();
  std::vector<std::size_t> count(static_cast<std::size_t>(n1), 1);
  std::vector<Index> mark(static_cast<std::size_t>(n1), -1), stack(static_cast<std::size_t>(n1)),
      path(static_cast<std::size_t>(n1));
  for (Index k = 0; k < n; ++k) {
    const Index top = ereach(c, k, n1, parent, mark, stack, path);
    for (Index s = top; s < n1; ++s) ++count[static_cast<std::size_t>(stack[static_cast<std::size_t>(s)])];
  }
  return count;
}

}  // namespace

std::vector<Index> fill_ordering(const SymmetricSparse& a, Index n1, FillOrdering kind) {
  const Index n = a.size();
  if (n1 < 0 || n1 > n) throw InvalidArgument("leading block size out of range");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  if (kind == FillOrdering::kNatural || n1 < 2) return perm;

  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  std::vector<Eigen::Triplet<double>> pattern;
  pattern.reserve(2 * a.nonzeros());
  for (Index j = 0; j < n1; ++j) {
    for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) {
      const Index i = ri[p];
      pattern.emplace_back(i, j, 1.0);
      if (i != j) pattern.emplace_back(j, i, 1.0);
    }
  }
  Eigen::SparseMatrix<double> leading(n1, n1);
  leading.setFromTriplets(pattern.begin(), pattern.end());

  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> amd;
  Eigen::AMDOrdering<Index> ordering;
  ordering(leading, amd);
  // Eigen's AMD result maps new position -> old index.
  for (Index p = 0; p < n1; ++p) perm[static_cast<std::size_t>(p)] = amd.indices()[p];
  return perm;
}

std::vector<Index> elimination_tree(const SymmetricSparse& a, Index n1) {
  std::vector<Index> parent(static_cast<std::size_t>(n1), -1), ancestor(static_cast<std::size_t>(n1), -1);
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  for (Index k = 0; k < n1; ++k) {
    for (std::size_t p = cp[k]; p < cp[k + 1]; ++p) {
      Index i = ri[p];
      while (i != -1 && i < k) {
        const Index next = ancestor[static_cast<std::size_t>(i)];
        ancestor[static_cast<std::size_t>(i)] = k;
        if (next == -1) parent[static_cast<std::size_t>(i)] = k;
        i = next;
      }
    }
  }
  return parent;
}

std::size_t cholesky_factor_nonzeros(const SymmetricSparse& a) {
  const auto parent = elimination_tree(a, a.size());
  const auto counts = column_counts(a, a.size(), parent);
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

PartialFactor PartialFactor::compute(const SymmetricSparse& a, Index n1, FillOrdering ordering) {
  const Index n = a.size();
  if (n1 < 0 || n1 > n) throw InvalidArgument("leading block size out of range");

  PartialFactor f;
  f.n1_ = n1;
  f.n2_ = n - n1;

  const auto new_to_old = fill_ordering(a, n1, ordering);
  const auto old_to_new = invert_permutation(new_to_old);
  f.fill_perm_.assign(new_to_old.begin(), new_to_old.begin() + n1);
  const SymmetricSparse c = permute_symmetric(a, old_to_new);

  const auto parent = elimination_tree(c, n1);
  const auto counts = column_counts(c, n1, parent);
  f.col_ptr_.assign(static_cast<std::size_t>(n1) + 1, 0);
  for (Index j = 0; j < n1; ++j) {
    f.col_ptr_[static_cast<std::size_t>(j) + 1] = f.col_ptr_[static_cast<std::size_t>(j)] + counts[static_cast<std::size_t>(j)];
  }
  f.rows_.resize(f.col_ptr_.back());
  f.vals_.resize(f.col_ptr_.back());

  const Eigen::VectorXd diag = c.diagonal_values();
  const double max_diag = n > 0 ? diag.maxCoeff() : 0.0;
  const double pivot_tol = 1e-13 * max_diag;

  f.sigma0_ = Eigen::MatrixXd::Zero(f.n2_, f.n2_);
  const auto cp = c.col_ptr();
  const auto ri = c.row_idx();
  const auto cv = c.values();

  std::vector<std::size_t> next(f.col_ptr_.begin(), f.col_ptr_.end() - 1);
  std::vector<double> x(static_cast<std::size_t>(n1), 0.0);
  std::vector<Index> mark(static_cast<std::size_t>(n1), -1), stack(static_cast<std::size_t>(n1)),
      path(static_cast<std::size_t>(n1));

  for (Index k = 0; k < n; ++k) {
    const Index top = ereach(c, k, n1, parent, mark, stack, path);
    const Index limit = std::min(k, n1);
    double d = 0.0;
    for (std::size_t p = cp[k]; p < cp[k + 1]; ++p) {
      const Index i = ri[p];
      if (i < limit) {
        x[static_cast<std::size_t>(i)] = cv[p];
      } else if (k < n1) {
        d = cv[p];  // only the diagonal remains in an upper column
      } else {
        f.sigma0_(i - n1, k - n1) = cv[p];
        f.sigma0_(k - n1, i - n1) = cv[p];
      }
    }
    for (Index s = top; s < n1; ++s) {
      const Index j = stack[static_cast<std::size_t>(s)];
      const std::size_t head = f.col_ptr_[static_cast<std::size_t>(j)];
      const double lkj = x[static_cast<std::size_t>(j)] / f.vals_[head];
      x[static_cast<std::size_t>(j)] = 0.0;
      for (std::size_t p = head + 1; p < next[static_cast<std::size_t>(j)]; ++p) {
        const Index r = f.rows_[p];
        if (r >= n1) break;
        x[static_cast<std::size_t>(r)] -= f.vals_[p] * lkj;
      }
      d -= lkj * lkj;
      const std::size_t slot = next[static_cast<std::size_t>(j)]++;
      f.rows_[slot] = k;
      f.vals_[slot] = lkj;
    }
    if (k < n1) {
      if (!(d > pivot_tol)) {
        throw IndefiniteMatrix("non-positive pivot in sparse Cholesky at column " +
                                   std::to_string(new_to_old[static_cast<std::size_t>(k)]),
                               new_to_old[static_cast<std::size_t>(k)]);
      }
      const std::size_t slot = next[static_cast<std::size_t>(k)]++;
      f.rows_[slot] = k;
      f.vals_[slot] = std::sqrt(d);
    }
  }

  // Sigma = A22 - (A21 L1^-T)(A21 L1^-T)^T, accumulated column by column of
  // the coupling block into the lower triangle.
  std::vector<std::pair<Index, double>> tail;
  for (Index j = 0; j < n1; ++j) {
    tail.clear();
    for (std::size_t p = f.col_ptr_[static_cast<std::size_t>(j)] + 1; p < f.col_ptr_[static_cast<std::size_t>(j) + 1]; ++p) {
      if (f.rows_[p] >= n1) tail.emplace_back(f.rows_[p] - n1, f.vals_[p]);
    }
    for (std::size_t b = 0; b < tail.size(); ++b) {
      const Index col = tail[b].first;
      const double vb = tail[b].second;
      double* column = f.sigma0_.col(col).data();
      for (std::size_t a2 = b; a2 < tail.size(); ++a2) column[tail[a2].first] -= tail[a2].second * vb;
    }
  }
  for (Index j = 0; j < f.n2_; ++j) {
    for (Index i = j + 1; i < f.n2_; ++i) f.sigma0_(j, i) = f.sigma0_(i, j);
  }
  return f;
}

std::size_t PartialFactor::l1_nonzeros() const {
  std::size_t count = 0;
  for (Index r : rows_) count += r < n1_ ? 1 : 0;
  return count;
}

std::size_t PartialFactor::coupling_nonzeros() const { return rows_.size() - l1_nonzeros(); }

PartialFactor::Forward PartialFactor::forward_sub(const Eigen::MatrixXd& b1,
                                                  const Eigen::MatrixXd& b2) const {
  if (b1.rows() != n1_ || b2.rows() != n2_ || b1.cols() != b2.cols()) {
    throw InvalidArgument("forward_sub: right-hand side size mismatch");
  }
  Forward out;
  out.y1.resize(n1_, b1.cols());
  for (Index p = 0; p < n1_; ++p) out.y1.row(p) = b1.row(fill_perm_[static_cast<std::size_t>(p)]);
  out.y2 = b2;
  for (Index c = 0; c < b1.cols(); ++c) {
    double* y1 = out.y1.col(c).data();
    double* y2 = out.y2.col(c).data();
    for (Index j = 0; j < n1_; ++j) {
      const std::size_t head = col_ptr_[static_cast<std::size_t>(j)];
      const double yj = (y1[j] /= vals_[head]);
      if (yj == 0.0) continue;
      for (std::size_t p = head + 1; p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p) {
        const Index r = rows_[p];
        if (r < n1_) {
          y1[r] -= vals_[p] * yj;
        } else {
          y2[r - n1_] -= vals_[p] * yj;
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd PartialFactor::backward_sub(const Eigen::MatrixXd& y1,
                                            const Eigen::MatrixXd& x2) const {
  if (y1.rows() != n1_ || x2.rows() != n2_ || y1.cols() != x2.cols()) {
    throw InvalidArgument("backward_sub: size mismatch");
  }
  Eigen::MatrixXd x = y1;
  for (Index c = 0; c < y1.cols(); ++c) {
    double* xc = x.col(c).data();
    const double* x2c = x2.col(c).data();
    for (Index j = n1_ - 1; j >= 0; --j) {
      const std::size_t head = col_ptr_[static_cast<std::size_t>(j)];
      double s = xc[j];
      for (std::size_t p = head + 1; p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p) {
        const Index r = rows_[p];
        s -= vals_[p] * (r < n1_ ? xc[r] : x2c[r - n1_]);
      }
      xc[j] = s / vals_[head];
    }
  }
  Eigen::MatrixXd out(n1_, y1.cols());
  for (Index p = 0; p < n1_; ++p) out.row(fill_perm_[static_cast<std::size_t>(p)]) = x.row(p);
  return out;
}

Eigen::MatrixXd PartialFactor::l1_dense() const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n1_, n1_);
  for (Index j = 0; j < n1_; ++j) {
    for (std::size_t p = col_ptr_[static_cast<std::size_t>(j)]; p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p) {
      if (rows_[p] < n1_) l(rows_[p], j) = vals_[p];
    }
  }
  return l;
}

Eigen::MatrixXd PartialFactor::coupling_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n2_, n1_);
  for (Index j = 0; j < n1_; ++j) {
    for (std::size_t p = col_ptr_[static_cast<std::size_t>(j)]; p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p) {
      if (rows_[p] >= n1_) m(rows_[p] - n1_, j) = vals_[p];
    }
  }
  return m;
}

}  // namespace schurpd

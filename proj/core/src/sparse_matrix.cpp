#include "schurpd/sparse_matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace schurpd {

SymmetricSparse::SymmetricSparse(Index n) : n_(n), col_ptr_(static_cast<std::size_t>(n) + 1, 0) {}

SymmetricSparse SymmetricSparse::from_triplets(Index n, std::span<const Triplet> triplets) {
  SymmetricSparse a(n);
  std::vector<std::size_t> count(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) {
      throw InvalidArgument("triplet index out of range");
    }
    ++count[static_cast<std::size_t>(std::max(t.row, t.col)) + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by column, then sort each column and merge duplicates.
  std::vector<Index> rows(triplets.size());
  std::vector<double> vals(triplets.size());
  std::vector<std::size_t> next(count.begin(), count.end() - 1);
  for (const auto& t : triplets) {
    const auto col = static_cast<std::size_t>(std::max(t.row, t.col));
    const std::size_t slot = next[col]++;
    rows[slot] = std::min(t.row, t.col);
    vals[slot] = t.value;
  }

  a.row_idx_.reserve(triplets.size());
  a.values_.reserve(triplets.size());
  std::vector<std::size_t> order;
  for (Index j = 0; j < n; ++j) {
    const std::size_t begin = count[static_cast<std::size_t>(j)];
    const std::size_t end = count[static_cast<std::size_t>(j) + 1];
    order.resize(end - begin);
    std::iota(order.begin(), order.end(), begin);
    // Stable so that duplicates are summed in input order.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return rows[x] < rows[y]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Index r = rows[order[k]];
      if (k > 0 && r == a.row_idx_.back()) {
        a.values_.back() += vals[order[k]];
      } else {
        a.row_idx_.push_back(r);
        a.values_.push_back(vals[order[k]]);
      }
    }
    a.col_ptr_[static_cast<std::size_t>(j) + 1] = a.row_idx_.size();
  }
  return a;
}

SymmetricSparse SymmetricSparse::diagonal(const Eigen::VectorXd& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return from_triplets(static_cast<Index>(d.size()), t);
}

double SymmetricSparse::coeff(Index i, Index j) const {
  if (i > j) std::swap(i, j);
  const auto begin = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[j]);
  const auto end = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[j + 1]);
  const auto it = std::lower_bound(begin, end, i);
  if (it == end || *it != i) return 0.0;
  return values_[static_cast<std::size_t>(it - row_idx_.begin())];
}

Eigen::VectorXd SymmetricSparse::diagonal_values() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
  for (Index j = 0; j < n_; ++j) {
    const std::size_t end = col_ptr_[j + 1];
    if (end > col_ptr_[j] && row_idx_[end - 1] == j) d[j] = values_[end - 1];
  }
  return d;
}

Eigen::MatrixXd SymmetricSparse::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (Index j = 0; j < n_; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      m(row_idx_[p], j) = values_[p];
      m(j, row_idx_[p]) = values_[p];
    }
  }
  return m;
}

Eigen::MatrixXd SymmetricSparse::multiply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_, x.cols());
  for (Index j = 0; j < n_; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const Index i = row_idx_[p];
      const double v = values_[p];
      y.row(i) += v * x.row(j);
      if (i != j) y.row(j) += v * x.row(i);
    }
  }
  return y;
}

void SymmetricSparse::multiply_add(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  for (Index j = 0; j < n_; ++j) {
    double acc = 0.0;
    const double xj = x[j];
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const Index i = row_idx_[p];
      const double v = values_[p];
      if (i != j) {
        y[i] += v * xj;
        acc += v * x[i];
      } else {
        acc += v * xj;
      }
    }
    y[j] += acc;
  }
}

SymmetricSparse SymmetricSparse::operator+(const SymmetricSparse& other) const {
  if (other.n_ != n_) throw InvalidArgument("matrix size mismatch in sum");
  SymmetricSparse s(n_);
  s.row_idx_.reserve(nonzeros() + other.nonzeros());
  s.values_.reserve(nonzeros() + other.nonzeros());
  for (Index j = 0; j < n_; ++j) {
    std::size_t p = col_ptr_[j], q = other.col_ptr_[j];
    const std::size_t pe = col_ptr_[j + 1], qe = other.col_ptr_[j + 1];
    while (p < pe || q < qe) {
      if (q == qe || (p < pe && row_idx_[p] < other.row_idx_[q])) {
        s.row_idx_.push_back(row_idx_[p]);
        s.values_.push_back(values_[p++]);
      } else if (p == pe || other.row_idx_[q] < row_idx_[p]) {
        s.row_idx_.push_back(other.row_idx_[q]);
        s.values_.push_back(other.values_[q++]);
      } else {
        s.row_idx_.push_back(row_idx_[p]);
        s.values_.push_back(values_[p++] + other.values_[q++]);
      }
    }
    s.col_ptr_[j + 1] = s.row_idx_.size();
  }
  return s;
}

SymmetricSparse SymmetricSparse::block(Index begin, Index end) const {
  if (begin < 0 || end > n_ || begin > end) throw InvalidArgument("invalid block range");
  SymmetricSparse b(end - begin);
  for (Index j = begin; j < end; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      if (row_idx_[p] >= begin) {
        b.row_idx_.push_back(row_idx_[p] - begin);
        b.values_.push_back(values_[p]);
      }
    }
    b.col_ptr_[j - begin + 1] = b.row_idx_.size();
  }
  return b;
}

SymmetricSparse permute_symmetric(const SymmetricSparse& a, std::span<const Index> old_to_new) {
  const Index n = a.size();
  if (static_cast<Index>(old_to_new.size()) != n) {
    throw InvalidArgument("permutation size does not match matrix");
  }
  if (!is_permutation(old_to_new)) throw InvalidArgument("not a permutation");

  SymmetricSparse c(n);
  std::vector<std::size_t> count(static_cast<std::size_t>(n) + 1, 0);
  for (Index j = 0; j < n; ++j) {
    for (std::size_t p = a.col_ptr_[j]; p < a.col_ptr_[j + 1]; ++p) {
      const Index i = a.row_idx_[p];
      ++count[static_cast<std::size_t>(std::max(old_to_new[i], old_to_new[j])) + 1];
    }
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  c.col_ptr_.assign(count.begin(), count.end());
  c.row_idx_.resize(a.nonzeros());
  c.values_.resize(a.nonzeros());
  std::vector<std::size_t> next(count.begin(), count.end() - 1);
  for (Index j = 0; j < n; ++j) {
    for (std::size_t p = a.col_ptr_[j]; p < a.col_ptr_[j + 1]; ++p) {
      const Index ni = old_to_new[a.row_idx_[p]];
      const Index nj = old_to_new[j];
      const std::size_t slot = next[static_cast<std::size_t>(std::max(ni, nj))]++;
      c.row_idx_[slot] = std::min(ni, nj);
      c.values_[slot] = a.values_[p];
    }
  }
  std::vector<std::pair<Index, double>> column;
  for (Index j = 0; j < n; ++j) {
    const std::size_t begin = c.col_ptr_[j], end = c.col_ptr_[j + 1];
    column.clear();
    for (std::size_t p = begin; p < end; ++p) column.emplace_back(c.row_idx_[p], c.values_[p]);
    std::sort(column.begin(), column.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t p = begin; p < end; ++p) {
      c.row_idx_[p] = column[p - begin].first;
      c.values_[p] = column[p - begin].second;
    }
  }
  return c;
}

std::vector<Index> invert_permutation(std::span<const Index> perm) {
  std::vector<Index> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<Index>(i);
  return inv;
}

bool is_permutation(std::span<const Index> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (Index p : perm) {
    if (p < 0 || p >= static_cast<Index>(perm.size()) || seen[static_cast<std::size_t>(p)]) return false;
    seen[static_cast<std::size_t>(p)] = true;
  }
  return true;
}

void write_matrix_market(std::ostream& out, const SymmetricSparse& a) {
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.size() << ' ' << a.size() << ' ' << a.nonzeros() << '\n';
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  const auto v = a.values();
  char buffer[64];
  // Lower-triangle convention of the format: row >= col.
  for (Index j = 0; j < a.size(); ++j) {
    for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", v[p]);
      out << j + 1 << ' ' << ri[p] + 1 << ' ' << buffer << '\n';
    }
  }
}

}  // namespace schurpd

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "schurpd/collision.hpp"
#include "schurpd/common.hpp"
#include "schurpd/mesh.hpp"
#include "schurpd/sparse_matrix.hpp"

namespace schurpd {

/// Split of the nodes into collision-safe x1 (new indices [0, n1)) and
/// collision-prone x2 (new indices [n1, n)), with x2 the vertex union of the
/// elements that own proxies.
struct Partition {
  std::vector<Index> perm;   // old -> new
  std::vector<Index> order;  // new -> old
  Index n1 = 0;
  Index n2 = 0;
  std::vector<Index> e_alpha;
  std::vector<Index> e_beta;
  std::vector<std::uint8_t> is_beta;  // per element

  Index n() const { return n1 + n2; }
  bool prone(Index node) const { return perm[static_cast<std::size_t>(node)] >= n1; }
  /// Index within x2, or -1 for a collision-safe node.
  Index local2(Index node) const {
    const Index p = perm[static_cast<std::size_t>(node)];
    return p >= n1 ? p - n1 : -1;
  }
  /// Original node of x2 entry i.
  Index node2(Index i) const { return order[static_cast<std::size_t>(n1 + i)]; }
};

/// Both classes keep ascending original order.
Partition classify(const TetMesh& mesh, std::span<const CollisionProxy> proxies);

/// P K P^T with x1 first.
SymmetricSparse permute_matrix(const SymmetricSparse& k, const Partition& p);

struct PartitionDiagnostics {
  Index nodes = 0;
  Index n1 = 0;
  Index n2 = 0;
  Index alpha_elements = 0;
  Index beta_elements = 0;
  std::size_t constrained_fill = 0;    // factor nonzeros, x2 forced last
  std::size_t unconstrained_fill = 0;  // factor nonzeros, free ordering
  std::vector<std::string> warnings;

  double prone_fraction() const { return nodes ? static_cast<double>(n2) / nodes : 0.0; }
  double fill_ratio() const {
    return unconstrained_fill ? static_cast<double>(constrained_fill) / unconstrained_fill : 1.0;
  }
  std::string report() const;
};

/// Checks that beta-element stiffness lies in the (2,2) block and that every
/// proxy's support is inside x2; throws StructuralError naming the first
/// offender. Fill statistics are computed only when `measure_fill` is set.
PartitionDiagnostics validate(const TetMesh& mesh, const SymmetricSparse& k_permuted,
                              const Partition& p, std::span<const CollisionProxy> proxies,
                              bool measure_fill = true);

}  // namespace schurpd

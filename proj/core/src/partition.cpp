#include "schurpd/partition.hpp"

#include <cstdio>
#include <sstream>

#include "schurpd/partial_cholesky.hpp"

namespace schurpd {

Partition classify(const TetMesh& mesh, std::span<const CollisionProxy> proxies) {
  const Index n = mesh.num_nodes();
  const Index ne = mesh.num_elements();
  Partition p;
  p.is_beta.assign(static_cast<std::size_t>(ne), 0);
  for (const auto& proxy : proxies) {
    if (proxy.element < 0 || proxy.element >= ne) {
      throw InvalidArgument("proxy references element " + std::to_string(proxy.element) +
                            " outside the mesh");
    }
    p.is_beta[static_cast<std::size_t>(proxy.element)] = 1;
  }
  std::vector<std::uint8_t> prone(static_cast<std::size_t>(n), 0);
  for (Index e = 0; e < ne; ++e) {
    if (p.is_beta[static_cast<std::size_t>(e)]) {
      p.e_beta.push_back(e);
      for (Index v : mesh.tets[static_cast<std::size_t>(e)]) prone[static_cast<std::size_t>(v)] = 1;
    } else {
      p.e_alpha.push_back(e);
    }
  }
  p.perm.assign(static_cast<std::size_t>(n), -1);
  p.order.reserve(static_cast<std::size_t>(n));
  for (int pass = 0; pass < 2; ++pass) {
    for (Index v = 0; v < n; ++v) {
      if (prone[static_cast<std::size_t>(v)] == pass) {
        p.perm[static_cast<std::size_t>(v)] = static_cast<Index>(p.order.size());
        p.order.push_back(v);
      }
    }
    if (pass == 0) p.n1 = static_cast<Index>(p.order.size());
  }
  p.n2 = n - p.n1;
  return p;
}

SymmetricSparse permute_matrix(const SymmetricSparse& k, const Partition& p) {
  if (k.size() != p.n()) throw InvalidArgument("matrix and partition sizes differ");
  return permute_symmetric(k, p.perm);
}

std::string PartitionDiagnostics::report() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "nodes %d  safe %d  prone %d (%.2f%%)\n", nodes, n1, n2,
                100.0 * prone_fraction());
  out << line;
  std::snprintf(line, sizeof(line), "elements alpha %d  beta %d\n", alpha_elements, beta_elements);
  out << line;
  if (unconstrained_fill > 0) {
    std::snprintf(line, sizeof(line), "factor nonzeros constrained %zu  free %zu  ratio %.4f\n",
                  constrained_fill, unconstrained_fill, fill_ratio());
    out << line;
  }
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  return out.str();
}

PartitionDiagnostics validate(const TetMesh& mesh, const SymmetricSparse& k_permuted,
                              const Partition& p, std::span<const CollisionProxy> proxies,
                              bool measure_fill) {
  if (k_permuted.size() != p.n() || mesh.num_nodes() != p.n()) {
    throw StructuralError("partition size does not match the system");
  }
  for (Index e : p.e_beta) {
    for (Index v : mesh.tets[static_cast<std::size_t>(e)]) {
      if (!p.prone(v)) {
        throw StructuralError("beta element " + std::to_string(e) + " has collision-safe node " +
                              std::to_string(v) + " outside the (2,2) block");
      }
    }
  }
  for (std::size_t j = 0; j < proxies.size(); ++j) {
    const Index e = proxies[j].element;
    if (e < 0 || e >= mesh.num_elements() || !p.is_beta[static_cast<std::size_t>(e)]) {
      throw StructuralError("proxy " + std::to_string(j) + " lies in element " + std::to_string(e) +
                            " which is not collision-prone");
    }
    const auto& tet = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) {
      if (proxies[j].weights[static_cast<std::size_t>(a)] != 0.0 && !p.prone(tet[a])) {
        throw StructuralError("proxy " + std::to_string(j) + " couples collision-safe node " +
                              std::to_string(tet[a]));
      }
    }
  }

  PartitionDiagnostics d;
  d.nodes = p.n();
  d.n1 = p.n1;
  d.n2 = p.n2;
  d.alpha_elements = static_cast<Index>(p.e_alpha.size());
  d.beta_elements = static_cast<Index>(p.e_beta.size());
  if (d.prone_fraction() > 0.10) {
    d.warnings.push_back("collision-prone nodes exceed 10% of the mesh");
  }
  if (measure_fill) {
    const auto constrained = fill_ordering(k_permuted, p.n1);
    d.constrained_fill =
        cholesky_factor_nonzeros(permute_symmetric(k_permuted, invert_permutation(constrained)));
    const auto free_order = fill_ordering(k_permuted, p.n());
    d.unconstrained_fill =
        cholesky_factor_nonzeros(permute_symmetric(k_permuted, invert_permutation(free_order)));
  }
  return d;
}

}  // namespace schurpd

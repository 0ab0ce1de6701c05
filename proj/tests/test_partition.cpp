#include <gtest/gtest.h>

#include <set>

#include "schurpd/material.hpp"
#include "schurpd/partition.hpp"
#include "schurpd/sparse_matrix.hpp"

using namespace schurpd;

namespace {

struct Beam {
  TetMesh mesh = build_box_lattice(Vec3(10, 0.5, 0.5), {40, 2, 2});
  std::vector<CollisionProxy> proxies;
  SymmetricSparse k;
  explicit Beam(double x_max = 0.25) {
    const auto region = select_nodes(mesh, [&](const Vec3& p) { return p.z() > 0.49 && p.x() < x_max + 1e-9; });
    proxies = scatter_proxies(mesh, region, 1, 1.0);
    MaterialParams m;
    k = assemble_stiffness(mesh, compute_rest_data(mesh), m);
  }
};

}  // namespace

TEST(Partition, ClassifyMatchesElementUnion) {
  Beam b;
  const Partition p = classify(b.mesh, b.proxies);

  std::set<Index> beta, prone;
  for (const auto& q : b.proxies) beta.insert(q.element);
  for (Index e : beta)
    for (Index v : b.mesh.tets[e]) prone.insert(v);

  EXPECT_EQ(std::vector<Index>(beta.begin(), beta.end()), p.e_beta);
  EXPECT_EQ(p.e_alpha.size() + p.e_beta.size(), b.mesh.tets.size());
  EXPECT_EQ(p.n2, static_cast<Index>(prone.size()));
  EXPECT_EQ(p.n(), b.mesh.num_nodes());
  for (Index i = 0; i < p.n2; ++i) {
    EXPECT_TRUE(prone.count(p.node2(i)));
    EXPECT_EQ(p.local2(p.node2(i)), i);
    if (i > 0) EXPECT_LT(p.node2(i - 1), p.node2(i));
  }
  for (Index i = 1; i < p.n1; ++i) EXPECT_LT(p.order[i - 1], p.order[i]);
  for (Index v = 0; v < p.n(); ++v) {
    EXPECT_EQ(p.order[p.perm[v]], v);
    EXPECT_EQ(p.prone(v), prone.count(v) == 1);
  }
  for (Index e = 0; e < b.mesh.num_elements(); ++e) EXPECT_EQ(p.is_beta[e] != 0, beta.count(e) == 1);
}

TEST(Partition, PermuteAndValidate) {
  Beam b;
  const Partition p = classify(b.mesh, b.proxies);
  const SymmetricSparse kp = permute_matrix(b.k, p);
  const Eigen::MatrixXd dk = b.k.to_dense();
  for (Index i = 0; i < p.n(); ++i)
    for (Index j = 0; j < p.n(); ++j) ASSERT_EQ(kp.coeff(p.perm[i], p.perm[j]), dk(i, j));

  const PartitionDiagnostics d = validate(b.mesh, kp, p, b.proxies);
  EXPECT_EQ(d.nodes, p.n());
  EXPECT_EQ(d.n2, p.n2);
  EXPECT_EQ(d.beta_elements, static_cast<Index>(p.e_beta.size()));
  EXPECT_GT(d.constrained_fill, 0u);
  EXPECT_GT(d.unconstrained_fill, 0u);
  EXPECT_NE(d.report().find("prone"), std::string::npos);
  EXPECT_DOUBLE_EQ(d.prone_fraction(), static_cast<double>(p.n2) / p.n());

  const PartitionDiagnostics quick = validate(b.mesh, kp, p, b.proxies, false);
  EXPECT_EQ(quick.constrained_fill, 0u);
}

TEST(Partition, WarnsWhenManyNodesAreProne) {
  Beam small(0.25), large(10.0);
  const Partition ps = classify(small.mesh, small.proxies);
  const Partition pl = classify(large.mesh, large.proxies);
  ASSERT_LT(ps.n2 * 10, ps.n());
  ASSERT_GT(pl.n2 * 10, pl.n());
  EXPECT_TRUE(validate(small.mesh, permute_matrix(small.k, ps), ps, small.proxies, false).warnings.empty());
  EXPECT_FALSE(validate(large.mesh, permute_matrix(large.k, pl), pl, large.proxies, false).warnings.empty());
}

TEST(Partition, StructuralViolations) {
  Beam b;
  Partition p = classify(b.mesh, b.proxies);
  // Move one prone node into x1: both the beta check and the proxy support
  // check must notice.
  const Index victim = p.node2(0);
  const Index swap_with = p.order[0];
  std::swap(p.perm[victim], p.perm[swap_with]);
  std::swap(p.order[p.perm[victim]], p.order[p.perm[swap_with]]);
  EXPECT_THROW(validate(b.mesh, permute_matrix(b.k, p), p, b.proxies, false), StructuralError);

  std::vector<CollisionProxy> bad = b.proxies;
  bad[0].element = b.mesh.num_elements();
  EXPECT_THROW(classify(b.mesh, bad), InvalidArgument);
}

TEST(Partition, NoProxies) {
  Beam b;
  const Partition p = classify(b.mesh, {});
  EXPECT_EQ(p.n2, 0);
  EXPECT_TRUE(p.e_beta.empty());
  EXPECT_EQ(permute_matrix(b.k, p), b.k);
}

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <random>

#include "schurpd/collision.hpp"
#include "schurpd/partition.hpp"
#include "schurpd/sparse_matrix.hpp"

using namespace schurpd;

namespace {

double box_sdf(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  const Vec3 c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const Vec3 q = (p - c).cwiseAbs() - h;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

Collider make(Shape s, RigidTransform t = {}) {
  Collider c;
  c.shape = std::move(s);
  c.transform = t;
  return c;
}

struct Fixture {
  TetMesh mesh = build_box_lattice(Vec3(1, 1, 0.5), {4, 4, 2});
  std::vector<CollisionProxy> proxies;
  Fixture() {
    const auto top = select_nodes(mesh, [](const Vec3& p) { return p.z() > 0.49; });
    proxies = scatter_proxies(mesh, top, 2, 50.0);
  }
};

}  // namespace

TEST(Transform, AboutAxis) {
  const Vec3 pivot(1, 2, 3);
  const auto t = RigidTransform::about_axis(Vec3(0, 0, 2), pivot, M_PI / 2);
  EXPECT_LT((t.apply(pivot) - pivot).norm(), 1e-14);
  EXPECT_LT((t.apply(pivot + Vec3(1, 0, 0)) - (pivot + Vec3(0, 1, 0))).norm(), 1e-14);
  EXPECT_LT((t.apply(pivot + Vec3(0, 0, 5)) - (pivot + Vec3(0, 0, 5))).norm(), 1e-14);
  const Vec3 p(0.3, -0.2, 4.0);
  EXPECT_LT((t.apply_inverse(t.apply(p)) - p).norm(), 1e-14);
  const auto s = RigidTransform::about_axis(Vec3::UnitX(), Vec3::Zero(), 0.4);
  EXPECT_LT(((t * s).apply(p) - t.apply(s.apply(p))).norm(), 1e-14);
}

TEST(Shapes, AnalyticDistances) {
  double phi;
  Vec3 g;
  const Collider plane = make(HalfSpace{Vec3(0, 0, 1), Vec3(0, 0, -1)});
  ASSERT_TRUE(plane.signed_distance(Vec3(5, 5, 1.25), phi, g));
  EXPECT_DOUBLE_EQ(phi, -0.25);
  EXPECT_LT((g - Vec3(0, 0, -1)).norm(), 1e-15);

  const Collider ball = make(Sphere{Vec3(1, 0, 0), 0.5});
  ASSERT_TRUE(ball.signed_distance(Vec3(1, 0.2, 0), phi, g));
  EXPECT_NEAR(phi, -0.3, 1e-15);
  EXPECT_LT((g - Vec3(0, 1, 0)).norm(), 1e-15);

  const Collider cap = make(Capsule{Vec3(0, 0, 0), Vec3(2, 0, 0), 0.5});
  ASSERT_TRUE(cap.signed_distance(Vec3(1, 0, 0.75), phi, g));
  EXPECT_NEAR(phi, 0.25, 1e-15);
  ASSERT_TRUE(cap.signed_distance(Vec3(3, 0, 0), phi, g));
  EXPECT_NEAR(phi, 0.5, 1e-15);
  EXPECT_LT((g - Vec3(1, 0, 0)).norm(), 1e-15);

  // The same sphere moved by a transform.
  const auto t = RigidTransform::about_axis(Vec3::UnitZ(), Vec3::Zero(), M_PI / 2);
  const Collider moved = make(Sphere{Vec3(1, 0, 0), 0.5}, t);
  ASSERT_TRUE(moved.signed_distance(Vec3(0, 1.2, 0), phi, g));
  EXPECT_NEAR(phi, -0.3, 1e-14);
  EXPECT_LT((g - Vec3(0, 1, 0)).norm(), 1e-14);
}

TEST(Shapes, GridLevelsetOfBox) {
  const Vec3 lo(0, 0, 0), hi(1, 0.5, 0.5);
  const GridLevelset grid = GridLevelset::sample_box(lo, hi, 0.05, 0.2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.15, 1.15);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p(u(rng), 0.5 * u(rng), 0.5 * u(rng));
    ASSERT_TRUE(grid.contains(p));
    // Trilinear interpolation of a 1-Lipschitz function errs by at most
    // one half of a cell diagonal.
    EXPECT_NEAR(grid.value(p, nullptr), box_sdf(p, lo, hi), 0.5 * std::sqrt(3.0) * 0.05);
  }
  // Away from edges the field is linear and reproduced exactly.
  Vec3 g;
  const Vec3 p(0.5, 0.25, -0.08);
  EXPECT_NEAR(grid.value(p, &g), 0.08, 1e-12);
  EXPECT_LT((g - Vec3(0, 0, -1)).norm(), 1e-9);
  EXPECT_FALSE(grid.contains(Vec3(0.5, 0.25, 2.0)));

  double phi;
  const Collider c = make(std::make_shared<const GridLevelset>(grid));
  EXPECT_FALSE(c.signed_distance(Vec3(0.5, 0.25, 2.0), phi, g));
}

TEST(Shapes, LevelsetTextFormat) {
  const GridLevelset g = GridLevelset::parse("# ramp\nlevelset 2 2 2 0 0 0 1\n0 1 0 1\n0 1 0 1\n");
  EXPECT_EQ(g.dims(), (std::array<int, 3>{2, 2, 2}));
  EXPECT_NEAR(g.value(Vec3(0.25, 0.5, 0.5), nullptr), 0.25, 1e-15);
  EXPECT_THROW(GridLevelset::parse("levelset 2 2 2 0 0 0 1\n0 1 0\n"), ParseError);
  EXPECT_THROW(GridLevelset::parse("grid 2 2 2 0 0 0 1\n"), ParseError);
  try {
    GridLevelset::parse("levelset 2 2 2 0 0 0 1\n0 1 0 1\n0 1 x 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Proxies, ScatterOnSurface) {
  Fixture f;
  std::size_t top_tris = 0;
  for (const auto& t : f.mesh.surface_tris) {
    bool all = true;
    for (Index v : t) all = all && f.mesh.rest_positions[v].z() > 0.49;
    top_tris += all;
  }
  ASSERT_EQ(f.proxies.size(), 2 * top_tris);
  const Positions x = rest_positions(f.mesh);
  for (const auto& p : f.proxies) {
    double sum = 0;
    for (double w : p.weights) {
      EXPECT_GE(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_NEAR(proxy_position(f.mesh, p, x).z(), 0.5, 1e-14);
    EXPECT_EQ(p.stiffness, 50.0);
  }
  const std::vector<bool> none(f.mesh.num_nodes(), false);
  EXPECT_THROW(scatter_proxies(f.mesh, none, 1, 1.0), InvalidArgument);
  const std::vector<bool> all(f.mesh.num_nodes(), true);
  EXPECT_THROW(scatter_proxies(f.mesh, all, 5, 1.0), InvalidArgument);
}

TEST(Proxies, DetectProjectsOntoDeepest) {
  Fixture f;
  const Positions x = rest_positions(f.mesh);
  std::vector<Collider> cs{make(HalfSpace{Vec3(0, 0, 0.45), Vec3(0, 0, -1)}),
                           make(HalfSpace{Vec3(0, 0, 0.40), Vec3(0, 0, -1)})};
  cs.push_back(make(HalfSpace{Vec3(0, 0, 0.0), Vec3(0, 0, -1)}));
  cs.back().enabled = false;
  const ActiveSet a = detect(f.mesh, f.proxies, x, cs);
  ASSERT_EQ(a.size(), static_cast<Index>(f.proxies.size()));
  EXPECT_EQ(a.count(), a.size());
  for (Index j = 0; j < a.size(); ++j) {
    EXPECT_NEAR(a.depth[j], 0.1, 1e-14);
    EXPECT_NEAR(a.target[j].z(), 0.4, 1e-14);
  }
  EXPECT_NEAR(a.max_depth(), 0.1, 1e-14);
  EXPECT_NEAR(max_penetration(f.mesh, f.proxies, x, cs), 0.1, 1e-14);

  const std::vector<Collider> clear{make(HalfSpace{Vec3(0, 0, 0.6), Vec3(0, 0, -1)})};
  EXPECT_EQ(detect(f.mesh, f.proxies, x, clear), ActiveSet::empty(a.size()));
  EXPECT_EQ(max_penetration(f.mesh, f.proxies, x, clear), 0.0);
}

TEST(Proxies, ForcesAndMatrixAreEnergyDerivatives) {
  Fixture f;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.02);
  Positions x = rest_positions(f.mesh);
  for (Index i = 0; i < x.rows(); ++i)
    for (int c = 0; c < 3; ++c) x(i, c) += n(rng);
  const std::vector<Collider> cs{make(Sphere{Vec3(0.5, 0.5, 0.9), 0.5})};
  const ActiveSet a = detect(f.mesh, f.proxies, x, cs);
  ASSERT_GT(a.count(), 3);
  ASSERT_LT(a.count(), a.size());

  const Positions force = collision_forces(f.mesh, f.proxies, a, x);
  const double h = 1e-6;
  for (Index i = 0; i < x.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      Positions xp = x, xm = x;
      xp(i, c) += h;
      xm(i, c) -= h;
      const double g =
          (collision_energy(f.mesh, f.proxies, a, xp) - collision_energy(f.mesh, f.proxies, a, xm)) / (2 * h);
      EXPECT_NEAR(-g, force(i, c), 1e-6);
    }
  }

  // The energy is quadratic in x for fixed targets: E(x) = 1/2 x^T M x - ...,
  // so M u equals the force change along u.
  const Eigen::MatrixXd m = assemble_collision_matrix(f.mesh, f.proxies, a).to_dense();
  Positions u = Positions::Random(x.rows(), 3);
  const Positions df = collision_forces(f.mesh, f.proxies, a, x + u) - force;
  EXPECT_LT((m * u + df).norm(), 1e-10 * (1 + df.norm()));

  const Partition p = classify(f.mesh, f.proxies);
  const Eigen::MatrixXd c22 = assemble_c22(f.mesh, f.proxies, a, p).to_dense();
  ASSERT_EQ(c22.rows(), p.n2);
  for (Index i = 0; i < p.n2; ++i)
    for (Index j = 0; j < p.n2; ++j) EXPECT_EQ(c22(i, j), m(p.node2(i), p.node2(j)));
}

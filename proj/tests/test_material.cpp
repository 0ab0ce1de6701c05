#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <numeric>
#include <random>

#include "schurpd/material.hpp"
#include "schurpd/sparse_matrix.hpp"

using namespace schurpd;

namespace {

Mat3 random_matrix(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i) = n(rng);
  return m;
}

bool is_rotation(const Mat3& r, double tol = 1e-12) {
  return (r.transpose() * r - Mat3::Identity()).norm() < tol && std::abs(r.determinant() - 1.0) < tol;
}

MaterialParams biphasic() {
  MaterialParams p;
  p.mu = 2.0;
  p.mu_prime = 30.0;
  p.sigma_min = 0.9;
  p.sigma_max = 1.1;
  return p;
}

}  // namespace

TEST(Material, SignedSvdReconstructs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat3 f = random_matrix(rng);
    const SignedSvd s = signed_svd(f);
    EXPECT_TRUE(is_rotation(s.u, 1e-10));
    EXPECT_TRUE(is_rotation(s.v, 1e-10));
    EXPECT_LT((s.u * s.sigma.asDiagonal() * s.v.transpose() - f).norm(), 1e-10 * (1 + f.norm()));
    EXPECT_GE(s.sigma(0), s.sigma(1));
    EXPECT_GE(s.sigma(1), std::abs(s.sigma(2)) - 1e-12);
    EXPECT_EQ(s.sigma(2) < 0, f.determinant() < 0);
  }
}

TEST(Material, PolarRotation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat3 f = random_matrix(rng);
    const Mat3 r = polar_rotation(f);
    EXPECT_TRUE(is_rotation(r, 1e-10));
    // First-order optimality: R^T F is symmetric.
    const Mat3 s = r.transpose() * f;
    EXPECT_LT((s - s.transpose()).norm(), 1e-10);
  }
  EXPECT_EQ(polar_rotation(Mat3::Zero()), Mat3::Identity());
  const Mat3 rot = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  EXPECT_LT((polar_rotation(rot * Vec3(1.5, 0.8, 0.3).asDiagonal()) - rot).norm(), 1e-12);
}

TEST(Material, BiphasicProjection) {
  const MaterialParams p = biphasic();
  const Mat3 rot = Eigen::AngleAxisd(-1.1, Vec3(0.2, -1, 0.4).normalized()).toRotationMatrix();
  // Inside the band the projection is the identity map.
  const Mat3 inside = rot * Vec3(1.05, 0.95, 1.0).asDiagonal();
  EXPECT_LT((biphasic_projection(inside, p) - inside).norm(), 1e-12);
  // Outside the band singular values clamp individually.
  const Mat3 f = rot * Vec3(1.4, 1.0, 0.5).asDiagonal();
  const SignedSvd s = signed_svd(biphasic_projection(f, p));
  EXPECT_NEAR(s.sigma(0), 1.1, 1e-12);
  EXPECT_NEAR(s.sigma(1), 1.0, 1e-12);
  EXPECT_NEAR(s.sigma(2), 0.9, 1e-12);
  // An inverted F has a negative signed value, which clamps up to sigma_min.
  Mat3 inv = f;
  inv.col(2) *= -1.0;
  const Mat3 q = biphasic_projection(inv, p);
  EXPECT_GT(q.determinant(), 0.0);
  EXPECT_NEAR(signed_svd(q).sigma(2), 0.9, 1e-12);
}

TEST(Material, EnergyAndStressAtRest) {
  const MaterialParams p = biphasic();
  const Mat3 rot = Eigen::AngleAxisd(0.4, Vec3::UnitY()).toRotationMatrix();
  EXPECT_NEAR(energy_density(rot, polar_rotation(rot), biphasic_projection(rot, p), p), 0.0, 1e-24);
  EXPECT_LT(piola_stress(rot, polar_rotation(rot), biphasic_projection(rot, p), p).norm(), 1e-12);
}

TEST(Material, StressIsEnergyDerivative) {
  // With R and Q fixed the density is quadratic in F; check dPsi/dF = P.
  const MaterialParams p = biphasic();
  std::mt19937_64 rng(3);
  const Mat3 f = Mat3::Identity() + random_matrix(rng, 0.3);
  const Mat3 r = polar_rotation(f);
  const Mat3 q = biphasic_projection(f, p);
  const Mat3 stress = piola_stress(f, r, q, p);
  const double h = 1e-6;
  for (int i = 0; i < 9; ++i) {
    Mat3 fp = f, fm = f;
    fp(i) += h;
    fm(i) -= h;
    const double d = (energy_density(fp, r, q, p) - energy_density(fm, r, q, p)) / (2 * h);
    EXPECT_NEAR(d, stress(i), 1e-7 * (1 + std::abs(stress(i))));
  }
}

TEST(Material, ShapeGradients) {
  const TetMesh m = build_box_lattice(Vec3(1, 2, 1), {1, 2, 1});
  const RestData rest = compute_rest_data(m);
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto g = shape_gradients(rest, e);
    EXPECT_LT(g.colwise().sum().norm(), 1e-12);
    // Gradients of the linear shape functions reproduce the identity.
    Mat3 id = Mat3::Zero();
    for (int k = 0; k < 4; ++k) id += m.rest_positions[m.tets[e][k]] * g.row(k);
    EXPECT_LT((id - Mat3::Identity()).norm(), 1e-12);
  }
}

TEST(Material, ForcesSumToZeroAndMatchFd) {
  const MaterialParams p = biphasic();
  const TetMesh m = build_box_lattice(Vec3(1, 1, 1), {2, 1, 1});
  const RestData rest = compute_rest_data(m);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.05);
  Positions x = rest_positions(m);
  for (Index i = 0; i < x.rows(); ++i)
    for (int c = 0; c < 3; ++c) x(i, c) += n(rng);

  std::vector<Index> all(m.num_elements());
  std::iota(all.begin(), all.end(), 0);
  RotationCache rot = RotationCache::identity(m.num_elements(), true);
  for (Index e = 0; e < m.num_elements(); ++e) {
    const Mat3 f = deformation_gradient(m, rest, x, e);
    rot.r[e] = polar_rotation(f);
    rot.q[e] = biphasic_projection(f, p);
  }
  Positions f = Positions::Zero(x.rows(), 3);
  accumulate_elastic_forces(m, rest, x, rot, p, all, f);
  EXPECT_LT(f.colwise().sum().norm(), 1e-10);

  const double h = 1e-6;
  for (Index i = 0; i < x.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      Positions xp = x, xm = x;
      xp(i, c) += h;
      xm(i, c) -= h;
      const double g = (elastic_energy(m, rest, xp, rot, p) - elastic_energy(m, rest, xm, rot, p)) / (2 * h);
      EXPECT_NEAR(-g, f(i, c), 1e-6 * (1 + f.norm()));
    }
  }
}

TEST(Material, StiffnessIsScalarLaplacian) {
  MaterialParams p;
  p.mu = 3.0;
  const TetMesh m = build_box_lattice(Vec3(1, 1, 1), {2, 2, 1});
  const RestData rest = compute_rest_data(m);
  const Eigen::MatrixXd k = assemble_stiffness(m, rest, p).to_dense();
  EXPECT_LT((k - k.transpose()).norm(), 1e-12);
  EXPECT_LT(k.rowwise().sum().norm(), 1e-10 * k.norm());
  // Dirichlet-like quadratic form of the linear field u = X_x equals 2 mu |Omega|.
  Eigen::VectorXd u(m.num_nodes());
  for (Index i = 0; i < m.num_nodes(); ++i) u(i) = m.rest_positions[i].x();
  EXPECT_NEAR(u.dot(k * u), 2.0 * p.mu * 1.0, 1e-10);

  const std::vector<Index> half{0, 1, 2};
  const Eigen::MatrixXd k_part = assemble_stiffness(m, rest, p, std::span<const Index>(half)).to_dense();
  Eigen::MatrixXd k_ref = Eigen::MatrixXd::Zero(m.num_nodes(), m.num_nodes());
  for (Index e : half) {
    const auto g = shape_gradients(rest, e);
    const Eigen::Matrix4d ke = 2.0 * p.mu * rest.volume[e] * g * g.transpose();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) k_ref(m.tets[e][a], m.tets[e][b]) += ke(a, b);
  }
  EXPECT_LT((k_part - k_ref).norm(), 1e-12);
}

TEST(Material, CorotatedEnergyRigidInvariant) {
  MaterialParams p;
  p.mu = 1.5;
  const TetMesh m = build_box_lattice(Vec3(1, 1, 1), {1, 1, 1});
  const RestData rest = compute_rest_data(m);
  const Mat3 r = Eigen::AngleAxisd(2.0, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  Positions x = rest_positions(m);
  Positions y = x;
  for (Index i = 0; i < x.rows(); ++i) y.row(i) = (r * x.row(i).transpose() + Vec3(4, 5, 6)).transpose();
  EXPECT_NEAR(corotated_energy(m, rest, y, p), 0.0, 1e-20);
  // Uniform stretch by s: F = s I, energy density mu * 3 (s - 1)^2 over unit volume.
  y = 1.2 * x;
  EXPECT_NEAR(corotated_energy(m, rest, y, p), 1.5 * 3 * 0.04, 1e-12);
}

TEST(Material, Validation) {
  MaterialParams p;
  EXPECT_NO_THROW(p.validate());
  p.sigma_min = 0.9;
  p.sigma_max = 0.8;
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma_min"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("sigma_max"), std::string::npos);
  }
  p = MaterialParams{};
  p.lambda = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = MaterialParams{};
  p.mu = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

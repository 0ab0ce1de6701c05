#include "schurpd/material.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>

#include "schurpd/sparse_matrix.hpp"

namespace schurpd {

void MaterialParams::validate() const {
  if (!(mu > 0.0)) throw ConfigError("material.mu must be positive");
  if (lambda != 0.0) throw ConfigError("material.lambda must be 0 (volumetric term unsupported)");
  if (!(mu_prime >= 0.0)) throw ConfigError("material.mu_prime must be non-negative");
  if (sigma_min > sigma_max) {
    throw ConfigError("material.sigma_min must not exceed material.sigma_max");
  }
  if (!(sigma_min > 0.0 && sigma_min <= 1.0)) throw ConfigError("material.sigma_min must lie in (0, 1]");
  if (!(sigma_max >= 1.0)) throw ConfigError("material.sigma_max must be at least 1");
}

RotationCache RotationCache::identity(Index elements, bool biphasic) {
  RotationCache cache;
  cache.r.assign(static_cast<std::size_t>(elements), Mat3::Identity());
  if (biphasic) cache.q.assign(static_cast<std::size_t>(elements), Mat3::Identity());
  return cache;
}

SignedSvd signed_svd(const Mat3& f) {
  Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SignedSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  // Singular values come sorted in decreasing order; index 2 is the smallest.
  if (out.u.determinant() < 0.0) {
    out.u.col(2) *= -1.0;
    out.sigma[2] *= -1.0;
  }
  if (out.v.determinant() < 0.0) {
    out.v.col(2) *= -1.0;
    out.sigma[2] *= -1.0;
  }
  return out;
}

Mat3 polar_rotation(const Mat3& f) {
  if (f.isZero(0.0)) return Mat3::Identity();
  const SignedSvd svd = signed_svd(f);
  return svd.u * svd.v.transpose();
}

Mat3 biphasic_projection(const Mat3& f, const MaterialParams& params) {
  const SignedSvd svd = signed_svd(f);
  Vec3 clamped;
  for (int i = 0; i < 3; ++i) clamped[i] = std::clamp(svd.sigma[i], params.sigma_min, params.sigma_max);
  return svd.u * clamped.asDiagonal() * svd.v.transpose();
}

double energy_density(const Mat3& f, const Mat3& r, const std::optional<Mat3>& q,
                      const MaterialParams& params) {
  double psi = params.mu * (f - r).squaredNorm();
  if (q) psi += params.mu_prime * (f - *q).squaredNorm();
  return psi;
}

Mat3 piola_stress(const Mat3& f, const Mat3& r, const std::optional<Mat3>& q,
                  const MaterialParams& params) {
  Mat3 p = 2.0 * params.mu * (f - r);
  if (q) p += 2.0 * params.mu_prime * (f - *q);
  return p;
}

Eigen::Matrix<double, 4, 3> shape_gradients(const RestData& rest, Index e) {
  const Mat3& dinv = rest.dm_inverse[static_cast<std::size_t>(e)];
  Eigen::Matrix<double, 4, 3> g;
  g.bottomRows<3>() = dinv;
  g.row(0) = -dinv.colwise().sum();
  return g;
}

std::array<Vec3, 4> element_forces(const TetMesh& mesh, const RestData& rest, Index e,
                                   const Mat3& p) {
  (void)mesh;
  const std::size_t k = static_cast<std::size_t>(e);
  const Mat3 g = -rest.volume[k] * p * rest.dm_inverse[k].transpose();
  std::array<Vec3, 4> f;
  f[1] = g.col(0);
  f[2] = g.col(1);
  f[3] = g.col(2);
  f[0] = -(f[1] + f[2] + f[3]);
  return f;
}

SymmetricSparse assemble_stiffness(const TetMesh& mesh, const RestData& rest,
                                   const MaterialParams& params,
                                   std::optional<std::span<const Index>> elements) {
  const double weight = 2.0 * (params.mu + params.mu_prime);
  std::vector<Triplet> triplets;
  auto add = [&](Index e) {
    const auto g = shape_gradients(rest, e);
    const Eigen::Matrix4d ke = weight * rest.volume[static_cast<std::size_t>(e)] * g * g.transpose();
    const auto& t = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) {
      for (int b = a; b < 4; ++b) triplets.push_back({t[a], t[b], ke(a, b)});
    }
  };
  if (elements) {
    triplets.reserve(elements->size() * 10);
    for (Index e : *elements) add(e);
  } else {
    triplets.reserve(mesh.tets.size() * 10);
    for (Index e = 0; e < mesh.num_elements(); ++e) add(e);
  }
  return SymmetricSparse::from_triplets(mesh.num_nodes(), triplets);
}

double elastic_energy(const TetMesh& mesh, const RestData& rest, const Positions& x,
                      const RotationCache& rotations, const MaterialParams& params,
                      std::optional<std::span<const Index>> elements) {
  double total = 0.0;
  auto add = [&](Index e) {
    const Mat3 f = deformation_gradient(mesh, rest, x, e);
    total += rest.volume[static_cast<std::size_t>(e)] *
             energy_density(f, rotations.r[static_cast<std::size_t>(e)], rotations.q_of(e), params);
  };
  if (elements) {
    for (Index e : *elements) add(e);
  } else {
    for (Index e = 0; e < mesh.num_elements(); ++e) add(e);
  }
  return total;
}

double corotated_energy(const TetMesh& mesh, const RestData& rest, const Positions& x,
                        const MaterialParams& params) {
  double total = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Mat3 f = deformation_gradient(mesh, rest, x, e);
    std::optional<Mat3> q;
    if (params.biphasic()) q = biphasic_projection(f, params);
    total += rest.volume[static_cast<std::size_t>(e)] * energy_density(f, polar_rotation(f), q, params);
  }
  return total;
}

void accumulate_elastic_forces(const TetMesh& mesh, const RestData& rest, const Positions& x,
                               const RotationCache& rotations, const MaterialParams& params,
                               std::span<const Index> elements, Positions& forces) {
  for (Index e : elements) {
    const Mat3 f = deformation_gradient(mesh, rest, x, e);
    const Mat3 p = piola_stress(f, rotations.r[static_cast<std::size_t>(e)], rotations.q_of(e), params);
    const auto fe = element_forces(mesh, rest, e, p);
    const auto& t = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) forces.row(t[a]) += fe[static_cast<std::size_t>(a)].transpose();
  }
}

}  // namespace schurpd

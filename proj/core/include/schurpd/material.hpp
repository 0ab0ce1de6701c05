#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "schurpd/common.hpp"
#include "schurpd/mesh.hpp"

namespace schurpd {

class SymmetricSparse;

struct MaterialParams {
  double mu = 1.0;
  double lambda = 0.0;     // volumetric term is not supported; must stay 0
  double mu_prime = 0.0;   // 0 disables the bi-phasic term
  double sigma_min = 1.0;
  double sigma_max = 1.0;

  bool biphasic() const { return mu_prime > 0.0; }
  void validate() const;
};

/// Per-element projection variables of the local step. `q` is empty unless
/// the material is bi-phasic.
struct RotationCache {
  std::vector<Mat3> r;
  std::vector<Mat3> q;

  static RotationCache identity(Index elements, bool biphasic);
  std::optional<Mat3> q_of(Index e) const {
    if (q.empty()) return std::nullopt;
    return q[static_cast<std::size_t>(e)];
  }
};

/// F = U diag(sigma) V^T with U, V proper rotations. The smallest singular
/// value carries the sign of det(F).
struct SignedSvd {
  Mat3 u;
  Vec3 sigma;
  Mat3 v;
};
SignedSvd signed_svd(const Mat3& f);

/// Closest rotation to f in the Frobenius norm. The zero matrix maps to the
/// identity.
Mat3 polar_rotation(const Mat3& f);

/// U clamp(sigma) V^T over the signed SVD, clamping into [sigma_min, sigma_max].
Mat3 biphasic_projection(const Mat3& f, const MaterialParams& params);

double energy_density(const Mat3& f, const Mat3& r, const std::optional<Mat3>& q,
                      const MaterialParams& params);
Mat3 piola_stress(const Mat3& f, const Mat3& r, const std::optional<Mat3>& q,
                  const MaterialParams& params);

/// Nodal forces of element e for first Piola stress p; they sum to zero.
std::array<Vec3, 4> element_forces(const TetMesh& mesh, const RestData& rest, Index e,
                                   const Mat3& p);

/// Shape-function gradients of element e; row i is the gradient of node i.
Eigen::Matrix<double, 4, 3> shape_gradients(const RestData& rest, Index e);

/// The shared scalar diagonal block of the elastic Hessian: each element adds
/// 2 (mu + mu') Vol G G^T with G the shape-gradient matrix. When `elements`
/// is given only those elements are assembled.
SymmetricSparse assemble_stiffness(const TetMesh& mesh, const RestData& rest,
                                   const MaterialParams& params,
                                   std::optional<std::span<const Index>> elements = std::nullopt);

/// Sum of Vol_e * energy_density over the listed elements (all when empty).
double elastic_energy(const TetMesh& mesh, const RestData& rest, const Positions& x,
                      const RotationCache& rotations, const MaterialParams& params,
                      std::optional<std::span<const Index>> elements = std::nullopt);

/// Elastic energy with freshly projected rotations, i.e. the corotated energy.
double corotated_energy(const TetMesh& mesh, const RestData& rest, const Positions& x,
                        const MaterialParams& params);

/// Adds elastic nodal forces of the listed elements into `forces` (n x 3), in
/// element order.
void accumulate_elastic_forces(const TetMesh& mesh, const RestData& rest, const Positions& x,
                               const RotationCache& rotations, const MaterialParams& params,
                               std::span<const Index> elements, Positions& forces);

}  // namespace schurpd

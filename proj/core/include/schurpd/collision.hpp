#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "schurpd/common.hpp"
#include "schurpd/mesh.hpp"

namespace schurpd {

class SymmetricSparse;
struct Partition;

/// A point embedded in element `element` with barycentric `weights` over its
/// four nodes, carrying a penalty spring of stiffness `stiffness` (N/m).
struct CollisionProxy {
  Index element = 0;
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
  double stiffness = 0.0;
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_inverse(const Vec3& p) const { return rotation.transpose() * (p - translation); }

  /// Rotation by `angle` radians about the line through `pivot` along `axis`.
  static RigidTransform about_axis(const Vec3& axis, const Vec3& pivot, double angle);
  RigidTransform operator*(const RigidTransform& rhs) const;
};

// Shapes are described in collider-local coordinates and prohibit the region
// where their signed distance is negative.

/// Prohibits (p - point) . normal < 0.
struct HalfSpace {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

/// Prohibits the open ball.
struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Prohibits points closer than `radius` to the segment p0-p1.
struct Capsule {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::UnitX();
  double radius = 1.0;
};

/// Signed distance samples on a regular grid, x fastest. Values are
/// interpolated trilinearly; gradients come from central differences at the
/// nodes, interpolated the same way.
class GridLevelset {
 public:
  GridLevelset(const Vec3& origin, double spacing, const std::array<int, 3>& dims,
               std::vector<double> values);

  /// Samples the exact signed distance of an axis-aligned box, extending the
  /// grid by `padding` on every side.
  static GridLevelset sample_box(const Vec3& box_min, const Vec3& box_max, double spacing,
                                 double padding);
  /// Parses the `levelset nx ny nz ox oy oz spacing` text format.
  static GridLevelset parse(std::string_view text);
  static GridLevelset load(const std::filesystem::path& file);

  const Vec3& origin() const { return origin_; }
  double spacing() const { return spacing_; }
  const std::array<int, 3>& dims() const { return dims_; }
  const std::vector<double>& values() const { return values_; }

  bool contains(const Vec3& p) const;
  /// Interpolated value and gradient; p must be inside the grid.
  double value(const Vec3& p, Vec3* gradient) const;

 private:
  double at(int i, int j, int k) const;
  Vec3 node_gradient(int i, int j, int k) const;

  Vec3 origin_;
  double spacing_;
  std::array<int, 3> dims_;
  std::vector<double> values_;
};

using Shape = std::variant<HalfSpace, Sphere, Capsule, std::shared_ptr<const GridLevelset>>;

struct Collider {
  Shape shape;
  RigidTransform transform;  // local -> world for the current frame
  bool enabled = true;

  /// World-space signed distance and its gradient. Returns false when p lies
  /// outside a grid levelset; such points never collide.
  bool signed_distance(const Vec3& p, double& phi, Vec3& gradient) const;
};

/// Result of one detection pass.
struct ActiveSet {
  std::vector<std::uint8_t> active;
  std::vector<Vec3> target;
  std::vector<double> depth;  // -phi of the deepest collider, 0 if inactive

  Index size() const { return static_cast<Index>(active.size()); }
  Index count() const;
  double max_depth() const;
  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

  static ActiveSet empty(Index proxies);
};

/// Node mask from a rest-space predicate.
std::vector<bool> select_nodes(const TetMesh& mesh, const std::function<bool(const Vec3&)>& inside);

/// Places `per_element` proxies (1 to 4) on every surface triangle whose three
/// vertices are all in `region`: the centroid, then the points (2/3, 1/6, 1/6)
/// in vertex order.
std::vector<CollisionProxy> scatter_proxies(const TetMesh& mesh, const std::vector<bool>& region,
                                            int per_element, double stiffness);

Vec3 proxy_position(const TetMesh& mesh, const CollisionProxy& proxy, const Positions& x);

/// A proxy is active when any enabled collider has phi < 0 at it; its target is
/// the closest-point projection onto the deepest one.
ActiveSet detect(const TetMesh& mesh, std::span<const CollisionProxy> proxies, const Positions& x,
                 std::span<const Collider> colliders);

/// Largest penetration depth over all proxies (0 when none penetrate).
double max_penetration(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                       const Positions& x, std::span<const Collider> colliders);

double collision_energy(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                        const ActiveSet& active, const Positions& x);

/// Adds -W^T C (W x - t) into `forces` (n x 3).
void accumulate_collision_forces(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                                 const ActiveSet& active, const Positions& x, Positions& forces);
Positions collision_forces(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                           const ActiveSet& active, const Positions& x);

/// W^T C W in original node numbering (n x n).
SymmetricSparse assemble_collision_matrix(const TetMesh& mesh,
                                          std::span<const CollisionProxy> proxies,
                                          const ActiveSet& active);

/// W^T C W restricted to the collision-prone nodes, in their local numbering.
SymmetricSparse assemble_c22(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                             const ActiveSet& active, const Partition& partition);

}  // namespace schurpd

#include "schurpd/collision.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "schurpd/partition.hpp"
#include "schurpd/sparse_matrix.hpp"

namespace schurpd {

RigidTransform RigidTransform::about_axis(const Vec3& axis, const Vec3& pivot, double angle) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  t.translation = pivot - t.rotation * pivot;
  return t;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

// ---------------------------------------------------------------------------
// Grid levelset

GridLevelset::GridLevelset(const Vec3& origin, double spacing, const std::array<int, 3>& dims,
                           std::vector<double> values)
    : origin_(origin), spacing_(spacing), dims_(dims), values_(std::move(values)) {
  if (!(spacing > 0.0)) throw InvalidArgument("levelset spacing must be positive");
  for (int d : dims) {
    if (d < 2) throw InvalidArgument("levelset needs at least two samples per axis");
  }
  const std::size_t expected =
      static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  if (values_.size() != expected) {
    throw InvalidArgument("levelset has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(expected));
  }
}

GridLevelset GridLevelset::sample_box(const Vec3& box_min, const Vec3& box_max, double spacing,
                                      double padding) {
  if (!(spacing > 0.0)) throw InvalidArgument("levelset spacing must be positive");
  if ((box_max - box_min).minCoeff() <= 0.0) throw InvalidArgument("box must have positive size");
  const Vec3 origin = box_min - Vec3::Constant(padding);
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const double length = box_max[a] - box_min[a] + 2.0 * padding;
    dims[static_cast<std::size_t>(a)] = static_cast<int>(std::ceil(length / spacing - 1e-9)) + 1;
  }
  const Vec3 center = 0.5 * (box_min + box_max);
  const Vec3 half = 0.5 * (box_max - box_min);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const Vec3 p = origin + spacing * Vec3(i, j, k);
        const Vec3 q = (p - center).cwiseAbs() - half;
        values.push_back(q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0));
      }
    }
  }
  return GridLevelset(origin, spacing, dims, std::move(values));
}

GridLevelset GridLevelset::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::array<int, 3> dims{};
  Vec3 origin;
  double spacing = 0.0;
  std::vector<double> values;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    if (!have_header) {
      std::string word;
      if (!(fields >> word)) continue;
      if (word != "levelset") throw ParseError("expected 'levelset' header", line_no);
      if (!(fields >> dims[0] >> dims[1] >> dims[2] >> origin[0] >> origin[1] >> origin[2] >> spacing)) {
        throw ParseError("levelset header needs nx ny nz ox oy oz spacing", line_no);
      }
      std::string extra;
      if (fields >> extra) throw ParseError("trailing text after levelset header", line_no);
      if (dims[0] < 2 || dims[1] < 2 || dims[2] < 2) throw ParseError("levelset dims must be >= 2", line_no);
      if (!(spacing > 0.0)) throw ParseError("levelset spacing must be positive", line_no);
      expected = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
      values.reserve(expected);
      have_header = true;
      continue;
    }
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) throw ParseError("bad levelset value '" + token + "'", line_no);
      if (values.size() == expected) throw ParseError("too many levelset values", line_no);
      values.push_back(v);
    }
  }
  if (!have_header) throw ParseError("missing levelset header", line_no);
  if (values.size() != expected) {
    throw ParseError("levelset has " + std::to_string(values.size()) + " values, expected " +
                         std::to_string(expected),
                     line_no);
  }
  return GridLevelset(origin, spacing, dims, std::move(values));
}

GridLevelset GridLevelset::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open levelset file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool GridLevelset::contains(const Vec3& p) const {
  const Vec3 u = (p - origin_) / spacing_;
  for (int a = 0; a < 3; ++a) {
    if (!(u[a] >= 0.0 && u[a] <= dims_[static_cast<std::size_t>(a)] - 1)) return false;
  }
  return true;
}

double GridLevelset::at(int i, int j, int k) const {
  return values_[static_cast<std::size_t>(i) +
                 static_cast<std::size_t>(dims_[0]) * (static_cast<std::size_t>(j) +
                                                       static_cast<std::size_t>(dims_[1]) * k)];
}

Vec3 GridLevelset::node_gradient(int i, int j, int k) const {
  const std::array<int, 3> idx{i, j, k};
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> lo = idx, hi = idx;
    const int d = dims_[static_cast<std::size_t>(a)];
    lo[static_cast<std::size_t>(a)] = std::max(idx[static_cast<std::size_t>(a)] - 1, 0);
    hi[static_cast<std::size_t>(a)] = std::min(idx[static_cast<std::size_t>(a)] + 1, d - 1);
    const double span = (hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]) * spacing_;
    g[a] = (at(hi[0], hi[1], hi[2]) - at(lo[0], lo[1], lo[2])) / span;
  }
  return g;
}

double GridLevelset::value(const Vec3& p, Vec3* gradient) const {
  const Vec3 u = (p - origin_) / spacing_;
  std::array<int, 3> base{};
  Vec3 frac;
  for (int a = 0; a < 3; ++a) {
    const int hi = dims_[static_cast<std::size_t>(a)] - 2;
    const int b = std::clamp(static_cast<int>(std::floor(u[a])), 0, hi);
    base[static_cast<std::size_t>(a)] = b;
    frac[a] = u[a] - b;
  }
  double v = 0.0;
  Vec3 g = Vec3::Zero();
  for (int c = 0; c < 8; ++c) {
    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                     (dk ? frac[2] : 1.0 - frac[2]);
    const int i = base[0] + di, j = base[1] + dj, k = base[2] + dk;
    v += w * at(i, j, k);
    if (gradient) g += w * node_gradient(i, j, k);
  }
  if (gradient) *gradient = g;
  return v;
}

// ---------------------------------------------------------------------------
// Colliders

namespace {

struct LocalDistance {
  const Vec3& p;
  double& phi;
  Vec3& gradient;

  bool operator()(const HalfSpace& s) const {
    phi = (p - s.point).dot(s.normal);
    gradient = s.normal;
    return true;
  }
  bool operator()(const Sphere& s) const {
    const Vec3 d = p - s.center;
    const double r = d.norm();
    phi = r - s.radius;
    gradient = r > 0.0 ? Vec3(d / r) : Vec3::UnitZ();
    return true;
  }
  bool operator()(const Capsule& s) const {
    const Vec3 axis = s.p1 - s.p0;
    const double len2 = axis.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - s.p0).dot(axis) / len2, 0.0, 1.0) : 0.0;
    const Vec3 d = p - (s.p0 + t * axis);
    const double r = d.norm();
    phi = r - s.radius;
    gradient = r > 0.0 ? Vec3(d / r) : Vec3::UnitZ();
    return true;
  }
  bool operator()(const std::shared_ptr<const GridLevelset>& grid) const {
    if (!grid->contains(p)) return false;
    phi = grid->value(p, &gradient);
    return true;
  }
};

}  // namespace

bool Collider::signed_distance(const Vec3& p, double& phi, Vec3& gradient) const {
  const Vec3 local = transform.apply_inverse(p);
  Vec3 g_local;
  if (!std::visit(LocalDistance{local, phi, g_local}, shape)) return false;
  gradient = transform.rotation * g_local;
  return true;
}

Index ActiveSet::count() const {
  return static_cast<Index>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

double ActiveSet::max_depth() const {
  double d = 0.0;
  for (double v : depth) d = std::max(d, v);
  return d;
}

ActiveSet ActiveSet::empty(Index proxies) {
  ActiveSet a;
  a.active.assign(static_cast<std::size_t>(proxies), 0);
  a.target.assign(static_cast<std::size_t>(proxies), Vec3::Zero());
  a.depth.assign(static_cast<std::size_t>(proxies), 0.0);
  return a;
}

// ---------------------------------------------------------------------------
// Proxies

std::vector<bool> select_nodes(const TetMesh& mesh, const std::function<bool(const Vec3&)>& inside) {
  std::vector<bool> mask(mesh.rest_positions.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = inside(mesh.rest_positions[i]);
  return mask;
}

std::vector<CollisionProxy> scatter_proxies(const TetMesh& mesh, const std::vector<bool>& region,
                                            int per_element, double stiffness) {
  if (per_element < 1 || per_element > 4) throw InvalidArgument("proxies per element must be 1 to 4");
  if (!(stiffness >= 0.0)) throw InvalidArgument("proxy stiffness must be non-negative");
  if (region.size() != mesh.rest_positions.size()) throw InvalidArgument("region mask size mismatch");
  static constexpr std::array<std::array<double, 3>, 4> kPattern{{
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
      {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
  }};
  std::vector<CollisionProxy> proxies;
  for (std::size_t f = 0; f < mesh.surface_tris.size(); ++f) {
    const auto& tri = mesh.surface_tris[f];
    if (!(region[static_cast<std::size_t>(tri[0])] && region[static_cast<std::size_t>(tri[1])] &&
          region[static_cast<std::size_t>(tri[2])])) {
      continue;
    }
    const Index e = mesh.surface_owner[f];
    const auto& tet = mesh.tets[static_cast<std::size_t>(e)];
    std::array<int, 3> slot{};
    for (int v = 0; v < 3; ++v) {
      slot[static_cast<std::size_t>(v)] =
          static_cast<int>(std::find(tet.begin(), tet.end(), tri[static_cast<std::size_t>(v)]) - tet.begin());
    }
    for (int k = 0; k < per_element; ++k) {
      CollisionProxy proxy;
      proxy.element = e;
      proxy.weights = {0.0, 0.0, 0.0, 0.0};
      proxy.stiffness = stiffness;
      for (int v = 0; v < 3; ++v) {
        proxy.weights[static_cast<std::size_t>(slot[static_cast<std::size_t>(v)])] =
            kPattern[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)];
      }
      proxies.push_back(proxy);
    }
  }
  if (proxies.empty()) throw InvalidArgument("proxy region touches no surface triangle");
  return proxies;
}

Vec3 proxy_position(const TetMesh& mesh, const CollisionProxy& proxy, const Positions& x) {
  const auto& tet = mesh.tets[static_cast<std::size_t>(proxy.element)];
  Vec3 p = Vec3::Zero();
  for (int a = 0; a < 4; ++a) p += proxy.weights[static_cast<std::size_t>(a)] * x.row(tet[a]).transpose();
  return p;
}

ActiveSet detect(const TetMesh& mesh, std::span<const CollisionProxy> proxies, const Positions& x,
                 std::span<const Collider> colliders) {
  ActiveSet out = ActiveSet::empty(static_cast<Index>(proxies.size()));
  for (std::size_t j = 0; j < proxies.size(); ++j) {
    const Vec3 p = proxy_position(mesh, proxies[j], x);
    double best = 0.0;
    Vec3 best_gradient = Vec3::Zero();
    for (const Collider& c : colliders) {
      if (!c.enabled) continue;
      double phi = 0.0;
      Vec3 g;
      if (!c.signed_distance(p, phi, g)) continue;
      if (phi < best) {
        best = phi;
        best_gradient = g;
      }
    }
    if (best < 0.0) {
      out.active[j] = 1;
      out.depth[j] = -best;
      const double gnorm = best_gradient.norm();
      out.target[j] = gnorm > 0.0 ? Vec3(p - best * best_gradient / gnorm) : p;
    }
  }
  return out;
}

double max_penetration(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                       const Positions& x, std::span<const Collider> colliders) {
  return detect(mesh, proxies, x, colliders).max_depth();
}

double collision_energy(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                        const ActiveSet& active, const Positions& x) {
  double e = 0.0;
  for (std::size_t j = 0; j < proxies.size(); ++j) {
    if (!active.active[j]) continue;
    e += 0.5 * proxies[j].stiffness * (proxy_position(mesh, proxies[j], x) - active.target[j]).squaredNorm();
  }
  return e;
}

void accumulate_collision_forces(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                                 const ActiveSet& active, const Positions& x, Positions& forces) {
  for (std::size_t j = 0; j < proxies.size(); ++j) {
    if (!active.active[j]) continue;
    const Vec3 spring = -proxies[j].stiffness * (proxy_position(mesh, proxies[j], x) - active.target[j]);
    const auto& tet = mesh.tets[static_cast<std::size_t>(proxies[j].element)];
    for (int a = 0; a < 4; ++a) {
      const double w = proxies[j].weights[static_cast<std::size_t>(a)];
      if (w != 0.0) forces.row(tet[a]) += w * spring.transpose();
    }
  }
}

Positions collision_forces(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                           const ActiveSet& active, const Positions& x) {
  Positions f = Positions::Zero(mesh.num_nodes(), 3);
  accumulate_collision_forces(mesh, proxies, active, x, f);
  return f;
}

namespace {

template <typename Map>
SymmetricSparse collision_block(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                                const ActiveSet& active, Index size, Map&& map) {
  std::vector<Triplet> triplets;
  for (std::size_t j = 0; j < proxies.size(); ++j) {
    if (!active.active[j]) continue;
    const auto& proxy = proxies[j];
    const auto& tet = mesh.tets[static_cast<std::size_t>(proxy.element)];
    for (int a = 0; a < 4; ++a) {
      const double wa = proxy.weights[static_cast<std::size_t>(a)];
      if (wa == 0.0) continue;
      for (int b = a; b < 4; ++b) {
        const double wb = proxy.weights[static_cast<std::size_t>(b)];
        if (wb == 0.0) continue;
        triplets.push_back({map(proxy, tet[a]), map(proxy, tet[b]), proxy.stiffness * wa * wb});
      }
    }
  }
  return SymmetricSparse::from_triplets(size, triplets);
}

}  // namespace

SymmetricSparse assemble_collision_matrix(const TetMesh& mesh,
                                          std::span<const CollisionProxy> proxies,
                                          const ActiveSet& active) {
  return collision_block(mesh, proxies, active, mesh.num_nodes(),
                         [](const CollisionProxy&, Index node) { return node; });
}

SymmetricSparse assemble_c22(const TetMesh& mesh, std::span<const CollisionProxy> proxies,
                             const ActiveSet& active, const Partition& partition) {
  return collision_block(mesh, proxies, active, partition.n2, [&](const CollisionProxy& proxy, Index node) {
    if (!partition.is_beta[static_cast<std::size_t>(proxy.element)]) {
      throw StructuralError("proxy element " + std::to_string(proxy.element) +
                            " is not in the collision-prone element set");
    }
    const Index local = partition.local2(node);
    if (local < 0) {
      throw StructuralError("proxy touches collision-safe node " + std::to_string(node));
    }
    return local;
  });
}

}  // namespace schurpd

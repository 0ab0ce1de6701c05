#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <map>
#include <set>
#include <sstream>

#include "schurpd/mesh.hpp"

using namespace schurpd;

namespace {

double det_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Mat3 m;
  m << b - a, c - a, d - a;
  return m.determinant() / 6.0;
}

const char* kSingleNode =
    "# one tet\n"
    "4 3 0 0\n"
    "1 0 0 0\n"
    "2 1 0 0\n"
    "3 0 1 0\n"
    "4 0 0 1\n";

}  // namespace

TEST(Mesh, LatticeCountsAndVolume) {
  const Vec3 extent(2.0, 0.5, 0.75);
  const TetMesh m = build_box_lattice(extent, {4, 2, 3});
  EXPECT_EQ(m.num_nodes(), 5 * 3 * 4);
  EXPECT_EQ(m.num_elements(), 5 * 4 * 2 * 3);
  double total = 0.0;
  for (const auto& t : m.tets) {
    const double v = det_volume(m.rest_positions[t[0]], m.rest_positions[t[1]],
                                m.rest_positions[t[2]], m.rest_positions[t[3]]);
    EXPECT_GT(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, extent.prod(), 1e-12);
}

TEST(Mesh, LatticeIsConforming) {
  // Every interior face must be shared by exactly two elements, so face
  // multiplicities are 1 (boundary) or 2.
  const TetMesh m = build_box_lattice(Vec3(1, 1, 1), {3, 3, 3});
  std::map<std::array<Index, 3>, int> faces;
  for (const auto& t : m.tets) {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<Index, 3> f{};
      int k = 0;
      for (int c = 0; c < 4; ++c)
        if (c != skip) f[k++] = t[c];
      std::sort(f.begin(), f.end());
      ++faces[f];
    }
  }
  int boundary = 0;
  for (const auto& [f, count] : faces) {
    ASSERT_LE(count, 2);
    boundary += count == 1;
  }
  // Two triangles per cell face on the six sides.
  EXPECT_EQ(boundary, 2 * 2 * (9 + 9 + 9));
  EXPECT_EQ(static_cast<int>(m.surface_tris.size()), boundary);
}

TEST(Mesh, SurfaceIsOutwardAndOwned) {
  const TetMesh m = build_box_lattice(Vec3(1.5, 1, 0.5), {3, 2, 2});
  ASSERT_EQ(m.surface_owner.size(), m.surface_tris.size());
  // Divergence theorem: closed outward surface encloses the volume.
  double v = 0.0;
  for (const auto& f : m.surface_tris) {
    v += m.rest_positions[f[0]].dot(m.rest_positions[f[1]].cross(m.rest_positions[f[2]])) / 6.0;
  }
  EXPECT_NEAR(v, 0.75, 1e-12);
  for (std::size_t i = 0; i < m.surface_tris.size(); ++i) {
    const auto& t = m.tets[m.surface_owner[i]];
    for (Index node : m.surface_tris[i]) {
      EXPECT_NE(std::find(t.begin(), t.end(), node), t.end());
    }
  }
}

TEST(Mesh, ExtractSurfaceSingleTet) {
  std::vector<std::array<Index, 4>> tets{{0, 1, 2, 3}};
  std::vector<Index> owner;
  const auto faces = extract_surface(tets, &owner);
  EXPECT_EQ(faces.size(), 4u);
  EXPECT_EQ(owner, std::vector<Index>(4, 0));
}

TEST(Mesh, TetgenOneBased) {
  const TetMesh m = load_tetgen(kSingleNode, "1 4 0\n1 1 2 3 4\n");
  ASSERT_EQ(m.num_nodes(), 4);
  ASSERT_EQ(m.num_elements(), 1);
  EXPECT_EQ(m.rest_positions[1], Vec3(1, 0, 0));
  EXPECT_EQ(m.tets[0], (std::array<Index, 4>{0, 1, 2, 3}));
}

TEST(Mesh, TetgenZeroBasedWithAttributes) {
  const char* nodes = "4 3 1 1\n0 0 0 0 7.5 1\n1 1 0 0 7.5 1\n2 0 1 0 7.5 0\n3 0 0 1 7.5 0\n";
  const TetMesh m = load_tetgen(nodes, "1 4 1\n0 0 1 2 3 9\n");
  EXPECT_EQ(m.tets[0], (std::array<Index, 4>{0, 1, 2, 3}));
}

TEST(Mesh, TetgenRewindsInverted) {
  const TetMesh m = load_tetgen(kSingleNode, "1 4 0\n1 1 3 2 4\n");
  const auto& t = m.tets[0];
  EXPECT_GT(det_volume(m.rest_positions[t[0]], m.rest_positions[t[1]], m.rest_positions[t[2]],
                       m.rest_positions[t[3]]),
            0.0);
  EXPECT_EQ(std::set<Index>(t.begin(), t.end()), (std::set<Index>{0, 1, 2, 3}));
}

TEST(Mesh, TetgenErrorsCarryLine) {
  try {
    load_tetgen(kSingleNode, "1 4 0\n1 1 2 3 9\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(load_tetgen("4 3 0 0\n1 0 0 0\n", "1 4 0\n1 1 2 3 4\n"), ParseError);
  EXPECT_THROW(load_tetgen(kSingleNode, "1 4 0\n1 1 2 x 4\n"), ParseError);
  EXPECT_THROW(load_tetgen("4 3 0 0\n1 0 0 0\n2 1 0 0\n3 2 0 0\n4 3 0 0\n", "1 4 0\n1 1 2 3 4\n"),
               GeometryError);
}

TEST(Mesh, DeformationGradientOfAffineMap) {
  const TetMesh m = build_box_lattice(Vec3(1, 1, 1), {2, 2, 2});
  const RestData rest = compute_rest_data(m);
  Mat3 a;
  a << 1.2, 0.1, -0.3, 0.05, 0.9, 0.2, -0.1, 0.4, 1.1;
  const Vec3 shift(0.3, -2.0, 1.0);
  Positions x(m.num_nodes(), 3);
  for (Index i = 0; i < m.num_nodes(); ++i) x.row(i) = (a * m.rest_positions[i] + shift).transpose();
  for (Index e = 0; e < m.num_elements(); ++e) {
    EXPECT_LT((deformation_gradient(m, rest, x, e) - a).norm(), 1e-12);
    EXPECT_GT(rest.volume[e], 0.0);
  }
  const Positions x0 = rest_positions(m);
  EXPECT_LT((deformation_gradient(m, rest, x0, 3) - Mat3::Identity()).norm(), 1e-14);
}

TEST(Mesh, MeanEdgeLength) {
  const TetMesh m = load_tetgen(kSingleNode, "1 4 0\n1 1 2 3 4\n");
  EXPECT_NEAR(mean_edge_length(m), (3.0 + 3.0 * std::sqrt(2.0)) / 6.0, 1e-14);
}

TEST(Mesh, ObjOutput) {
  const TetMesh m = build_box_lattice(Vec3(1, 1, 1), {1, 1, 1});
  std::ostringstream out;
  write_obj(out, m, rest_positions(m));
  std::istringstream in(out.str());
  std::string line;
  int v = 0, f = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) {
      ++f;
      std::istringstream fields(line.substr(2));
      int idx;
      while (fields >> idx) {
        EXPECT_GE(idx, 1);
        EXPECT_LE(idx, m.num_nodes());
      }
    }
  }
  EXPECT_EQ(v, m.num_nodes());
  EXPECT_EQ(f, static_cast<int>(m.surface_tris.size()));
}

TEST(Mesh, InvalidLattice) {
  EXPECT_THROW(build_box_lattice(Vec3(1, 0, 1), {1, 1, 1}), InvalidArgument);
  EXPECT_THROW(build_box_lattice(Vec3(1, 1, 1), {1, 0, 1}), InvalidArgument);
}

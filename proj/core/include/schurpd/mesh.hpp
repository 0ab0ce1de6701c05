#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "schurpd/common.hpp"

namespace schurpd {

struct TetMesh {
  std::vector<Vec3> rest_positions;
  std::vector<std::array<Index, 4>> tets;
  // Outward-oriented boundary faces and the element each one belongs to.
  std::vector<std::array<Index, 3>> surface_tris;
  std::vector<Index> surface_owner;

  Index num_nodes() const { return static_cast<Index>(rest_positions.size()); }
  Index num_elements() const { return static_cast<Index>(tets.size()); }
};

struct RestData {
  std::vector<Mat3> dm_inverse;
  std::vector<double> volume;
};

/// Regular lattice over [0, extent] with five tetrahedra per cell. Cell
/// parity alternates so that neighbouring cells share face diagonals.
TetMesh build_box_lattice(const Vec3& extent, const std::array<int, 3>& cells);

/// Parses TetGen-style `.node` / `.ele` text. Indices may start at 0 or 1 (the
/// first node index decides); inverted elements are re-wound.
TetMesh load_tetgen(std::string_view node_text, std::string_view ele_text);
TetMesh load_tetgen_files(const std::filesystem::path& node_file,
                          const std::filesystem::path& ele_file);

RestData compute_rest_data(const TetMesh& mesh);

Mat3 deformation_gradient(const TetMesh& mesh, const RestData& rest,
                          const Positions& x, Index e);

Positions rest_positions(const TetMesh& mesh);

/// Boundary faces (faces used by exactly one element), oriented outward, in
/// element order. `owner` receives the element of each face.
std::vector<std::array<Index, 3>> extract_surface(
    const std::vector<std::array<Index, 4>>& tets, std::vector<Index>* owner);

double mean_edge_length(const TetMesh& mesh);
double signed_tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

void write_obj(std::ostream& out, const TetMesh& mesh, const Positions& x);

}  // namespace schurpd

#include "schurpd/mesh.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace schurpd {

namespace {

// Cell corners are numbered by bit pattern (x | y << 1 | z << 2). A cell is
// split into one central tetrahedron on four mutually non-adjacent corners
// and four corner tetrahedra cut off around the remaining corners.
constexpr std::array<std::array<int, 4>, 5> kEvenCell = {{
    {1, 2, 4, 7},
    {0, 1, 2, 4},
    {3, 1, 2, 7},
    {5, 1, 4, 7},
    {6, 2, 4, 7},
}};
constexpr std::array<std::array<int, 4>, 5> kOddCell = {{
    {0, 3, 5, 6},
    {1, 0, 3, 5},
    {2, 0, 3, 6},
    {4, 0, 5, 6},
    {7, 3, 5, 6},
}};

void orient_positive(const std::vector<Vec3>& nodes, std::array<Index, 4>& t) {
  if (signed_tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]) < 0.0) {
    std::swap(t[2], t[3]);
  }
}

struct Line {
  int number;
  std::string text;
};

// Non-empty lines with '#' comments stripped.
std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string line(text.substr(pos, end - pos));
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      lines.push_back({number, std::move(line)});
    }
    pos = end + 1;
  }
  return lines;
}

template <typename T>
std::vector<T> parse_fields(const Line& line, std::size_t min_count, const char* what) {
  std::istringstream in(line.text);
  std::vector<T> values;
  T v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) {
    throw ParseError(std::string("malformed ") + what + " line", line.number);
  }
  if (values.size() < min_count) {
    throw ParseError(std::string("too few fields on ") + what + " line", line.number);
  }
  return values;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

double signed_tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

TetMesh build_box_lattice(const Vec3& extent, const std::array<int, 3>& cells) {
  for (int axis = 0; axis < 3; ++axis) {
    if (!(extent[axis] > 0.0)) throw InvalidArgument("lattice extent must be positive");
    if (cells[axis] < 1) throw InvalidArgument("lattice cell count must be at least 1");
  }
  const int nx = cells[0] + 1, ny = cells[1] + 1, nz = cells[2] + 1;
  auto node = [&](int i, int j, int k) { return static_cast<Index>(i + nx * (j + ny * k)); };

  TetMesh mesh;
  mesh.rest_positions.reserve(static_cast<std::size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        mesh.rest_positions.emplace_back(extent[0] * i / cells[0], extent[1] * j / cells[1],
                                         extent[2] * k / cells[2]);
      }
    }
  }

  mesh.tets.reserve(5 * static_cast<std::size_t>(cells[0]) * cells[1] * cells[2]);
  for (int k = 0; k < cells[2]; ++k) {
    for (int j = 0; j < cells[1]; ++j) {
      for (int i = 0; i < cells[0]; ++i) {
        std::array<Index, 8> corner;
        for (int c = 0; c < 8; ++c) {
          corner[c] = node(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
        }
        const auto& pattern = ((i + j + k) % 2 == 0) ? kEvenCell : kOddCell;
        for (const auto& local : pattern) {
          std::array<Index, 4> t = {corner[local[0]], corner[local[1]], corner[local[2]],
                                    corner[local[3]]};
          orient_positive(mesh.rest_positions, t);
          mesh.tets.push_back(t);
        }
      }
    }
  }
  mesh.surface_tris = extract_surface(mesh.tets, &mesh.surface_owner);
  return mesh;
}

TetMesh load_tetgen(std::string_view node_text, std::string_view ele_text) {
  TetMesh mesh;

  const auto node_lines = content_lines(node_text);
  if (node_lines.empty()) throw ParseError("empty .node file", 1);
  const auto header = parse_fields<long long>(node_lines[0], 1, ".node header");
  const long long count = header[0];
  const long long dim = header.size() > 1 ? header[1] : 3;
  const long long attributes = header.size() > 2 ? header[2] : 0;
  const long long markers = header.size() > 3 ? header[3] : 0;
  if (count < 1 || dim != 3 || attributes < 0 || markers < 0 || markers > 1) {
    throw ParseError("unsupported .node header", node_lines[0].number);
  }
  if (static_cast<long long>(node_lines.size()) - 1 < count) {
    throw ParseError("fewer node lines than declared", node_lines.back().number);
  }

  long long base = 0;
  mesh.rest_positions.resize(static_cast<std::size_t>(count));
  std::vector<bool> seen(static_cast<std::size_t>(count), false);
  for (long long i = 0; i < count; ++i) {
    const Line& line = node_lines[static_cast<std::size_t>(i + 1)];
    const auto fields = parse_fields<double>(line, 4, "node");
    if (fields.size() != static_cast<std::size_t>(4 + attributes + markers)) {
      throw ParseError("node line has wrong field count", line.number);
    }
    const double raw_index = fields[0];
    if (raw_index != std::floor(raw_index)) throw ParseError("non-integer node index", line.number);
    if (i == 0) base = static_cast<long long>(raw_index);
    if (base != 0 && base != 1) throw ParseError("node indices must start at 0 or 1", line.number);
    const long long index = static_cast<long long>(raw_index) - base;
    if (index < 0 || index >= count) throw ParseError("node index out of range", line.number);
    if (seen[static_cast<std::size_t>(index)]) throw ParseError("duplicate node index", line.number);
    seen[static_cast<std::size_t>(index)] = true;
    mesh.rest_positions[static_cast<std::size_t>(index)] = Vec3(fields[1], fields[2], fields[3]);
  }

  const auto ele_lines = content_lines(ele_text);
  if (ele_lines.empty()) throw ParseError("empty .ele file", 1);
  const auto ele_header = parse_fields<long long>(ele_lines[0], 1, ".ele header");
  const long long tet_count = ele_header[0];
  const long long per_tet = ele_header.size() > 1 ? ele_header[1] : 4;
  const long long ele_attributes = ele_header.size() > 2 ? ele_header[2] : 0;
  if (tet_count < 1 || per_tet != 4 || ele_attributes < 0) {
    throw ParseError("unsupported .ele header", ele_lines[0].number);
  }
  if (static_cast<long long>(ele_lines.size()) - 1 < tet_count) {
    throw ParseError("fewer element lines than declared", ele_lines.back().number);
  }

  std::vector<int> tet_line(static_cast<std::size_t>(tet_count));
  mesh.tets.resize(static_cast<std::size_t>(tet_count));
  for (long long e = 0; e < tet_count; ++e) {
    const Line& line = ele_lines[static_cast<std::size_t>(e + 1)];
    const auto fields = parse_fields<double>(line, 5, "element");
    if (fields.size() != static_cast<std::size_t>(5 + ele_attributes)) {
      throw ParseError("element line has wrong field count", line.number);
    }
    std::array<Index, 4> t{};
    for (int c = 0; c < 4; ++c) {
      const double raw = fields[static_cast<std::size_t>(c + 1)];
      const long long v = static_cast<long long>(raw) - base;
      if (raw != std::floor(raw) || v < 0 || v >= count) {
        throw ParseError("element references node out of range", line.number);
      }
      t[c] = static_cast<Index>(v);
    }
    mesh.tets[static_cast<std::size_t>(e)] = t;
    tet_line[static_cast<std::size_t>(e)] = line.number;
  }

  double mean = 0.0;
  std::vector<double> volumes(mesh.tets.size());
  for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
    const auto& t = mesh.tets[e];
    volumes[e] = signed_tet_volume(mesh.rest_positions[t[0]], mesh.rest_positions[t[1]],
                                   mesh.rest_positions[t[2]], mesh.rest_positions[t[3]]);
    mean += std::abs(volumes[e]);
  }
  mean /= static_cast<double>(mesh.tets.size());
  for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
    if (!(std::abs(volumes[e]) >= 1e-14 * mean) || mean == 0.0) {
      throw GeometryError("degenerate element " + std::to_string(e) + " (line " +
                          std::to_string(tet_line[e]) + ")");
    }
    if (volumes[e] < 0.0) std::swap(mesh.tets[e][2], mesh.tets[e][3]);
  }

  mesh.surface_tris = extract_surface(mesh.tets, &mesh.surface_owner);
  return mesh;
}

TetMesh load_tetgen_files(const std::filesystem::path& node_file,
                          const std::filesystem::path& ele_file) {
  return load_tetgen(read_file(node_file), read_file(ele_file));
}

RestData compute_rest_data(const TetMesh& mesh) {
  RestData rest;
  rest.dm_inverse.resize(mesh.tets.size());
  rest.volume.resize(mesh.tets.size());
  for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
    const auto& t = mesh.tets[e];
    const Vec3& x0 = mesh.rest_positions[t[0]];
    Mat3 dm;
    dm.col(0) = mesh.rest_positions[t[1]] - x0;
    dm.col(1) = mesh.rest_positions[t[2]] - x0;
    dm.col(2) = mesh.rest_positions[t[3]] - x0;
    const double det = dm.determinant();
    if (!(det > 0.0)) {
      throw GeometryError("degenerate or inverted rest element " + std::to_string(e));
    }
    rest.dm_inverse[e] = dm.inverse();
    rest.volume[e] = det / 6.0;
  }
  return rest;
}

Mat3 deformation_gradient(const TetMesh& mesh, const RestData& rest, const Positions& x,
                          Index e) {
  const auto& t = mesh.tets[static_cast<std::size_t>(e)];
  Mat3 ds;
  const Vec3 x0 = x.row(t[0]).transpose();
  ds.col(0) = x.row(t[1]).transpose() - x0;
  ds.col(1) = x.row(t[2]).transpose() - x0;
  ds.col(2) = x.row(t[3]).transpose() - x0;
  return ds * rest.dm_inverse[static_cast<std::size_t>(e)];
}

Positions rest_positions(const TetMesh& mesh) {
  Positions x(mesh.num_nodes(), 3);
  for (Index i = 0; i < mesh.num_nodes(); ++i) x.row(i) = mesh.rest_positions[i].transpose();
  return x;
}

std::vector<std::array<Index, 3>> extract_surface(const std::vector<std::array<Index, 4>>& tets,
                                                  std::vector<Index>* owner) {
  struct Face {
    std::array<Index, 3> key;
    std::array<Index, 3> oriented;
    Index element;
  };
  std::vector<Face> faces;
  faces.reserve(tets.size() * 4);
  for (std::size_t e = 0; e < tets.size(); ++e) {
    const auto& t = tets[e];
    const std::array<std::array<Index, 3>, 4> local = {{
        {t[1], t[2], t[3]},
        {t[0], t[3], t[2]},
        {t[0], t[1], t[3]},
        {t[0], t[2], t[1]},
    }};
    for (const auto& f : local) {
      auto key = f;
      std::sort(key.begin(), key.end());
      faces.push_back({key, f, static_cast<Index>(e)});
    }
  }
  std::vector<std::size_t> order(faces.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return faces[a].key < faces[b].key || (faces[a].key == faces[b].key && a < b);
  });

  std::vector<std::size_t> boundary;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && faces[order[j]].key == faces[order[i]].key) ++j;
    if (j - i == 1) boundary.push_back(order[i]);
    i = j;
  }
  std::sort(boundary.begin(), boundary.end());

  std::vector<std::array<Index, 3>> tris;
  tris.reserve(boundary.size());
  if (owner) {
    owner->clear();
    owner->reserve(boundary.size());
  }
  for (std::size_t b : boundary) {
    tris.push_back(faces[b].oriented);
    if (owner) owner->push_back(faces[b].element);
  }
  return tris;
}

double mean_edge_length(const TetMesh& mesh) {
  if (mesh.tets.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : mesh.tets) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        total += (mesh.rest_positions[t[a]] - mesh.rest_positions[t[b]]).norm();
      }
    }
  }
  return total / (6.0 * static_cast<double>(mesh.tets.size()));
}

void write_obj(std::ostream& out, const TetMesh& mesh, const Positions& x) {
  char buffer[128];
  for (Index i = 0; i < x.rows(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "v %.12g %.12g %.12g\n", x(i, 0), x(i, 1), x(i, 2));
    out << buffer;
  }
  for (const auto& f : mesh.surface_tris) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

}  // namespace schurpd

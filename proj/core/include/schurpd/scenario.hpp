#pragma once

#include <climits>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "schurpd/collision.hpp"
#include "schurpd/material.hpp"
#include "schurpd/solver.hpp"

namespace schurpd {

/// Scripted rigid motion as a function of the frame number.
struct Motion {
  enum class Kind { kStatic, kRotate, kTranslate, kKeyframes };
  struct Key {
    int frame = 0;
    double angle_deg = 0.0;
    Vec3 translation = Vec3::Zero();
    friend bool operator==(const Key&, const Key&) = default;
  };

  Kind kind = Kind::kStatic;
  Vec3 axis = Vec3::UnitZ();
  Vec3 pivot = Vec3::Zero();
  double rate_deg = 0.0;          // rotate: degrees per frame
  Vec3 velocity = Vec3::Zero();   // translate: metres per frame
  int start_frame = 0;
  int stop_frame = INT_MAX;       // motion holds after this frame
  std::vector<Key> keys;          // keyframes: angle about axis/pivot, then translation

  /// Transform at `frame`: rates act on clamp(frame, start, stop) - start;
  /// keyframes interpolate linearly and hold outside their range.
  RigidTransform at(int frame) const;
  friend bool operator==(const Motion&, const Motion&) = default;
};

/// Axis-aligned rest-space box, inclusive with a small tolerance.
struct Region {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const;
  friend bool operator==(const Region&, const Region&) = default;
};

struct LatticeSpec {
  Vec3 extent = Vec3::Ones();
  std::array<int, 3> cells{1, 1, 1};
  double jitter = 0.0;  // interior node perturbation, fraction of a cell
  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

struct TetgenSpec {
  std::string node_file;
  std::string ele_file;
  friend bool operator==(const TetgenSpec&, const TetgenSpec&) = default;
};

struct AttachmentGroup {
  std::string name;
  Region region;
  double stiffness = 1.0;
  Motion motion;
  friend bool operator==(const AttachmentGroup&, const AttachmentGroup&) = default;
};

struct LevelsetFileSpec {
  std::string file;
  friend bool operator==(const LevelsetFileSpec&, const LevelsetFileSpec&) = default;
};

/// Signed distance of a box sampled onto a grid levelset.
struct BoxSdfSpec {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  double spacing = 0.05;
  double padding = 0.1;
  friend bool operator==(const BoxSdfSpec&, const BoxSdfSpec&) = default;
};

bool operator==(const HalfSpace& a, const HalfSpace& b);
bool operator==(const Sphere& a, const Sphere& b);
bool operator==(const Capsule& a, const Capsule& b);

using ShapeSpec = std::variant<HalfSpace, Sphere, Capsule, LevelsetFileSpec, BoxSdfSpec>;

struct ColliderSpec {
  std::string name;
  ShapeSpec shape;
  Motion motion;
  std::string follow;     // attachment group whose motion is applied on top
  int enable_frame = 1;
  int disable_frame = INT_MAX;
  friend bool operator==(const ColliderSpec&, const ColliderSpec&) = default;
};

struct ProxySpec {
  Region region;
  int per_element = 1;
  std::optional<double> stiffness;  // default 10 mu * mean edge length
  friend bool operator==(const ProxySpec&, const ProxySpec&) = default;
};

struct Scenario {
  std::string name;
  int frames = 1;
  std::uint64_t seed = 0;
  std::variant<LatticeSpec, TetgenSpec> mesh;
  MaterialParams material;
  std::vector<AttachmentGroup> attachments;
  std::vector<ColliderSpec> colliders;
  std::optional<ProxySpec> proxies;
  SolverConfig solver;
  // Directory that relative file names resolve against; not part of equality.
  std::filesystem::path base_dir;

  void validate() const;
  bool operator==(const Scenario& other) const;
};

bool operator==(const MaterialParams& a, const MaterialParams& b);

/// Parses the YAML scenario schema. Unknown keys and type errors raise
/// ConfigError naming the key path and line.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

/// YAML text that parses back to an equal scenario.
std::string scenario_to_yaml(const Scenario& s);

}  // namespace schurpd

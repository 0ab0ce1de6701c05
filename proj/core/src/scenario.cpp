#include "schurpd/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

namespace schurpd {

// ---------------------------------------------------------------------------
// Motion and regions

RigidTransform Motion::at(int frame) const {
  const double steps = static_cast<double>(std::clamp(frame, start_frame, std::max(start_frame, stop_frame)) -
                                           start_frame);
  constexpr double kDeg = std::numbers::pi / 180.0;
  switch (kind) {
    case Kind::kStatic:
      return {};
    case Kind::kRotate:
      return RigidTransform::about_axis(axis, pivot, rate_deg * steps * kDeg);
    case Kind::kTranslate: {
      RigidTransform t;
      t.translation = velocity * steps;
      return t;
    }
    case Kind::kKeyframes: {
      if (keys.empty()) return {};
      double angle = keys.front().angle_deg;
      Vec3 translation = keys.front().translation;
      if (frame >= keys.back().frame) {
        angle = keys.back().angle_deg;
        translation = keys.back().translation;
      } else if (frame > keys.front().frame) {
        for (std::size_t k = 1; k < keys.size(); ++k) {
          if (frame <= keys[k].frame) {
            const auto& a = keys[k - 1];
            const auto& b = keys[k];
            const double s = static_cast<double>(frame - a.frame) / (b.frame - a.frame);
            angle = a.angle_deg + s * (b.angle_deg - a.angle_deg);
            translation = a.translation + s * (b.translation - a.translation);
            break;
          }
        }
      }
      RigidTransform t = RigidTransform::about_axis(axis, pivot, angle * kDeg);
      t.translation += translation;
      return t;
    }
  }
  return {};
}

bool Region::contains(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    const double tol = 1e-9 * (1.0 + std::abs(min[a]) + std::abs(max[a]));
    if (p[a] < min[a] - tol || p[a] > max[a] + tol) return false;
  }
  return true;
}

bool operator==(const HalfSpace& a, const HalfSpace& b) { return a.point == b.point && a.normal == b.normal; }
bool operator==(const Sphere& a, const Sphere& b) { return a.center == b.center && a.radius == b.radius; }
bool operator==(const Capsule& a, const Capsule& b) {
  return a.p0 == b.p0 && a.p1 == b.p1 && a.radius == b.radius;
}
bool operator==(const MaterialParams& a, const MaterialParams& b) {
  return a.mu == b.mu && a.lambda == b.lambda && a.mu_prime == b.mu_prime && a.sigma_min == b.sigma_min &&
         a.sigma_max == b.sigma_max;
}

bool Scenario::operator==(const Scenario& o) const {
  return name == o.name && frames == o.frames && seed == o.seed && mesh == o.mesh && material == o.material &&
         attachments == o.attachments && colliders == o.colliders && proxies == o.proxies && solver == o.solver;
}

void Scenario::validate() const {
  if (name.empty()) throw ConfigError("name must not be empty");
  if (frames < 1) throw ConfigError("frames must be at least 1");
  if (const auto* lattice = std::get_if<LatticeSpec>(&mesh)) {
    if (lattice->extent.minCoeff() <= 0.0) throw ConfigError("mesh.lattice.extent must be positive");
    for (int c : lattice->cells) {
      if (c < 1) throw ConfigError("mesh.lattice.cells must be at least 1");
    }
    if (!(lattice->jitter >= 0.0 && lattice->jitter <= 0.25)) {
      throw ConfigError("mesh.lattice.jitter must lie in [0, 0.25]");
    }
  } else {
    const auto& tg = std::get<TetgenSpec>(mesh);
    if (tg.node_file.empty() || tg.ele_file.empty()) throw ConfigError("mesh.tetgen needs node and ele files");
  }
  material.validate();
  solver.validate();
  std::set<std::string> names;
  for (const auto& g : attachments) {
    if (!names.insert(g.name).second) throw ConfigError("duplicate attachment name '" + g.name + "'");
    if (!(g.stiffness > 0.0)) throw ConfigError("attachments." + g.name + ".stiffness must be positive");
  }
  for (const auto& c : colliders) {
    if (!c.follow.empty() && !names.count(c.follow)) {
      throw ConfigError("colliders." + c.name + ".follow names unknown attachment '" + c.follow + "'");
    }
    if (const auto* s = std::get_if<Sphere>(&c.shape); s && !(s->radius > 0.0)) {
      throw ConfigError("colliders." + c.name + ".shape.radius must be positive");
    }
    if (const auto* s = std::get_if<Capsule>(&c.shape); s && !(s->radius > 0.0)) {
      throw ConfigError("colliders." + c.name + ".shape.radius must be positive");
    }
    if (const auto* s = std::get_if<BoxSdfSpec>(&c.shape)) {
      if (!(s->spacing > 0.0)) throw ConfigError("colliders." + c.name + ".shape.spacing must be positive");
      if ((s->max - s->min).minCoeff() <= 0.0) throw ConfigError("colliders." + c.name + ".shape box is empty");
    }
  }
  if (proxies) {
    if (proxies->per_element < 1 || proxies->per_element > 4) {
      throw ConfigError("proxies.per_element must be 1 to 4");
    }
    if (proxies->stiffness && !(*proxies->stiffness >= 0.0)) {
      throw ConfigError("proxies.stiffness must be non-negative");
    }
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what + " (line " + std::to_string(line_of(n)) + ")");
}

class Reader {
 public:
  Reader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }

  void expect_map(std::initializer_list<const char*> allowed) const {
    if (!node_.IsMap()) fail(node_, path_, "expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(kv.first, child_path(key), "unknown key");
      }
    }
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }

  Reader child(const char* key) const {
    const YAML::Node c = node_[key];
    if (!c) fail(node_, child_path(key), "missing required key");
    return Reader(c, child_path(key));
  }

  std::vector<Reader> items() const {
    if (!node_.IsSequence()) fail(node_, path_, "expected a list");
    std::vector<Reader> out;
    for (std::size_t i = 0; i < node_.size(); ++i) {
      out.emplace_back(node_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  double as_double() const {
    if (!node_.IsScalar()) fail(node_, path_, "expected a number");
    try {
      return node_.as<double>();
    } catch (const YAML::Exception&) {
      fail(node_, path_, "expected a number");
    }
  }
  int as_int() const {
    if (!node_.IsScalar()) fail(node_, path_, "expected an integer");
    try {
      return node_.as<int>();
    } catch (const YAML::Exception&) {
      fail(node_, path_, "expected an integer");
    }
  }
  std::uint64_t as_uint64() const {
    if (!node_.IsScalar()) fail(node_, path_, "expected a non-negative integer");
    try {
      return node_.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(node_, path_, "expected a non-negative integer");
    }
  }
  bool as_bool() const {
    if (!node_.IsScalar()) fail(node_, path_, "expected true or false");
    try {
      return node_.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node_, path_, "expected true or false");
    }
  }
  std::string as_string() const {
    if (!node_.IsScalar()) fail(node_, path_, "expected a string");
    return node_.as<std::string>();
  }
  Vec3 as_vec3() const {
    if (!node_.IsSequence() || node_.size() != 3) fail(node_, path_, "expected a list of three numbers");
    Vec3 v;
    for (int a = 0; a < 3; ++a) v[a] = Reader(node_[a], path_ + "[" + std::to_string(a) + "]").as_double();
    return v;
  }
  std::array<int, 3> as_int3() const {
    if (!node_.IsSequence() || node_.size() != 3) fail(node_, path_, "expected a list of three integers");
    std::array<int, 3> v{};
    for (int a = 0; a < 3; ++a) {
      v[static_cast<std::size_t>(a)] = Reader(node_[a], path_ + "[" + std::to_string(a) + "]").as_int();
    }
    return v;
  }

  [[noreturn]] void error(const std::string& what) const { fail(node_, path_, what); }

  template <typename T, typename F>
  void optional(const char* key, T& out, F&& get) const {
    if (has(key)) out = get(child(key));
  }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
};

double get_d(const Reader& r) { return r.as_double(); }
int get_i(const Reader& r) { return r.as_int(); }
Vec3 get_v(const Reader& r) { return r.as_vec3(); }

Vec3 unit_normal(const Reader& r) {
  Vec3 n = r.as_vec3();
  const double len = n.norm();
  if (!(len > 0.0)) r.error("normal must be non-zero");
  if (std::abs(len - 1.0) > 1e-12) n /= len;
  return n;
}

Region parse_region(const Reader& r) {
  r.expect_map({"min", "max"});
  Region g{r.child("min").as_vec3(), r.child("max").as_vec3()};
  if ((g.max - g.min).minCoeff() < 0.0) r.error("region min exceeds max");
  return g;
}

Motion parse_motion(const Reader& r) {
  r.expect_map({"type", "axis", "pivot", "rate_deg", "velocity", "start_frame", "stop_frame", "keys"});
  Motion m;
  const std::string type = r.child("type").as_string();
  if (type == "static") {
    m.kind = Motion::Kind::kStatic;
  } else if (type == "rotate") {
    m.kind = Motion::Kind::kRotate;
  } else if (type == "translate") {
    m.kind = Motion::Kind::kTranslate;
  } else if (type == "keyframes") {
    m.kind = Motion::Kind::kKeyframes;
  } else {
    r.child("type").error("unknown motion type '" + type + "' (static, rotate, translate, keyframes)");
  }
  if (r.has("axis")) m.axis = unit_normal(r.child("axis"));
  r.optional("pivot", m.pivot, get_v);
  r.optional("rate_deg", m.rate_deg, get_d);
  r.optional("velocity", m.velocity, get_v);
  r.optional("start_frame", m.start_frame, get_i);
  r.optional("stop_frame", m.stop_frame, get_i);
  if (m.stop_frame < m.start_frame) r.error("stop_frame precedes start_frame");
  if (r.has("keys")) {
    for (const Reader& k : r.child("keys").items()) {
      k.expect_map({"frame", "angle_deg", "translation"});
      Motion::Key key;
      key.frame = k.child("frame").as_int();
      k.optional("angle_deg", key.angle_deg, get_d);
      k.optional("translation", key.translation, get_v);
      if (!m.keys.empty() && key.frame <= m.keys.back().frame) k.error("key frames must increase");
      m.keys.push_back(key);
    }
  }
  if (m.kind == Motion::Kind::kKeyframes && m.keys.empty()) r.error("keyframes motion needs keys");
  return m;
}

ShapeSpec parse_shape(const Reader& r) {
  const std::string type = r.child("type").as_string();
  if (type == "half_space") {
    r.expect_map({"type", "point", "normal"});
    HalfSpace s;
    s.point = r.child("point").as_vec3();
    s.normal = unit_normal(r.child("normal"));
    return s;
  }
  if (type == "sphere") {
    r.expect_map({"type", "center", "radius"});
    Sphere s;
    s.center = r.child("center").as_vec3();
    s.radius = r.child("radius").as_double();
    return s;
  }
  if (type == "capsule") {
    r.expect_map({"type", "p0", "p1", "radius"});
    Capsule s;
    s.p0 = r.child("p0").as_vec3();
    s.p1 = r.child("p1").as_vec3();
    s.radius = r.child("radius").as_double();
    return s;
  }
  if (type == "levelset") {
    r.expect_map({"type", "file"});
    return LevelsetFileSpec{r.child("file").as_string()};
  }
  if (type == "box_sdf") {
    r.expect_map({"type", "min", "max", "spacing", "padding"});
    BoxSdfSpec s;
    s.min = r.child("min").as_vec3();
    s.max = r.child("max").as_vec3();
    r.optional("spacing", s.spacing, get_d);
    r.optional("padding", s.padding, get_d);
    return s;
  }
  r.child("type").error("unknown shape type '" + type + "' (half_space, sphere, capsule, levelset, box_sdf)");
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("malformed scenario: " + e.msg + " (line " + std::to_string(e.mark.line + 1) + ")");
  }
  const Reader r(root, "");
  r.expect_map({"name", "frames", "seed", "mesh", "material", "attachments", "colliders", "proxies", "solver"});

  Scenario s;
  s.base_dir = base_dir;
  s.name = r.child("name").as_string();
  r.optional("frames", s.frames, get_i);
  if (r.has("seed")) s.seed = r.child("seed").as_uint64();

  const Reader mesh = r.child("mesh");
  mesh.expect_map({"lattice", "tetgen"});
  if (mesh.has("lattice") == mesh.has("tetgen")) mesh.error("give exactly one of lattice or tetgen");
  if (mesh.has("lattice")) {
    const Reader l = mesh.child("lattice");
    l.expect_map({"extent", "cells", "jitter"});
    LatticeSpec spec;
    spec.extent = l.child("extent").as_vec3();
    spec.cells = l.child("cells").as_int3();
    l.optional("jitter", spec.jitter, get_d);
    s.mesh = spec;
  } else {
    const Reader t = mesh.child("tetgen");
    t.expect_map({"node", "ele"});
    s.mesh = TetgenSpec{t.child("node").as_string(), t.child("ele").as_string()};
  }

  if (r.has("material")) {
    const Reader m = r.child("material");
    m.expect_map({"mu", "lambda", "mu_prime", "sigma_min", "sigma_max"});
    m.optional("mu", s.material.mu, get_d);
    m.optional("lambda", s.material.lambda, get_d);
    m.optional("mu_prime", s.material.mu_prime, get_d);
    m.optional("sigma_min", s.material.sigma_min, get_d);
    m.optional("sigma_max", s.material.sigma_max, get_d);
    try {
      s.material.validate();
    } catch (const ConfigError& e) {
      m.error(e.what());
    }
  }

  if (r.has("attachments")) {
    for (const Reader& a : r.child("attachments").items()) {
      a.expect_map({"name", "region", "stiffness", "motion"});
      AttachmentGroup g;
      g.name = a.child("name").as_string();
      g.region = parse_region(a.child("region"));
      a.optional("stiffness", g.stiffness, get_d);
      if (a.has("motion")) g.motion = parse_motion(a.child("motion"));
      s.attachments.push_back(std::move(g));
    }
  }

  if (r.has("colliders")) {
    for (const Reader& c : r.child("colliders").items()) {
      c.expect_map({"name", "shape", "motion", "follow", "enable_frame", "disable_frame"});
      ColliderSpec spec;
      spec.name = c.child("name").as_string();
      spec.shape = parse_shape(c.child("shape"));
      if (c.has("motion")) spec.motion = parse_motion(c.child("motion"));
      if (c.has("follow")) spec.follow = c.child("follow").as_string();
      c.optional("enable_frame", spec.enable_frame, get_i);
      c.optional("disable_frame", spec.disable_frame, get_i);
      s.colliders.push_back(std::move(spec));
    }
  }

  if (r.has("proxies")) {
    const Reader p = r.child("proxies");
    p.expect_map({"region", "per_element", "stiffness"});
    ProxySpec spec;
    spec.region = parse_region(p.child("region"));
    p.optional("per_element", spec.per_element, get_i);
    if (p.has("stiffness")) spec.stiffness = p.child("stiffness").as_double();
    s.proxies = spec;
  }

  if (r.has("solver")) {
    const Reader v = r.child("solver");
    v.expect_map({"kind", "outer_iters", "inner_iters", "pcg_tol", "pcg_max_iters", "freeze_detection"});
    if (v.has("kind")) {
      try {
        s.solver.kind = parse_solver_kind(v.child("kind").as_string());
      } catch (const ConfigError& e) {
        v.child("kind").error(e.what());
      }
    }
    v.optional("outer_iters", s.solver.outer_iters, get_i);
    v.optional("inner_iters", s.solver.inner_iters, get_i);
    v.optional("pcg_tol", s.solver.pcg_tol, get_d);
    v.optional("pcg_max_iters", s.solver.pcg_max_iters, get_i);
    if (v.has("freeze_detection")) s.solver.freeze_detection = v.child("freeze_detection").as_bool();
  }

  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (line " + std::to_string(line_of(root)) + ")");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), file.parent_path());
}

// ---------------------------------------------------------------------------
// Echo

namespace {

YAML::Emitter& operator<<(YAML::Emitter& out, const Vec3& v) {
  out << YAML::Flow << YAML::BeginSeq << v[0] << v[1] << v[2] << YAML::EndSeq;
  return out;
}

void emit_region(YAML::Emitter& out, const Region& r) {
  out << YAML::BeginMap << YAML::Key << "min" << YAML::Value << r.min << YAML::Key << "max" << YAML::Value
      << r.max << YAML::EndMap;
}

void emit_motion(YAML::Emitter& out, const Motion& m) {
  static constexpr const char* kNames[] = {"static", "rotate", "translate", "keyframes"};
  out << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << kNames[static_cast<int>(m.kind)];
  out << YAML::Key << "axis" << YAML::Value << m.axis;
  out << YAML::Key << "pivot" << YAML::Value << m.pivot;
  out << YAML::Key << "rate_deg" << YAML::Value << m.rate_deg;
  out << YAML::Key << "velocity" << YAML::Value << m.velocity;
  out << YAML::Key << "start_frame" << YAML::Value << m.start_frame;
  out << YAML::Key << "stop_frame" << YAML::Value << m.stop_frame;
  if (!m.keys.empty()) {
    out << YAML::Key << "keys" << YAML::Value << YAML::BeginSeq;
    for (const auto& k : m.keys) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "frame" << YAML::Value << k.frame << YAML::Key
          << "angle_deg" << YAML::Value << k.angle_deg << YAML::Key << "translation" << YAML::Value
          << k.translation << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

struct ShapeEmitter {
  YAML::Emitter& out;
  void operator()(const HalfSpace& s) const {
    out << YAML::Key << "type" << YAML::Value << "half_space" << YAML::Key << "point" << YAML::Value << s.point
        << YAML::Key << "normal" << YAML::Value << s.normal;
  }
  void operator()(const Sphere& s) const {
    out << YAML::Key << "type" << YAML::Value << "sphere" << YAML::Key << "center" << YAML::Value << s.center
        << YAML::Key << "radius" << YAML::Value << s.radius;
  }
  void operator()(const Capsule& s) const {
    out << YAML::Key << "type" << YAML::Value << "capsule" << YAML::Key << "p0" << YAML::Value << s.p0
        << YAML::Key << "p1" << YAML::Value << s.p1 << YAML::Key << "radius" << YAML::Value << s.radius;
  }
  void operator()(const LevelsetFileSpec& s) const {
    out << YAML::Key << "type" << YAML::Value << "levelset" << YAML::Key << "file" << YAML::Value << s.file;
  }
  void operator()(const BoxSdfSpec& s) const {
    out << YAML::Key << "type" << YAML::Value << "box_sdf" << YAML::Key << "min" << YAML::Value << s.min
        << YAML::Key << "max" << YAML::Value << s.max << YAML::Key << "spacing" << YAML::Value << s.spacing
        << YAML::Key << "padding" << YAML::Value << s.padding;
  }
};

}  // namespace

std::string scenario_to_yaml(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
  out << YAML::Key << "frames" << YAML::Value << s.frames;
  out << YAML::Key << "seed" << YAML::Value << s.seed;

  out << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
  if (const auto* l = std::get_if<LatticeSpec>(&s.mesh)) {
    out << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "extent" << YAML::Value << l->extent;
    out << YAML::Key << "cells" << YAML::Value << YAML::Flow << YAML::BeginSeq << l->cells[0] << l->cells[1]
        << l->cells[2] << YAML::EndSeq;
    out << YAML::Key << "jitter" << YAML::Value << l->jitter;
    out << YAML::EndMap;
  } else {
    const auto& t = std::get<TetgenSpec>(s.mesh);
    out << YAML::Key << "tetgen" << YAML::Value << YAML::BeginMap << YAML::Key << "node" << YAML::Value
        << YAML::DoubleQuoted << t.node_file << YAML::Key << "ele" << YAML::Value << YAML::DoubleQuoted
        << t.ele_file << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "material" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mu" << YAML::Value << s.material.mu;
  out << YAML::Key << "lambda" << YAML::Value << s.material.lambda;
  out << YAML::Key << "mu_prime" << YAML::Value << s.material.mu_prime;
  out << YAML::Key << "sigma_min" << YAML::Value << s.material.sigma_min;
  out << YAML::Key << "sigma_max" << YAML::Value << s.material.sigma_max;
  out << YAML::EndMap;

  out << YAML::Key << "attachments" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : s.attachments) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << g.name;
    out << YAML::Key << "region" << YAML::Value;
    emit_region(out, g.region);
    out << YAML::Key << "stiffness" << YAML::Value << g.stiffness;
    out << YAML::Key << "motion" << YAML::Value;
    emit_motion(out, g.motion);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "colliders" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : s.colliders) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
    out << YAML::Key << "shape" << YAML::Value << YAML::BeginMap;
    std::visit(ShapeEmitter{out}, c.shape);
    out << YAML::EndMap;
    out << YAML::Key << "motion" << YAML::Value;
    emit_motion(out, c.motion);
    if (!c.follow.empty()) out << YAML::Key << "follow" << YAML::Value << YAML::DoubleQuoted << c.follow;
    out << YAML::Key << "enable_frame" << YAML::Value << c.enable_frame;
    out << YAML::Key << "disable_frame" << YAML::Value << c.disable_frame;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (s.proxies) {
    out << YAML::Key << "proxies" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "region" << YAML::Value;
    emit_region(out, s.proxies->region);
    out << YAML::Key << "per_element" << YAML::Value << s.proxies->per_element;
    if (s.proxies->stiffness) out << YAML::Key << "stiffness" << YAML::Value << *s.proxies->stiffness;
    out << YAML::EndMap;
  }

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(s.solver.kind));
  out << YAML::Key << "outer_iters" << YAML::Value << s.solver.outer_iters;
  out << YAML::Key << "inner_iters" << YAML::Value << s.solver.inner_iters;
  out << YAML::Key << "pcg_tol" << YAML::Value << s.solver.pcg_tol;
  out << YAML::Key << "pcg_max_iters" << YAML::Value << s.solver.pcg_max_iters;
  out << YAML::Key << "freeze_detection" << YAML::Value << s.solver.freeze_detection;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace schurpd

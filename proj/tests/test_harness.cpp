#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <fstream>
#include <sstream>

#include "schurpd/harness.hpp"

using namespace schurpd;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
name: tiny
mesh:
  lattice: {extent: [1, 0.25, 0.25], cells: [4, 1, 1]}
attachments:
  - name: left
    region: {min: [0, 0, 0], max: [0, 0.25, 0.25]}
)";

const char* kPress = R"(
name: press
frames: 4
mesh:
  lattice: {extent: [1, 0.3, 0.3], cells: [6, 2, 2]}
material: {mu: 100}
attachments:
  - name: ends
    region: {min: [0, 0, 0], max: [0, 0.3, 0.3]}
    stiffness: 1.0e4
  - name: far
    region: {min: [1, 0, 0], max: [1, 0.3, 0.3]}
    stiffness: 1.0e4
colliders:
  - name: plate
    shape: {type: half_space, point: [0.5, 0.15, 0.31], normal: [0, 0, -1]}
    motion: {type: translate, velocity: [0, 0, -0.01]}
proxies:
  region: {min: [0.3, 0, 0.3], max: [0.7, 0.3, 0.3]}
solver: {outer_iters: 2, inner_iters: 2}
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("schurpd_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Scenario, MinimalDefaults) {
  const Scenario s = parse_scenario(kMinimal);
  EXPECT_EQ(s.name, "tiny");
  EXPECT_EQ(s.frames, 1);
  EXPECT_EQ(s.solver.outer_iters, 1);
  EXPECT_EQ(s.solver.inner_iters, 1);
  EXPECT_EQ(s.solver.kind, SolverKind::kSchur);
  ASSERT_EQ(s.attachments.size(), 1u);
  EXPECT_EQ(s.attachments[0].motion.kind, Motion::Kind::kStatic);
  EXPECT_FALSE(s.proxies.has_value());
}

TEST(Scenario, Errors) {
  const std::string sigma = error_of(std::string(kMinimal) + "material: {sigma_min: 0.95, sigma_max: 0.9}\n");
  EXPECT_NE(sigma.find("sigma_min"), std::string::npos);
  EXPECT_NE(sigma.find("sigma_max"), std::string::npos);

  const std::string unknown = error_of(std::string(kMinimal) + "solver:\n  kind: schur\n  inner: 3\n");
  EXPECT_NE(unknown.find("solver.inner"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("line 10"), std::string::npos) << unknown;

  EXPECT_NE(error_of(std::string(kMinimal) + "frames: 0\n").find("frames"), std::string::npos);
  EXPECT_NE(error_of(std::string(kMinimal) + "solver: {kind: lu}\n").find("solver.kind"), std::string::npos);
  EXPECT_NE(error_of(std::string(kMinimal) + "colliders:\n  - name: c\n    shape: {type: sphere, center: [0,0,0], radius: 1}\n    follow: nobody\n")
                .find("nobody"),
            std::string::npos);
  EXPECT_FALSE(error_of("name: [unclosed\n").empty());
}

TEST(Motion, RotationRate) {
  Motion m;
  m.kind = Motion::Kind::kRotate;
  m.axis = Vec3(0, -1, 0);
  m.pivot = Vec3(1, 0.25, 0);
  m.rate_deg = 2.5;
  const RigidTransform t = m.at(10);
  const Eigen::AngleAxisd aa(t.rotation);
  EXPECT_NEAR(aa.angle(), 25.0 * M_PI / 180.0, 1e-12);
  EXPECT_LT((aa.axis() - m.axis).norm(), 1e-12);
  EXPECT_LT((t.apply(m.pivot) - m.pivot).norm(), 1e-15);

  m.start_frame = 2;
  m.stop_frame = 6;
  EXPECT_NEAR(Eigen::AngleAxisd(m.at(1).rotation).angle(), 0.0, 1e-15);
  EXPECT_NEAR(Eigen::AngleAxisd(m.at(40).rotation).angle(), 10.0 * M_PI / 180.0, 1e-12);
}

TEST(Motion, Keyframes) {
  Motion m;
  m.kind = Motion::Kind::kKeyframes;
  m.axis = Vec3::UnitZ();
  m.keys = {{0, 0.0, Vec3::Zero()}, {10, 90.0, Vec3(1, 0, 0)}};
  EXPECT_LT((m.at(5).translation - Vec3(0.5, 0, 0)).norm(), 1e-15);
  EXPECT_NEAR(Eigen::AngleAxisd(m.at(5).rotation).angle(), M_PI / 4, 1e-12);
  EXPECT_LT((m.at(20).translation - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(Scenario, BuiltInScenesRoundTrip) {
  for (const char* name : {"beam_press", "hinge_fold", "untangle"}) {
    const fs::path file = fs::path(SCHURPD_SOURCE_DIR) / "scenes" / (std::string(name) + ".yaml");
    const Scenario s = load_scenario(file);
    EXPECT_EQ(s.name, name);
    const Scenario back = parse_scenario(scenario_to_yaml(s), s.base_dir);
    EXPECT_TRUE(back == s) << name;
  }
}

TEST(Run, ZeroDeformationScene) {
  Scenario s = parse_scenario(kMinimal);
  s.frames = 3;
  const fs::path out = scratch("rest");
  const RunReport r = run(s, out);
  ASSERT_EQ(r.frames.size(), 3u);
  for (const auto& f : r.frames) EXPECT_NEAR(f.energy, 0.0, 1e-12);
  const std::string obj1 = slurp(out / "frame_0001.obj");
  EXPECT_EQ(obj1, slurp(out / "frame_0003.obj"));
  std::ostringstream rest;
  Scene scene(s);
  write_obj(rest, scene.simulator().mesh(), rest_positions(scene.simulator().mesh()));
  EXPECT_EQ(obj1, rest.str());
  fs::remove_all(out);
}

TEST(Run, OutputsAreCompleteAndDeterministic) {
  const Scenario s = parse_scenario(kPress);
  RunOptions o;
  o.timing = false;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const RunReport ra = run(s, a, o);
  run(s, b, o);
  int objs = 0;
  for (const auto& e : fs::directory_iterator(a)) objs += e.path().extension() == ".obj";
  EXPECT_EQ(objs, 4);
  const std::string csv = slurp(a / "metrics.csv");
  EXPECT_EQ(csv.rfind("frame,t_local_ms,t_forward_ms,t_detect_ms,t_dense_ms,t_backward_ms,t_total_ms,energy,"
                      "active_proxies,max_penetration,residual\r\n",
                      0),
            0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  for (int f = 1; f <= 4; ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.obj", f);
    EXPECT_EQ(slurp(a / name), slurp(b / name));
  }
  EXPECT_EQ(csv, slurp(b / "metrics.csv"));
  EXPECT_GT(ra.max_penetration(), 0.0);

  // The echoed configuration parses back to the same scenario.
  EXPECT_TRUE(parse_scenario(slurp(a / "config.yaml")) == s);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, OverridesApply) {
  const Scenario s = parse_scenario(kPress);
  RunOptions o;
  o.frames = 2;
  o.solver = SolverKind::kPcg;
  o.outer_iters = 5;
  o.inner_iters = 3;
  o.seed = 42;
  const Scenario t = apply_overrides(s, o);
  EXPECT_EQ(t.frames, 2);
  EXPECT_EQ(t.solver.kind, SolverKind::kPcg);
  EXPECT_EQ(t.solver.outer_iters, 5);
  EXPECT_EQ(t.solver.inner_iters, 3);
  EXPECT_EQ(t.seed, 42u);
  o.frames = 0;
  EXPECT_THROW(apply_overrides(s, o), ConfigError);
}

TEST(Run, EmptyAttachmentRegion) {
  const std::string text = std::string(kMinimal) +
                           "  - name: nowhere\n    region: {min: [5, 5, 5], max: [6, 6, 6]}\n";
  EXPECT_THROW(Scene(parse_scenario(text)), ConfigError);
}

TEST(Compare, SolversAgree) {
  const Scenario s = parse_scenario(kPress);
  const fs::path out = scratch("cmp");
  const ComparisonReport r = compare(s, {SolverKind::kSchur, SolverKind::kFullRefactor, SolverKind::kPcg}, out);
  EXPECT_LE(r.max_rel_diff("full"), 1e-6);
  EXPECT_LE(r.max_rel_diff("pcg"), 1e-6);
  EXPECT_EQ(r.rows.size(), 12u);
  EXPECT_TRUE(fs::exists(out / "comparison.csv"));
  EXPECT_THROW(compare(s, {SolverKind::kSchur}, out), ConfigError);
  fs::remove_all(out);
}
